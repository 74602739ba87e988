//! Pluggable judgment-variable estimators.
//!
//! The adversarial estimator has classical stand-ins — ordinary least
//! squares, ridge, k-nearest-neighbors, and the plain training mean — all
//! behind one interface so the correction pipeline can swap them without
//! caring which is active. Whatever the kind, the distance fed downstream is
//! computed in min-max-normalized judgment space from the same scaler, which
//! keeps comparisons across estimators fair.

use crate::ejgan::{split_judgment, EjGan, EjGanConfig, ZScaler};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    EjGan,
    LinearRegression,
    Ridge,
    Knn,
    Mean,
}

impl EstimatorKind {
    /// Every kind, in presentation order.
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::EjGan,
        EstimatorKind::LinearRegression,
        EstimatorKind::Ridge,
        EstimatorKind::Knn,
        EstimatorKind::Mean,
    ];

    /// Stable config-file token.
    pub fn token(self) -> &'static str {
        match self {
            EstimatorKind::EjGan => "ejgan",
            EstimatorKind::LinearRegression => "linear_regression",
            EstimatorKind::Ridge => "ridge",
            EstimatorKind::Knn => "knn",
            EstimatorKind::Mean => "mean",
        }
    }

    /// Parses a config-file token.
    pub fn from_token(token: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.token() == token)
            .ok_or_else(|| Error::Config(format!("unknown estimator kind '{token}'")))
    }
}

/// Settings for the non-adversarial estimator kinds plus the adversarial
/// config used when `EstimatorKind::EjGan` is requested.
#[derive(Clone, Copy, Debug)]
pub struct EstimatorParams {
    pub ridge_penalty: f64,
    pub knn_k: usize,
    pub gan: EjGanConfig,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams { ridge_penalty: 1.0, knn_k: 5, gan: EjGanConfig::default() }
    }
}

/// Per-feature zero-mean unit-variance scaling; zero-variance features keep a
/// unit divisor so distances stay finite.
#[derive(Clone, Debug)]
pub(crate) struct Standardizer {
    pub(crate) means: Vec<f64>,
    pub(crate) stds: Vec<f64>,
}

impl Standardizer {
    pub(crate) fn fit(rows: &[Vec<f64>]) -> Self {
        let n = rows.len() as f64;
        let m = rows[0].len();
        let mut means = vec![0.0; m];
        for row in rows {
            for (acc, v) in means.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for acc in means.iter_mut() {
            *acc /= n;
        }
        let mut stds = vec![0.0; m];
        for row in rows {
            for ((acc, v), mu) in stds.iter_mut().zip(row).zip(&means) {
                *acc += (v - mu) * (v - mu);
            }
        }
        for acc in stds.iter_mut() {
            *acc = (*acc / n).sqrt();
            if *acc == 0.0 {
                *acc = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    pub(crate) fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, mu), sd)| (v - mu) / sd)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub(crate) enum EstimatorState {
    Gan(Box<EjGan>),
    Linear { coefficients: Vec<f64>, intercept: f64 },
    Knn { standardizer: Standardizer, rows: Vec<Vec<f64>>, z: Vec<f64>, k: usize },
    Mean(f64),
}

/// A fitted estimator of the judgment variable from the remaining features.
#[derive(Clone, Debug)]
pub struct JudgmentEstimator {
    pub(crate) kind: EstimatorKind,
    pub(crate) state: EstimatorState,
    pub(crate) scaler: ZScaler,
    pub(crate) context_dim: usize,
}

fn validate_training_data(s: &[Vec<f64>], z: &[f64]) -> Result<usize> {
    if s.is_empty() {
        return Err(Error::Data("cannot fit an estimator on zero rows".into()));
    }
    if s.len() != z.len() {
        return Err(Error::Shape(format!("{} context rows vs {} judgment values", s.len(), z.len())));
    }
    let dim = s[0].len();
    if s.iter().any(|row| row.len() != dim) {
        return Err(Error::Shape("ragged context rows".into()));
    }
    if s.iter().any(|row| row.iter().any(|v| !v.is_finite())) {
        return Err(Error::Data("context features contain non-finite values".into()));
    }
    Ok(dim)
}

/// Solve (XᵀX + jitter·I)β = Xᵀy. `x` rows already carry any intercept column.
fn normal_equations(x: &[Vec<f64>], y: &[f64], jitter: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let m = x[0].len();
    let design = DMatrix::from_fn(n, m, |r, c| x[r][c]);
    let target = DVector::from_fn(n, |r, _| y[r]);
    let mut gram = design.transpose() * &design;
    for d in 0..m {
        gram[(d, d)] += jitter;
    }
    let rhs = design.transpose() * target;
    gram.lu()
        .solve(&rhs)
        .map(|beta| beta.iter().copied().collect())
        .ok_or_else(|| Error::Data("normal equations are singular even after jitter".into()))
}

/// Fit the requested estimator on context rows `s` and judgment column `z`.
/// When the dataset has no context features at all (the judgment variable was
/// its only column), every kind degrades to the training-mean estimator.
pub fn fit_estimator(
    kind: EstimatorKind,
    s: &[Vec<f64>],
    z: &[f64],
    params: &EstimatorParams,
) -> Result<JudgmentEstimator> {
    if params.ridge_penalty < 0.0 || !params.ridge_penalty.is_finite() {
        return Err(Error::Config("ridge penalty must be non-negative and finite".into()));
    }
    if params.knn_k == 0 {
        return Err(Error::Config("neighbor count must be at least 1".into()));
    }
    let dim = validate_training_data(s, z)?;
    let scaler = ZScaler::fit(z)?;
    let mean_z = z.iter().sum::<f64>() / z.len() as f64;
    if dim == 0 {
        return Ok(JudgmentEstimator {
            kind,
            state: EstimatorState::Mean(mean_z),
            scaler,
            context_dim: 0,
        });
    }
    let state = match kind {
        EstimatorKind::EjGan => {
            let (gan, _) = EjGan::train(s, z, params.gan)?;
            EstimatorState::Gan(Box::new(gan))
        }
        EstimatorKind::LinearRegression => {
            let with_intercept: Vec<Vec<f64>> = s
                .iter()
                .map(|row| {
                    let mut r = Vec::with_capacity(dim + 1);
                    r.push(1.0);
                    r.extend_from_slice(row);
                    r
                })
                .collect();
            let beta = normal_equations(&with_intercept, z, 1e-10)?;
            EstimatorState::Linear { coefficients: beta[1..].to_vec(), intercept: beta[0] }
        }
        EstimatorKind::Ridge => {
            // Center features and target so the penalty never touches the
            // intercept, then recover it from the means.
            let std = Standardizer::fit(s);
            let centered: Vec<Vec<f64>> = s
                .iter()
                .map(|row| row.iter().zip(&std.means).map(|(v, mu)| v - mu).collect())
                .collect();
            let zc: Vec<f64> = z.iter().map(|v| v - mean_z).collect();
            let beta = normal_equations(&centered, &zc, params.ridge_penalty.max(1e-10))?;
            let intercept =
                mean_z - beta.iter().zip(&std.means).map(|(b, mu)| b * mu).sum::<f64>();
            EstimatorState::Linear { coefficients: beta, intercept }
        }
        EstimatorKind::Knn => {
            let standardizer = Standardizer::fit(s);
            let rows: Vec<Vec<f64>> = s.iter().map(|r| standardizer.apply(r)).collect();
            EstimatorState::Knn {
                standardizer,
                rows,
                z: z.to_vec(),
                k: params.knn_k.min(s.len()),
            }
        }
        EstimatorKind::Mean => EstimatorState::Mean(mean_z),
    };
    Ok(JudgmentEstimator { kind, state, scaler, context_dim: dim })
}

impl JudgmentEstimator {
    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    /// True when a featureless dataset forced the mean fallback.
    pub fn is_degraded(&self) -> bool {
        self.kind != EstimatorKind::Mean && matches!(self.state, EstimatorState::Mean(_))
    }

    pub fn context_dim(&self) -> usize {
        self.context_dim
    }

    pub fn scaler(&self) -> &ZScaler {
        &self.scaler
    }

    /// Linear coefficients and intercept, for the fits that have them.
    pub fn linear_parts(&self) -> Option<(&[f64], f64)> {
        match &self.state {
            EstimatorState::Linear { coefficients, intercept } => {
                Some((coefficients, *intercept))
            }
            _ => None,
        }
    }

    fn check_dim(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.context_dim {
            return Err(Error::Shape(format!(
                "expected {} context features, got {}",
                self.context_dim,
                s.len()
            )));
        }
        Ok(())
    }

    /// Expected judgment value in original units.
    pub fn estimate(&self, s: &[f64]) -> Result<f64> {
        self.check_dim(s)?;
        match &self.state {
            EstimatorState::Gan(gan) => gan.estimate(s),
            EstimatorState::Linear { coefficients, intercept } => {
                Ok(coefficients.iter().zip(s).map(|(c, v)| c * v).sum::<f64>() + intercept)
            }
            EstimatorState::Knn { standardizer, rows, z, k } => {
                let query = standardizer.apply(s);
                let mut dists: Vec<(f64, usize)> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let d2: f64 =
                            row.iter().zip(&query).map(|(a, b)| (a - b) * (a - b)).sum();
                        (d2, i)
                    })
                    .collect();
                // Stable sort on distance keeps equidistant rows in index
                // order, so ties resolve to the lowest row index.
                dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let picked = &dists[..*k];
                Ok(picked.iter().map(|&(_, i)| z[i]).sum::<f64>() / *k as f64)
            }
            EstimatorState::Mean(m) => Ok(*m),
        }
    }

    /// Expected judgment in min-max-normalized space.
    pub fn normalized_estimate(&self, s: &[f64]) -> Result<f64> {
        match &self.state {
            // The adversarial generator already works in normalized space;
            // skip the denormalize/normalize round trip.
            EstimatorState::Gan(gan) => gan.normalized_estimate(s),
            _ => Ok(self.scaler.normalize(self.estimate(s)?)),
        }
    }

    /// |expected − observed| in normalized judgment space for a full feature
    /// row. This is the trust signal the correction weight consumes.
    pub fn distance_k(&self, x: &[f64], judgment_index: usize) -> Result<f64> {
        let (s, z) = split_judgment(x, judgment_index)?;
        let expected = self.normalized_estimate(&s)?;
        Ok((expected - self.scaler.normalize(z)).abs())
    }
}
