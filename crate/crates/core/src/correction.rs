//! Distance-driven blending of model predictions with a judgment function.
//!
//! Each test row carries a distance `k`: how far the observed judgment
//! variable sits from what the estimator expected given the other features.
//! A small `k` means the judgment variable looks ordinary, so the model's
//! prediction stands; a large `k` flags an unusual case where trust shifts
//! toward the judgment function. The shift is a centered sigmoid of `k`
//! whose steepness `alpha` is picked by exhaustive grid search on a
//! validation split.

use crate::error::{Error, Result};
use crate::metrics;

/// Tuning knobs for the correction step.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionConfig {
    /// Steepness of the trust-shift sigmoid, normally chosen by
    /// [`select_alpha`].
    pub alpha: f64,
    /// Candidate steepness values for the grid search, strictly increasing.
    pub alpha_grid: Vec<f64>,
    /// Bucket count for the validation closeness profiles.
    pub q_buckets: usize,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            alpha: 1.0,
            alpha_grid: vec![0.1, 0.5, 1.0, 2.0, 5.0, 8.0],
            q_buckets: 12,
        }
    }
}

impl CorrectionConfig {
    /// Rejects non-positive steepness, a malformed grid, or a bucket count
    /// too small to shape a profile.
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::Config("alpha grid is empty".into()));
        }
        for pair in self.alpha_grid.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Config(
                    "alpha grid must be strictly increasing".into(),
                ));
            }
        }
        if self
            .alpha_grid
            .iter()
            .any(|a| !a.is_finite() || *a <= 0.0)
        {
            return Err(Error::Config("alpha grid entries must be positive".into()));
        }
        if self.q_buckets < 2 {
            return Err(Error::Config(format!(
                "need at least 2 buckets, got {}",
                self.q_buckets
            )));
        }
        Ok(())
    }
}

/// One corrected test row, keeping every intermediate for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedPrediction {
    /// Model's predictive probability.
    pub y_hat: f64,
    /// Judgment function evaluated at the observed judgment variable.
    pub g_of_z: f64,
    /// Estimator's expectation of the normalized judgment variable, when
    /// the caller recorded it.
    pub z_expected: Option<f64>,
    /// Distance between observed and expected judgment variable.
    pub k: f64,
    /// Trust shifted toward the judgment function.
    pub w: f64,
    /// Final probability `w·g_of_z + (1−w)·y_hat`.
    pub y_final: f64,
}

impl CorrectedPrediction {
    /// Records the estimator output that produced `k`.
    pub fn with_expected(mut self, z_expected: f64) -> Self {
        self.z_expected = Some(z_expected);
        self
    }
}

/// Trust weight `((1/(1+e^{−α·k})) − 0.5)·2`, a sigmoid centered so that
/// zero distance yields zero correction.
///
/// Algebraically identical to `tanh(α·k/2)`, hence strictly below 1 for
/// every finite `k`; in 64-bit arithmetic it rounds to exactly 1 once
/// `α·k` exceeds roughly 37, where `1−w` is far below one ulp anyway.
pub fn weight(k: f64, alpha: f64) -> Result<f64> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Domain(format!(
            "distance must be non-negative, got {k}"
        )));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok((1.0 / (1.0 + (-alpha * k).exp()) - 0.5) * 2.0)
}

/// Blends one prediction with the judgment function.
///
/// The output is the convex combination `w·g_of_z + (1−w)·y_hat`, so it
/// always lies in the closed interval between the two inputs; `k = 0`
/// returns the model prediction untouched.
pub fn correct(y_hat: f64, g_of_z: f64, k: f64, alpha: f64) -> Result<CorrectedPrediction> {
    for (name, v) in [("prediction", y_hat), ("judgment value", g_of_z)] {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} {v} is outside [0, 1]")));
        }
    }
    let w = weight(k, alpha)?;
    Ok(CorrectedPrediction {
        y_hat,
        g_of_z,
        z_expected: None,
        k,
        w,
        y_final: w * g_of_z + (1.0 - w) * y_hat,
    })
}

/// Applies [`correct`] across parallel slices of rows.
pub fn correct_batch(
    y_hat: &[f64],
    g_of_z: &[f64],
    k: &[f64],
    alpha: f64,
) -> Result<Vec<CorrectedPrediction>> {
    if y_hat.len() != g_of_z.len() || y_hat.len() != k.len() {
        return Err(Error::Shape(format!(
            "correction over {} predictions, {} judgment values, {} distances",
            y_hat.len(),
            g_of_z.len(),
            k.len()
        )));
    }
    y_hat
        .iter()
        .zip(g_of_z)
        .zip(k)
        .map(|((&y, &g), &k)| correct(y, g, k, alpha))
        .collect()
}

/// Validation rows needed to score one steepness candidate.
#[derive(Debug, Clone, Copy)]
pub struct ValidationSlice<'a> {
    /// Model predictions.
    pub y_hat: &'a [f64],
    /// Judgment-function values per row.
    pub g_of_z: &'a [f64],
    /// Estimator distances per row.
    pub k: &'a [f64],
    /// Ground-truth labels.
    pub labels: &'a [u8],
    /// Raw judgment scores, the bucketing key.
    pub judgment_scores: &'a [f64],
}

impl ValidationSlice<'_> {
    fn check(&self) -> Result<()> {
        let n = self.y_hat.len();
        if n == 0 {
            return Err(Error::Data("empty validation split".into()));
        }
        if [
            self.g_of_z.len(),
            self.k.len(),
            self.labels.len(),
            self.judgment_scores.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return Err(Error::Shape("ragged validation columns".into()));
        }
        Ok(())
    }
}

/// Combined metric of the corrected predictions on a validation split for
/// one steepness value. `range` must span the judgment scores of the whole
/// dataset so every evaluation shares one bucket grid.
pub fn alpha_score(
    rows: &ValidationSlice,
    alpha: f64,
    q_buckets: usize,
    range: (f64, f64),
) -> Result<f64> {
    rows.check()?;
    let corrected = correct_batch(rows.y_hat, rows.g_of_z, rows.k, alpha)?;
    let y_final: Vec<f64> = corrected.iter().map(|c| c.y_final).collect();
    let report = metrics::evaluate(
        &y_final,
        rows.labels,
        rows.judgment_scores,
        rows.g_of_z,
        q_buckets,
        range,
    )?;
    Ok(report.combined)
}

/// Exhaustive grid search for the steepness maximizing the combined metric
/// on validation; ties go to the smallest candidate, the mildest
/// correction.
pub fn select_alpha(
    config: &CorrectionConfig,
    rows: &ValidationSlice,
    range: (f64, f64),
) -> Result<f64> {
    config.validate()?;
    rows.check()?;
    let mut best = (config.alpha_grid[0], f64::NEG_INFINITY);
    // Ascending grid plus strict improvement = smallest winner on ties.
    for &alpha in &config.alpha_grid {
        let score = alpha_score(rows, alpha, config.q_buckets, range)?;
        if score > best.1 {
            best = (alpha, score);
        }
    }
    Ok(best.0)
}
