//! Seeded synthetic benchmark generator.
//!
//! Each dataset draws i.i.d. uniform features, scores every row with one of
//! four functional forms of a random linear projection, normalizes the
//! scores into [0, 1] by their rank within the dataset, and thresholds them
//! at 0.5 into binary labels — so each class holds close to half the rows
//! under every form. One feature column, chosen at random, doubles as the
//! judgment variable; the matching scalar slice of the label recipe becomes
//! the judgment function, normalized the same rank-based way over that
//! column. A dedicated splitter holds the rows with the most extreme
//! judgment values out of training, which is exactly the regime the
//! correction step is meant to repair.
//!
//! Rank normalization (rather than min-max) is what keeps the exponential
//! forms usable: exp concentrates nearly all mass within a thin slice below
//! the sample maximum, so a min-max scale puts ~98% of rows under any fixed
//! threshold and the labels collapse to one class.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::Normal;

use crate::dataio::Dataset;
use crate::error::{Error, Result};

/// Functional form mapping the linear projection to a raw label score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthForm {
    /// `sigmoid(W1·x)`
    SigmoidW1x,
    /// `exp(W1·x)`
    ExpW1x,
    /// `exp((W1·x)^2)`; features stay in `U(-1,1)`, the narrow-support
    /// convention for this form.
    ExpW1xSquared,
    /// `exp((W1+W2)·x)`
    ExpTwoWeights,
}

impl SynthForm {
    /// All forms, in presentation order.
    pub const ALL: [SynthForm; 4] = [
        SynthForm::SigmoidW1x,
        SynthForm::ExpW1x,
        SynthForm::ExpW1xSquared,
        SynthForm::ExpTwoWeights,
    ];

    /// Stable config-file token.
    pub fn token(self) -> &'static str {
        match self {
            SynthForm::SigmoidW1x => "sigmoid_w1x",
            SynthForm::ExpW1x => "exp_w1x",
            SynthForm::ExpW1xSquared => "exp_w1x_squared",
            SynthForm::ExpTwoWeights => "exp_two_weights",
        }
    }

    /// Parses a config-file token.
    pub fn from_token(token: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.token() == token)
            .ok_or_else(|| Error::Config(format!("unknown synthetic form '{token}'")))
    }

    /// Monotone kernel of one projected value: a quantity whose ordering
    /// equals the raw score's ordering. Sigmoid and exp are strictly
    /// increasing, so the projection itself serves for those forms and only
    /// the squared form needs its own shape; ranking the kernel instead of
    /// the raw score sidesteps `exp` overflow entirely.
    fn kernel(self, s: f64) -> f64 {
        match self {
            SynthForm::ExpW1xSquared => s * s,
            _ => s,
        }
    }

    /// Default half-width of the uniform feature distribution; the squared
    /// form conventionally draws from the narrow `(-1, 1)` support.
    fn default_half_width(self) -> f64 {
        match self {
            SynthForm::ExpW1xSquared => 1.0,
            _ => 4.0,
        }
    }
}

/// Average 0-based rank of `v` within ascending `table`, linearly
/// interpolated between neighbors when `v` falls strictly between two
/// stored values. Ties share their run's mean rank, which keeps the map
/// monotone and continuous.
fn rank_position(table: &[f64], v: f64) -> f64 {
    let n = table.len();
    let lt = table.partition_point(|&u| u < v);
    let le = table.partition_point(|&u| u <= v);
    if lt < le {
        return (lt + le - 1) as f64 / 2.0;
    }
    if lt == 0 {
        return 0.0;
    }
    if lt == n {
        return (n - 1) as f64;
    }
    let a = table[lt - 1];
    let b = table[lt];
    let rank_a = (table.partition_point(|&u| u < a) + lt - 1) as f64 / 2.0;
    let rank_b = (lt + table.partition_point(|&u| u <= b) - 1) as f64 / 2.0;
    rank_a + (v - a) / (b - a) * (rank_b - rank_a)
}

/// Rank-normalizes a column into [0, 1]: ascending rank over `n - 1`, ties
/// averaged. The smallest value maps to 0 and the largest to 1 exactly.
fn rank_normalize(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 1 {
        return vec![0.5];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite scores"));
    let mut normalized = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 / (n - 1) as f64;
        for &row in &order[i..=j] {
            normalized[row] = rank;
        }
        i = j + 1;
    }
    normalized
}

/// Number of feature columns: fixed, or sampled uniformly from 1..=20 per
/// dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureCount {
    Fixed(usize),
    Sampled,
}

/// Generation parameters for one synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Number of rows.
    pub n: usize,
    /// Number of feature columns.
    pub m: FeatureCount,
    /// Label-score recipe.
    pub form: SynthForm,
    /// Seed for every random draw in generation.
    pub seed: u64,
    /// Percent of rows forced into the test split by extreme judgment.
    pub holdout_k_percent: f64,
    /// Overrides the per-form uniform feature half-width when set, which
    /// exposes both readings of the ambiguous range convention.
    pub feature_half_width: Option<f64>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 1000,
            m: FeatureCount::Sampled,
            form: SynthForm::SigmoidW1x,
            seed: 0,
            holdout_k_percent: 5.0,
            feature_half_width: None,
        }
    }
}

impl SynthConfig {
    /// Rejects row counts too small to split, empty feature sets, and
    /// holdout fractions outside `(0, 10)` percent.
    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::Config(format!("need at least 10 rows, got {}", self.n)));
        }
        if self.m == FeatureCount::Fixed(0) {
            return Err(Error::Config("need at least one feature".into()));
        }
        let k = self.holdout_k_percent;
        if !k.is_finite() || k <= 0.0 || k >= 10.0 {
            return Err(Error::Config(format!(
                "holdout percent must be inside (0, 10), got {k}"
            )));
        }
        if let Some(w) = self.feature_half_width {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Config(format!("feature half-width {w} must be positive")));
            }
        }
        Ok(())
    }
}

/// The scalar slice of the label recipe along the judgment variable,
/// rank-normalized over the dataset's own judgment column: the function's
/// value at z is the (interpolated) quantile of its kernel among the kernel
/// values seen at derivation time.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentFunction {
    form: SynthForm,
    coefficient: f64,
    /// Ascending kernel values over the generating dataset's judgment
    /// column; the empirical distribution the output is normalized against.
    table: Vec<f64>,
    degenerate: bool,
}

impl JudgmentFunction {
    /// Derives the function from a coefficient and the judgment column it
    /// must be normalized against. Constant kernel output over the column
    /// is tolerated but flagged; such a function answers 0.5 everywhere.
    pub fn new(form: SynthForm, coefficient: f64, judgment_column: &[f64]) -> Result<Self> {
        if judgment_column.is_empty() {
            return Err(Error::Data("judgment column is empty".into()));
        }
        let table: Vec<f64> = judgment_column
            .iter()
            .map(|&z| form.kernel(coefficient * z))
            .collect();
        Self::from_parts(form, coefficient, table)
    }

    /// Rebuilds a function from its serialized parts: the form, the scalar
    /// coefficient, and the kernel sample it normalizes against (sorted
    /// here, so any order is accepted).
    pub fn from_parts(form: SynthForm, coefficient: f64, mut table: Vec<f64>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::Data(format!("non-finite coefficient {coefficient}")));
        }
        if table.is_empty() {
            return Err(Error::Data("judgment normalization table is empty".into()));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite judgment normalization value".into()));
        }
        table.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let degenerate = table.len() == 1 || table[0] == table[table.len() - 1];
        Ok(JudgmentFunction {
            form,
            coefficient,
            table,
            degenerate,
        })
    }

    /// Normalized judgment value in `[0, 1]`; z beyond the derivation-time
    /// kernel range saturates at 0 or 1.
    pub fn value(&self, z: f64) -> f64 {
        if self.degenerate {
            return 0.5;
        }
        let v = self.form.kernel(self.coefficient * z);
        rank_position(&self.table, v) / (self.table.len() - 1) as f64
    }

    /// Applies [`Self::value`] across a column.
    pub fn values(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|&z| self.value(z)).collect()
    }

    /// True when the kernel was constant over the deriving data.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn form(&self) -> SynthForm {
        self.form
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    /// The ascending kernel sample the output is normalized against.
    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

/// A generated dataset plus everything needed to audit it.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    /// Features, labels, and the judgment column index.
    pub dataset: Dataset,
    /// Primary projection coefficients.
    pub w1: Vec<f64>,
    /// Secondary coefficients; only the two-weight form consumes them.
    pub w2: Vec<f64>,
    /// Min and max of the label-score kernel over the rows.
    pub score_bounds: (f64, f64),
    /// Rank-normalized label scores; `label[i] = 1` iff `scores[i] >= 0.5`.
    pub normalized_scores: Vec<f64>,
    /// Judgment function derived from the judgment column.
    pub judgment: JudgmentFunction,
}

/// Generates one dataset. Draw order: feature count (when sampled), the
/// feature matrix row by row, W1, W2, then the judgment column index, so a
/// fixed seed fixes every byte of the output.
pub fn generate(config: &SynthConfig) -> Result<SynthDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = match config.m {
        FeatureCount::Fixed(m) => m,
        FeatureCount::Sampled => rng.gen_range(1..=20),
    };
    let half_width = config
        .feature_half_width
        .unwrap_or_else(|| config.form.default_half_width());
    let feature_dist = Uniform::new(-half_width, half_width);
    let features: Vec<Vec<f64>> = (0..config.n)
        .map(|_| (0..m).map(|_| feature_dist.sample(&mut rng)).collect())
        .collect();
    // Normal::new(0, 1) only fails on invalid parameters.
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let w1: Vec<f64> = (0..m).map(|_| normal.sample(&mut rng)).collect();
    let w2: Vec<f64> = (0..m).map(|_| normal.sample(&mut rng)).collect();
    let t = rng.gen_range(0..m);

    let projection: Vec<f64> = features
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, x)| match config.form {
                    SynthForm::ExpTwoWeights => (w1[j] + w2[j]) * x,
                    _ => w1[j] * x,
                })
                .sum()
        })
        .collect();
    let kernel: Vec<f64> = projection.iter().map(|&s| config.form.kernel(s)).collect();
    let lo = kernel.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = kernel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::DegenerateScale(
            "all label scores identical; labels undefined".into(),
        ));
    }
    let normalized_scores = rank_normalize(&kernel);
    let labels: Vec<u8> = normalized_scores.iter().map(|&s| u8::from(s >= 0.5)).collect();

    let coefficient = match config.form {
        SynthForm::ExpTwoWeights => w1[t] + w2[t],
        _ => w1[t],
    };
    let feature_names = (0..m).map(|j| format!("f{j}")).collect();
    let dataset = Dataset::new(features, labels, feature_names, t)?;
    let judgment = JudgmentFunction::new(config.form, coefficient, &dataset.judgment_column())?;
    Ok(SynthDataset {
        dataset,
        w1,
        w2,
        score_bounds: (lo, hi),
        normalized_scores,
        judgment,
    })
}

/// Row indices of one train/validation/test partition, each ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Rounds half up; split sizes use this convention throughout.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Splits a dataset 80/10/10 where the test tenth is seeded with the
/// top-`k_percent` rows by judgment value and topped up with random rows
/// from the remainder; leftover rows shuffle into train and validation.
pub fn split_top_k(ds: &Dataset, k_percent: f64, seed: u64) -> Result<SplitIndices> {
    if !k_percent.is_finite() || k_percent <= 0.0 || k_percent >= 10.0 {
        return Err(Error::Config(format!(
            "holdout percent must be inside (0, 10), got {k_percent}"
        )));
    }
    let n = ds.n();
    let test_size = round_half_up(n as f64 * 0.10);
    let val_size = round_half_up(n as f64 * 0.10);
    let top_size = round_half_up(n as f64 * k_percent / 100.0);
    if top_size > test_size || test_size + val_size >= n {
        return Err(Error::Config(format!(
            "cannot carve a {test_size}/{val_size} holdout from {n} rows"
        )));
    }

    let z = ds.judgment_column();
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by judgment value; ties resolved by the stable sort's
    // original (ascending index) order.
    order.sort_by(|&a, &b| z[b].partial_cmp(&z[a]).expect("finite judgment"));
    let mut test: Vec<usize> = order[..top_size].to_vec();
    let mut pool: Vec<usize> = order[top_size..].to_vec();
    pool.sort_unstable();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates via the rand crate keeps the fill and the train/val
    // boundary reproducible per seed.
    use rand::seq::SliceRandom;
    pool.shuffle(&mut rng);
    test.extend(pool.drain(..test_size - top_size));
    let val: Vec<usize> = pool.drain(..val_size).collect();
    let train = pool;

    let mut split = SplitIndices { train, val, test };
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Splits `n` rows 80/10/10 uniformly at random — no judgment-ranked
/// holdout. Re-splitting protocols for fixed datasets use this with a
/// fresh seed per repetition.
pub fn split_uniform(n: usize, seed: u64) -> Result<SplitIndices> {
    let test_size = round_half_up(n as f64 * 0.10);
    let val_size = round_half_up(n as f64 * 0.10);
    if test_size == 0 || test_size + val_size >= n {
        return Err(Error::Config(format!(
            "cannot carve a {test_size}/{val_size} holdout from {n} rows"
        )));
    }
    let mut pool: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::seq::SliceRandom;
    pool.shuffle(&mut rng);
    let test: Vec<usize> = pool.drain(..test_size).collect();
    let val: Vec<usize> = pool.drain(..val_size).collect();
    let mut split = SplitIndices { train: pool, val, test };
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}
