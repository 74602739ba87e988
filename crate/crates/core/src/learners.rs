//! Target classifiers and judgment-aware training baselines.
//!
//! Two probability-emitting classifier families: an L2-regularized logistic
//! model trained with full-batch Adam on the shared neural engine, and
//! gradient-boosted depth-3 regression trees on the logistic loss. On top of
//! the logistic family sit two baselines that replace or extend the
//! supervised objective:
//!
//! * WS — fits to the judgment function alone, minimizing mean |g(z) − f(x)|
//!   plus L2. Uses no labels.
//! * ER — supervised cross-entropy plus λ·KL(Bernoulli(g(z)) ‖ Bernoulli(f_T))
//!   where f_T applies a temperature to the logits.
//!
//! All gradient-trained fits start from zero parameters and run full-batch,
//! so they are deterministic without any RNG involvement.

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::neural::{sigmoid, Activation, AdamState, DenseNet, Gradients, Layer};

/// Boosting ensemble size, matching common toolkit defaults.
pub const BOOST_TREES: usize = 100;
/// Tree depth limit for boosting.
pub const BOOST_DEPTH: usize = 3;
/// Boosting shrinkage (learning rate on tree contributions).
pub const BOOST_SHRINKAGE: f64 = 0.1;
/// Probability clip for tree ensembles, keeping downstream logs finite.
pub const BOOST_CLIP: f64 = 1e-6;

// Probability clamp used inside gradient computations only.
const GRAD_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LearnerKind {
    Logistic,
    GradientBoosting,
}

impl LearnerKind {
    /// Stable config-file token.
    pub fn token(self) -> &'static str {
        match self {
            LearnerKind::Logistic => "logistic",
            LearnerKind::GradientBoosting => "gradient_boosting",
        }
    }

    /// Parses a config-file token.
    pub fn from_token(token: &str) -> Result<Self> {
        match token {
            "logistic" => Ok(LearnerKind::Logistic),
            "gradient_boosting" => Ok(LearnerKind::GradientBoosting),
            other => Err(Error::Config(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Knobs for the gradient-trained fits and the ER objective.
#[derive(Clone, Copy, Debug)]
pub struct BaselineConfig {
    /// L2 strength on logistic weights (never the intercept).
    pub l2_lambda: f64,
    /// Weight of the KL term in the ER objective.
    pub er_lambda: f64,
    /// Temperature applied to logits inside the ER KL term.
    pub er_temperature: f64,
    pub epochs: usize,
    pub learn_rate: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            l2_lambda: 1.0,
            er_lambda: 1.0,
            er_temperature: 1.0,
            epochs: 1000,
            learn_rate: 0.01,
        }
    }
}

impl BaselineConfig {
    fn validate(&self) -> Result<()> {
        if self.l2_lambda < 0.0 || self.er_lambda < 0.0 {
            return Err(Error::Config("regularization strengths must be non-negative".into()));
        }
        if self.er_temperature <= 0.0 || !self.er_temperature.is_finite() {
            return Err(Error::Config("temperature must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epoch budget must be positive".into()));
        }
        if self.learn_rate <= 0.0 || !self.learn_rate.is_finite() {
            return Err(Error::Config("learn rate must be positive".into()));
        }
        Ok(())
    }
}

/// A fitted classifier. `Constant` is the degenerate single-class fit; its
/// presence is the warning flag callers can check via [`Learner::is_degenerate`].
#[derive(Clone, Debug)]
pub enum Learner {
    Logistic(LogisticModel),
    Boosting(BoostingModel),
    Constant { kind: LearnerKind, p: f64, dim: usize },
}

impl Learner {
    /// Probability of class 1.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        match self {
            Learner::Logistic(m) => m.predict(x),
            Learner::Boosting(m) => m.predict(x),
            Learner::Constant { p, dim, .. } => {
                if x.len() != *dim {
                    return Err(Error::Shape(format!(
                        "expected {dim} features, got {}",
                        x.len()
                    )));
                }
                Ok(*p)
            }
        }
    }

    /// Hard label at the 0.5 threshold (ties go to class 1).
    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        Ok(if self.predict_proba(x)? >= 0.5 { 1 } else { 0 })
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Learner::Constant { .. })
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            Learner::Logistic(_) => LearnerKind::Logistic,
            Learner::Boosting(_) => LearnerKind::GradientBoosting,
            Learner::Constant { kind, .. } => *kind,
        }
    }

    /// Weights followed by the intercept, for fits that have them.
    pub fn parameters(&self) -> Option<Vec<f64>> {
        match self {
            Learner::Logistic(m) => {
                let mut p = m.weights().to_vec();
                p.push(m.intercept());
                Some(p)
            }
            _ => None,
        }
    }
}

/// Sigmoid-linear model backed by a single-layer [`DenseNet`].
#[derive(Clone, Debug)]
pub struct LogisticModel {
    net: DenseNet,
}

impl LogisticModel {
    fn zero_init(m: usize) -> Self {
        let layer = Layer {
            in_dim: m,
            out_dim: 1,
            activation: Activation::Sigmoid,
            weights: vec![0.0; m],
            biases: vec![0.0],
        };
        LogisticModel { net: DenseNet::from_layers(vec![layer], 0.0, 0) }
    }

    pub(crate) fn from_parts(weights: Vec<f64>, intercept: f64) -> Self {
        let layer = Layer {
            in_dim: weights.len(),
            out_dim: 1,
            activation: Activation::Sigmoid,
            weights,
            biases: vec![intercept],
        };
        LogisticModel { net: DenseNet::from_layers(vec![layer], 0.0, 0) }
    }

    pub fn weights(&self) -> &[f64] {
        self.net.layers()[0].weights()
    }

    pub fn intercept(&self) -> f64 {
        self.net.layers()[0].biases()[0]
    }

    /// Strictly inside (0,1): the sigmoid's f64 saturation points are clamped
    /// back by one representable step.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let p = self.net.infer(x)?[0];
        Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
    }
}

/// Gradient-boosted regression trees on log-odds.
#[derive(Clone, Debug)]
pub struct BoostingModel {
    pub(crate) trees: Vec<RegressionTree>,
    pub(crate) init_log_odds: f64,
    pub(crate) shrinkage: f64,
    pub(crate) n_features: usize,
}

impl BoostingModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let mut score = self.init_log_odds;
        for tree in &self.trees {
            score += self.shrinkage * tree.predict(x);
        }
        Ok(sigmoid(score).clamp(BOOST_CLIP, 1.0 - BOOST_CLIP))
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn init_log_odds(&self) -> f64 {
        self.init_log_odds
    }
}

/// Binary regression tree stored as a flat node arena.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    pub(crate) nodes: Vec<TreeNode>,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum TreeNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Greedy variance-gain fit on residuals with one-Newton-step leaves
    /// (gradient over hessian of the logistic loss, guarded denominator).
    fn fit(
        features: &[Vec<f64>],
        residuals: &[f64],
        hessians: &[f64],
        max_depth: usize,
    ) -> Self {
        let rows: Vec<usize> = (0..features.len()).collect();
        let mut nodes = Vec::new();
        Self::build(features, residuals, hessians, &rows, max_depth, &mut nodes);
        RegressionTree { nodes }
    }

    fn build(
        features: &[Vec<f64>],
        residuals: &[f64],
        hessians: &[f64],
        rows: &[usize],
        depth: usize,
        nodes: &mut Vec<TreeNode>,
    ) -> usize {
        let leaf = |nodes: &mut Vec<TreeNode>| {
            let grad: f64 = rows.iter().map(|&i| residuals[i]).sum();
            let hess: f64 = rows.iter().map(|&i| hessians[i]).sum();
            let value = grad / hess.max(1e-12);
            nodes.push(TreeNode::Leaf { value });
            nodes.len() - 1
        };
        if depth == 0 || rows.len() < 2 || residual_pure(residuals, rows) {
            return leaf(nodes);
        }
        let Some((feature, threshold)) = best_split(features, residuals, rows) else {
            return leaf(nodes);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| features[i][feature] <= threshold);
        // Reserve the parent slot first so the root always sits at index 0.
        let at = nodes.len();
        nodes.push(TreeNode::Leaf { value: 0.0 });
        let left = Self::build(features, residuals, hessians, &left_rows, depth - 1, nodes);
        let right = Self::build(features, residuals, hessians, &right_rows, depth - 1, nodes);
        nodes[at] = TreeNode::Split { feature, threshold, left, right };
        at
    }
}

fn residual_pure(residuals: &[f64], rows: &[usize]) -> bool {
    let first = residuals[rows[0]];
    rows.iter().all(|&i| residuals[i] == first)
}

/// Best (feature, midpoint threshold) by squared-sum variance gain on the
/// residuals; `None` only when no feature has two distinct values. Zero-gain
/// splits are allowed — a pattern like XOR needs them at the root before any
/// informative second-level split exists. Ties keep the first candidate in
/// (feature, threshold) order, so fitting is deterministic.
fn best_split(features: &[Vec<f64>], residuals: &[f64], rows: &[usize]) -> Option<(usize, f64)> {
    let m = features[0].len();
    let total: f64 = rows.iter().map(|&i| residuals[i]).sum();
    let base = total * total / rows.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for feature in 0..m {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| features[a][feature].partial_cmp(&features[b][feature]).unwrap());
        let mut left_sum = 0.0;
        for (pos, &i) in order.iter().enumerate().take(order.len() - 1) {
            left_sum += residuals[i];
            let here = features[i][feature];
            let next = features[order[pos + 1]][feature];
            if here == next {
                continue;
            }
            let n_left = (pos + 1) as f64;
            let n_right = (order.len() - pos - 1) as f64;
            let right_sum = total - left_sum;
            let gain =
                left_sum * left_sum / n_left + right_sum * right_sum / n_right - base;
            if best.map_or(true, |(g, _, _)| gain > g) {
                best = Some((gain, feature, (here + next) / 2.0));
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

enum Objective<'a> {
    CrossEntropy { labels: &'a [u8] },
    AbsDeviation { targets: &'a [f64] },
    CeKl { labels: &'a [u8], targets: &'a [f64], lambda: f64, temperature: f64 },
}

/// Full-batch Adam from zero parameters. The L2 term is λ/(2n)·‖w‖², i.e. the
/// common unaveraged toolkit objective divided by n alongside the data term.
fn train_logistic(
    features: &[Vec<f64>],
    objective: Objective,
    cfg: &BaselineConfig,
) -> Result<LogisticModel> {
    let n = features.len();
    let m = features[0].len();
    let mut model = LogisticModel::zero_init(m);
    let mut adam = AdamState::new(&model.net, cfg.learn_rate);
    for _ in 0..cfg.epochs {
        let mut grads = Gradients::zeros_like(&model.net);
        for (i, row) in features.iter().enumerate() {
            let trace = model.net.forward_traced(row)?;
            let p = trace.output[0];
            let pc = p.clamp(GRAD_CLAMP, 1.0 - GRAD_CLAMP);
            let dl_dp = match &objective {
                Objective::CrossEntropy { labels } => {
                    (pc - labels[i] as f64) / (pc * (1.0 - pc))
                }
                Objective::AbsDeviation { targets } => match p.partial_cmp(&targets[i]) {
                    Some(std::cmp::Ordering::Greater) => 1.0,
                    Some(std::cmp::Ordering::Less) => -1.0,
                    _ => 0.0,
                },
                Objective::CeKl { labels, targets, lambda, temperature } => {
                    let logit = trace.final_pre_activation()[0];
                    let p_t = sigmoid(logit / temperature);
                    (pc - labels[i] as f64) / (pc * (1.0 - pc))
                        + lambda * (p_t - targets[i]) / (temperature * pc * (1.0 - pc))
                }
            };
            let (sample, _) = model.net.backward(&trace, &[dl_dp])?;
            grads.add_assign(&sample);
        }
        let inv_n = 1.0 / n as f64;
        for layer_grads in grads.dw.iter_mut().chain(grads.db.iter_mut()) {
            for g in layer_grads.iter_mut() {
                *g *= inv_n;
            }
        }
        // L2 on weights only; the intercept stays unpenalized.
        for (g, w) in grads.dw[0].iter_mut().zip(model.net.layers()[0].weights()) {
            *g += cfg.l2_lambda * w * inv_n;
        }
        adam.update(&mut model.net, &grads)?;
    }
    Ok(model)
}

fn check_trainable(train: &Dataset) -> Result<()> {
    if train.n() < 2 {
        return Err(Error::Data("need at least two rows to fit a classifier".into()));
    }
    Ok(())
}

/// Single-class guard: `Some` constant learner when only one label is present.
fn degenerate_fit(train: &Dataset, kind: LearnerKind) -> Option<Learner> {
    let rate = train.positive_rate();
    if rate == 0.0 || rate == 1.0 {
        Some(Learner::Constant {
            kind,
            p: rate.clamp(BOOST_CLIP, 1.0 - BOOST_CLIP),
            dim: train.m(),
        })
    } else {
        None
    }
}

/// Supervised fit: cross-entropy + L2 for logistic, boosted trees otherwise.
pub fn fit_sl(train: &Dataset, kind: LearnerKind, cfg: &BaselineConfig) -> Result<Learner> {
    cfg.validate()?;
    check_trainable(train)?;
    if let Some(constant) = degenerate_fit(train, kind) {
        return Ok(constant);
    }
    match kind {
        LearnerKind::Logistic => {
            let model = train_logistic(
                &train.features,
                Objective::CrossEntropy { labels: &train.labels },
                cfg,
            )?;
            Ok(Learner::Logistic(model))
        }
        LearnerKind::GradientBoosting => Ok(Learner::Boosting(fit_boosting(train))),
    }
}

fn fit_boosting(train: &Dataset) -> BoostingModel {
    let n = train.n();
    let base = train.positive_rate().clamp(BOOST_CLIP, 1.0 - BOOST_CLIP);
    let init_log_odds = (base / (1.0 - base)).ln();
    let mut scores = vec![init_log_odds; n];
    let mut trees = Vec::with_capacity(BOOST_TREES);
    let mut residuals = vec![0.0; n];
    let mut hessians = vec![0.0; n];
    for _ in 0..BOOST_TREES {
        for i in 0..n {
            let p = sigmoid(scores[i]).clamp(BOOST_CLIP, 1.0 - BOOST_CLIP);
            residuals[i] = train.labels[i] as f64 - p;
            hessians[i] = p * (1.0 - p);
        }
        let tree = RegressionTree::fit(&train.features, &residuals, &hessians, BOOST_DEPTH);
        for (i, row) in train.features.iter().enumerate() {
            scores[i] += BOOST_SHRINKAGE * tree.predict(row);
        }
        trees.push(tree);
    }
    BoostingModel { trees, init_log_odds, shrinkage: BOOST_SHRINKAGE, n_features: train.m() }
}

fn check_judgment_targets(train: &Dataset, g_of_judgment: &[f64]) -> Result<()> {
    if g_of_judgment.len() != train.n() {
        return Err(Error::Shape(format!(
            "{} judgment targets for {} rows",
            g_of_judgment.len(),
            train.n()
        )));
    }
    if g_of_judgment.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
        return Err(Error::Data("judgment targets must lie in [0,1]".into()));
    }
    Ok(())
}

/// Weak-supervision fit: mean |g(z) − f(x)| + L2, no labels. Always
/// logistic-backed regardless of the requested kind, so experiments asking
/// for a boosting target model still get one well-defined WS baseline.
pub fn fit_ws(
    train: &Dataset,
    g_of_judgment: &[f64],
    _kind: LearnerKind,
    cfg: &BaselineConfig,
) -> Result<Learner> {
    cfg.validate()?;
    check_trainable(train)?;
    check_judgment_targets(train, g_of_judgment)?;
    let model = train_logistic(
        &train.features,
        Objective::AbsDeviation { targets: g_of_judgment },
        cfg,
    )?;
    Ok(Learner::Logistic(model))
}

/// Expectation-regularized fit: cross-entropy + L2 +
/// λ·KL(Bernoulli(g(z)) ‖ Bernoulli(σ(logit/T))). Logistic-backed only.
pub fn fit_er(
    train: &Dataset,
    g_of_judgment: &[f64],
    kind: LearnerKind,
    cfg: &BaselineConfig,
) -> Result<Learner> {
    cfg.validate()?;
    check_trainable(train)?;
    check_judgment_targets(train, g_of_judgment)?;
    if let Some(constant) = degenerate_fit(train, kind) {
        return Ok(constant);
    }
    let model = train_logistic(
        &train.features,
        Objective::CeKl {
            labels: &train.labels,
            targets: g_of_judgment,
            lambda: cfg.er_lambda,
            temperature: cfg.er_temperature,
        },
        cfg,
    )?;
    Ok(Learner::Logistic(model))
}
