//! Flat-text persistence for trained pipelines.
//!
//! One file carries everything the correction step needs at inference
//! time: the target classifier, the fitted judgment estimator, the
//! registry name of the judgment function, the selected steepness, and the
//! bucket grid. The format is line-oriented — one `key value...` pair per
//! line — versioned by its first line, and prints floats in shortest
//! round-trip form so a load reproduces the saved model bit for bit.

use std::path::Path;

use crate::ejgan::{EjGan, EjGanConfig, ZScaler};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, EstimatorState, JudgmentEstimator, Standardizer};
use crate::learners::{BoostingModel, Learner, LearnerKind, LogisticModel, RegressionTree, TreeNode};
use crate::neural::{Activation, DenseNet, Layer, TrainConfig};

/// First line of every model file; the trailing integer is the format
/// version.
const MAGIC: &str = "accord-model 1";

/// A trained target model plus everything needed to correct and evaluate
/// its predictions.
#[derive(Debug, Clone)]
pub struct PipelineModel {
    /// Target classifier, trained on the full feature rows.
    pub learner: Learner,
    /// Judgment-variable estimator, trained on context rows.
    pub estimator: JudgmentEstimator,
    /// Registry name of the judgment function ([`crate::dataio::registry_get`]).
    pub judgment_name: String,
    /// Correction steepness selected on validation.
    pub alpha: f64,
    /// Bucket count for evaluation profiles.
    pub q_buckets: usize,
    /// Judgment-score range of the full dataset, the shared bucket grid.
    pub judgment_range: (f64, f64),
}

fn floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn push_net(out: &mut String, tag: &str, net: &DenseNet) {
    out.push_str(&format!(
        "net {tag} {} {}\n",
        net.layers().len(),
        net.dropout_rate()
    ));
    for layer in net.layers() {
        out.push_str(&format!(
            "layer {} {} {}\n",
            layer.in_dim,
            layer.out_dim,
            layer.activation.token()
        ));
        out.push_str(&format!("w {}\n", floats(layer.weights())));
        out.push_str(&format!("b {}\n", floats(layer.biases())));
    }
}

fn render(pipeline: &PipelineModel) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("judgment {}\n", pipeline.judgment_name));
    out.push_str(&format!("alpha {}\n", pipeline.alpha));
    out.push_str(&format!("q {}\n", pipeline.q_buckets));
    out.push_str(&format!(
        "range {} {}\n",
        pipeline.judgment_range.0, pipeline.judgment_range.1
    ));

    match &pipeline.learner {
        Learner::Logistic(model) => {
            out.push_str("learner logistic\n");
            out.push_str(&format!("weights {}\n", floats(model.weights())));
            out.push_str(&format!("intercept {}\n", model.intercept()));
        }
        Learner::Boosting(model) => {
            out.push_str("learner gradient_boosting\n");
            out.push_str(&format!(
                "boost {} {} {} {}\n",
                model.init_log_odds, model.shrinkage, model.n_features, model.trees.len()
            ));
            for tree in &model.trees {
                out.push_str(&format!("tree {}\n", tree.nodes.len()));
                for node in &tree.nodes {
                    match node {
                        TreeNode::Split { feature, threshold, left, right } => out.push_str(
                            &format!("split {feature} {threshold} {left} {right}\n"),
                        ),
                        TreeNode::Leaf { value } => out.push_str(&format!("leaf {value}\n")),
                    }
                }
            }
        }
        Learner::Constant { kind, p, dim } => {
            out.push_str(&format!("learner constant {} {p} {dim}\n", kind.token()));
        }
    }

    let est = &pipeline.estimator;
    out.push_str(&format!("estimator {}\n", est.kind.token()));
    out.push_str(&format!("scaler {} {}\n", est.scaler.min, est.scaler.max));
    out.push_str(&format!("context {}\n", est.context_dim));
    match &est.state {
        EstimatorState::Mean(v) => {
            out.push_str("state mean\n");
            out.push_str(&format!("mean {v}\n"));
        }
        EstimatorState::Linear { coefficients, intercept } => {
            out.push_str("state linear\n");
            out.push_str(&format!("coefficients {}\n", floats(coefficients)));
            out.push_str(&format!("intercept {intercept}\n"));
        }
        EstimatorState::Knn { standardizer, rows, z, k } => {
            out.push_str("state knn\n");
            out.push_str(&format!("k {k}\n"));
            out.push_str(&format!("means {}\n", floats(&standardizer.means)));
            out.push_str(&format!("stds {}\n", floats(&standardizer.stds)));
            out.push_str(&format!("rows {}\n", rows.len()));
            for row in rows {
                out.push_str(&format!("row {}\n", floats(row)));
            }
            out.push_str(&format!("z {}\n", floats(z)));
        }
        EstimatorState::Gan(gan) => {
            out.push_str("state gan\n");
            let c = gan.config();
            out.push_str(&format!(
                "gan_config {} {} {} {} {} {} {} {} {}\n",
                c.train.max_epochs,
                c.train.batch_size,
                c.train.hidden_size,
                c.train.dropout,
                c.train.seed,
                c.generator_layers,
                c.discriminator_layers,
                c.learn_rate,
                u8::from(c.non_saturating),
            ));
            push_net(&mut out, "generator", &gan.generator);
            push_net(&mut out, "discriminator", &gan.discriminator);
        }
    }
    out.push_str("end\n");
    out
}

/// Writes the pipeline to `path`, replacing any existing file.
pub fn save_pipeline(pipeline: &PipelineModel, path: &Path) -> Result<()> {
    std::fs::write(path, render(pipeline)).map_err(|e| Error::io(path, e))
}

/// Line cursor over the model file.
struct Cursor<'a> {
    lines: Vec<&'a str>,
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            lines: text.lines().filter(|l| !l.trim().is_empty()).collect(),
            at: 0,
        }
    }

    /// Next line split into key and payload tokens.
    fn next(&mut self) -> Result<(&'a str, Vec<&'a str>)> {
        let line = self
            .lines
            .get(self.at)
            .ok_or_else(|| Error::ModelFormat("file ends mid-record".into()))?;
        self.at += 1;
        let mut tokens = line.split_whitespace();
        let key = tokens
            .next()
            .ok_or_else(|| Error::ModelFormat("blank record line".into()))?;
        Ok((key, tokens.collect()))
    }

    /// Next line, which must carry the given key.
    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (found, rest) = self.next()?;
        if found != key {
            return Err(Error::ModelFormat(format!(
                "expected '{key}' at line {}, found '{found}'",
                self.at
            )));
        }
        Ok(rest)
    }
}

fn parse_f64(token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::ModelFormat(format!("'{token}' is not a number")))
}

fn parse_usize(token: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::ModelFormat(format!("'{token}' is not a count")))
}

fn parse_floats(tokens: &[&str]) -> Result<Vec<f64>> {
    tokens.iter().map(|t| parse_f64(t)).collect()
}

fn arg<'a>(tokens: &[&'a str], i: usize) -> Result<&'a str> {
    tokens
        .get(i)
        .copied()
        .ok_or_else(|| Error::ModelFormat("missing field".into()))
}

fn parse_net(cursor: &mut Cursor, tag: &str) -> Result<DenseNet> {
    let head = cursor.expect("net")?;
    if arg(&head, 0)? != tag {
        return Err(Error::ModelFormat(format!(
            "expected the {tag} network, found '{}'",
            head[0]
        )));
    }
    let n_layers = parse_usize(arg(&head, 1)?)?;
    let dropout = parse_f64(arg(&head, 2)?)?;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let spec = cursor.expect("layer")?;
        let in_dim = parse_usize(arg(&spec, 0)?)?;
        let out_dim = parse_usize(arg(&spec, 1)?)?;
        let activation = Activation::from_token(arg(&spec, 2)?)?;
        let weights = parse_floats(&cursor.expect("w")?)?;
        let biases = parse_floats(&cursor.expect("b")?)?;
        if weights.len() != in_dim * out_dim || biases.len() != out_dim {
            return Err(Error::ModelFormat(format!(
                "layer {in_dim}x{out_dim} carries {} weights and {} biases",
                weights.len(),
                biases.len()
            )));
        }
        layers.push(Layer { in_dim, out_dim, activation, weights, biases });
    }
    if layers.is_empty() {
        return Err(Error::ModelFormat("network without layers".into()));
    }
    // Dropout seed is training-only state; loaded models infer.
    Ok(DenseNet::from_layers(layers, dropout, 0))
}

fn parse_learner(cursor: &mut Cursor) -> Result<Learner> {
    let head = cursor.expect("learner")?;
    match arg(&head, 0)? {
        "logistic" => {
            let weights = parse_floats(&cursor.expect("weights")?)?;
            let intercept = parse_f64(arg(&cursor.expect("intercept")?, 0)?)?;
            Ok(Learner::Logistic(LogisticModel::from_parts(weights, intercept)))
        }
        "gradient_boosting" => {
            let spec = cursor.expect("boost")?;
            let init_log_odds = parse_f64(arg(&spec, 0)?)?;
            let shrinkage = parse_f64(arg(&spec, 1)?)?;
            let n_features = parse_usize(arg(&spec, 2)?)?;
            let n_trees = parse_usize(arg(&spec, 3)?)?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let n_nodes = parse_usize(arg(&cursor.expect("tree")?, 0)?)?;
                let mut nodes = Vec::with_capacity(n_nodes);
                for _ in 0..n_nodes {
                    let (key, rest) = cursor.next()?;
                    nodes.push(match key {
                        "split" => TreeNode::Split {
                            feature: parse_usize(arg(&rest, 0)?)?,
                            threshold: parse_f64(arg(&rest, 1)?)?,
                            left: parse_usize(arg(&rest, 2)?)?,
                            right: parse_usize(arg(&rest, 3)?)?,
                        },
                        "leaf" => TreeNode::Leaf { value: parse_f64(arg(&rest, 0)?)? },
                        other => {
                            return Err(Error::ModelFormat(format!(
                                "unknown tree node '{other}'"
                            )))
                        }
                    });
                }
                trees.push(RegressionTree { nodes });
            }
            Ok(Learner::Boosting(BoostingModel {
                trees,
                init_log_odds,
                shrinkage,
                n_features,
            }))
        }
        "constant" => Ok(Learner::Constant {
            kind: LearnerKind::from_token(arg(&head, 1)?)?,
            p: parse_f64(arg(&head, 2)?)?,
            dim: parse_usize(arg(&head, 3)?)?,
        }),
        other => Err(Error::ModelFormat(format!("unknown learner '{other}'"))),
    }
}

fn parse_estimator(cursor: &mut Cursor) -> Result<JudgmentEstimator> {
    let kind = EstimatorKind::from_token(arg(&cursor.expect("estimator")?, 0)?)?;
    let scaler_spec = cursor.expect("scaler")?;
    let scaler = ZScaler {
        min: parse_f64(arg(&scaler_spec, 0)?)?,
        max: parse_f64(arg(&scaler_spec, 1)?)?,
    };
    let context_dim = parse_usize(arg(&cursor.expect("context")?, 0)?)?;
    let state = match arg(&cursor.expect("state")?, 0)? {
        "mean" => EstimatorState::Mean(parse_f64(arg(&cursor.expect("mean")?, 0)?)?),
        "linear" => EstimatorState::Linear {
            coefficients: parse_floats(&cursor.expect("coefficients")?)?,
            intercept: parse_f64(arg(&cursor.expect("intercept")?, 0)?)?,
        },
        "knn" => {
            let k = parse_usize(arg(&cursor.expect("k")?, 0)?)?;
            let means = parse_floats(&cursor.expect("means")?)?;
            let stds = parse_floats(&cursor.expect("stds")?)?;
            let n_rows = parse_usize(arg(&cursor.expect("rows")?, 0)?)?;
            let mut rows = Vec::with_capacity(n_rows);
            for _ in 0..n_rows {
                rows.push(parse_floats(&cursor.expect("row")?)?);
            }
            let z = parse_floats(&cursor.expect("z")?)?;
            if z.len() != rows.len() {
                return Err(Error::ModelFormat(format!(
                    "{} stored rows but {} judgment values",
                    rows.len(),
                    z.len()
                )));
            }
            EstimatorState::Knn {
                standardizer: Standardizer { means, stds },
                rows,
                z,
                k,
            }
        }
        "gan" => {
            let c = cursor.expect("gan_config")?;
            let config = EjGanConfig {
                train: TrainConfig {
                    max_epochs: parse_usize(arg(&c, 0)?)?,
                    batch_size: parse_usize(arg(&c, 1)?)?,
                    hidden_size: parse_usize(arg(&c, 2)?)?,
                    dropout: parse_f64(arg(&c, 3)?)?,
                    seed: arg(&c, 4)?
                        .parse::<u64>()
                        .map_err(|_| Error::ModelFormat("bad seed".into()))?,
                },
                generator_layers: parse_usize(arg(&c, 5)?)?,
                discriminator_layers: parse_usize(arg(&c, 6)?)?,
                learn_rate: parse_f64(arg(&c, 7)?)?,
                non_saturating: arg(&c, 8)? == "1",
            };
            let generator = parse_net(cursor, "generator")?;
            let discriminator = parse_net(cursor, "discriminator")?;
            EstimatorState::Gan(Box::new(EjGan {
                generator,
                discriminator,
                scaler,
                config,
            }))
        }
        other => return Err(Error::ModelFormat(format!("unknown estimator state '{other}'"))),
    };
    Ok(JudgmentEstimator { kind, state, scaler, context_dim })
}

/// Reads a pipeline saved by [`save_pipeline`].
pub fn load_pipeline(path: &Path) -> Result<PipelineModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cursor = Cursor::new(&text);
    let (magic_key, magic_rest) = cursor.next()?;
    if format!("{magic_key} {}", magic_rest.join(" ")) != MAGIC {
        return Err(Error::ModelFormat(format!(
            "not a model file (expected '{MAGIC}')"
        )));
    }
    let judgment_name = cursor.expect("judgment")?.join(" ");
    if judgment_name.is_empty() {
        return Err(Error::ModelFormat("empty judgment name".into()));
    }
    let alpha = parse_f64(arg(&cursor.expect("alpha")?, 0)?)?;
    let q_buckets = parse_usize(arg(&cursor.expect("q")?, 0)?)?;
    let range_spec = cursor.expect("range")?;
    let judgment_range = (
        parse_f64(arg(&range_spec, 0)?)?,
        parse_f64(arg(&range_spec, 1)?)?,
    );
    let learner = parse_learner(&mut cursor)?;
    let estimator = parse_estimator(&mut cursor)?;
    cursor.expect("end")?;
    Ok(PipelineModel {
        learner,
        estimator,
        judgment_name,
        alpha,
        q_buckets,
        judgment_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Dataset;
    use crate::ejgan::EjGanConfig;
    use crate::estimators::{fit_estimator, EstimatorParams};
    use crate::learners::{fit_sl, BaselineConfig};
    use crate::neural::TrainConfig;
    use rand::distributions::{Distribution, Uniform};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Uniform::new(0.0f64, 1.0);
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| unit.sample(&mut rng)).collect())
            .collect();
        let labels = features
            .iter()
            .map(|row| u8::from(row[0] + 0.5 * row[1] > 0.75))
            .collect();
        Dataset::new(
            features,
            labels,
            vec!["a".into(), "b".into(), "z".into()],
            2,
        )
        .unwrap()
    }

    fn pipeline_with(learner: Learner, estimator: JudgmentEstimator) -> PipelineModel {
        PipelineModel {
            learner,
            estimator,
            judgment_name: "it_price".into(),
            alpha: 2.0,
            q_buckets: 12,
            judgment_range: (0.015625, 0.9375),
        }
    }

    fn round_trip(pipeline: &PipelineModel) -> PipelineModel {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        save_pipeline(pipeline, &path).unwrap();
        load_pipeline(&path).unwrap()
    }

    #[test]
    fn logistic_pipeline_round_trips_bitwise() {
        let train = toy_dataset(40, 1);
        let learner = fit_sl(&train, LearnerKind::Logistic, &BaselineConfig {
            epochs: 50,
            ..BaselineConfig::default()
        })
        .unwrap();
        let estimator = fit_estimator(
            EstimatorKind::LinearRegression,
            &train.context_rows(),
            &train.judgment_column(),
            &EstimatorParams::default(),
        )
        .unwrap();
        let saved = pipeline_with(learner, estimator);
        let loaded = round_trip(&saved);

        assert_eq!(loaded.judgment_name, "it_price");
        assert_eq!(loaded.alpha, 2.0);
        assert_eq!(loaded.q_buckets, 12);
        assert_eq!(loaded.judgment_range, (0.015625, 0.9375));
        for row in &toy_dataset(15, 2).features {
            assert_eq!(
                loaded.learner.predict_proba(row).unwrap(),
                saved.learner.predict_proba(row).unwrap()
            );
            assert_eq!(
                loaded.estimator.distance_k(row, 2).unwrap(),
                saved.estimator.distance_k(row, 2).unwrap()
            );
        }
    }

    #[test]
    fn boosting_learner_round_trips_bitwise() {
        let train = toy_dataset(60, 3);
        let learner = fit_sl(
            &train,
            LearnerKind::GradientBoosting,
            &BaselineConfig::default(),
        )
        .unwrap();
        let estimator = fit_estimator(
            EstimatorKind::Mean,
            &train.context_rows(),
            &train.judgment_column(),
            &EstimatorParams::default(),
        )
        .unwrap();
        let saved = pipeline_with(learner, estimator);
        let loaded = round_trip(&saved);
        for row in &toy_dataset(20, 4).features {
            assert_eq!(
                loaded.learner.predict_proba(row).unwrap(),
                saved.learner.predict_proba(row).unwrap()
            );
            assert_eq!(
                loaded.estimator.estimate(&row[..2]).unwrap(),
                saved.estimator.estimate(&row[..2]).unwrap()
            );
        }
    }

    #[test]
    fn adversarial_estimator_round_trips_bitwise() {
        let train = toy_dataset(40, 5);
        let params = EstimatorParams {
            gan: EjGanConfig {
                train: TrainConfig {
                    max_epochs: 25,
                    ..TrainConfig::default()
                },
                ..EjGanConfig::default()
            },
            ..EstimatorParams::default()
        };
        let estimator = fit_estimator(
            EstimatorKind::EjGan,
            &train.context_rows(),
            &train.judgment_column(),
            &params,
        )
        .unwrap();
        let learner = fit_sl(&train, LearnerKind::Logistic, &BaselineConfig {
            epochs: 20,
            ..BaselineConfig::default()
        })
        .unwrap();
        let saved = pipeline_with(learner, estimator);
        let loaded = round_trip(&saved);
        assert_eq!(loaded.estimator.kind(), EstimatorKind::EjGan);
        for row in &toy_dataset(10, 6).features {
            assert_eq!(
                loaded.estimator.estimate(&row[..2]).unwrap(),
                saved.estimator.estimate(&row[..2]).unwrap()
            );
            assert_eq!(
                loaded.estimator.distance_k(row, 2).unwrap(),
                saved.estimator.distance_k(row, 2).unwrap()
            );
        }
    }

    #[test]
    fn knn_and_constant_states_round_trip() {
        let train = toy_dataset(25, 7);
        let estimator = fit_estimator(
            EstimatorKind::Knn,
            &train.context_rows(),
            &train.judgment_column(),
            &EstimatorParams::default(),
        )
        .unwrap();
        let learner = Learner::Constant {
            kind: LearnerKind::GradientBoosting,
            p: 0.7,
            dim: 3,
        };
        let saved = pipeline_with(learner, estimator);
        let loaded = round_trip(&saved);
        assert!(loaded.learner.is_degenerate());
        assert_eq!(loaded.learner.predict_proba(&[0.0, 0.0, 0.0]).unwrap(), 0.7);
        for row in &toy_dataset(10, 8).features {
            assert_eq!(
                loaded.estimator.estimate(&row[..2]).unwrap(),
                saved.estimator.estimate(&row[..2]).unwrap()
            );
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");

        std::fs::write(&path, "something-else 7\n").unwrap();
        assert!(matches!(load_pipeline(&path), Err(Error::ModelFormat(_))));

        std::fs::write(&path, "accord-model 1\njudgment it_price\nalpha 2\n").unwrap();
        assert!(matches!(load_pipeline(&path), Err(Error::ModelFormat(_))));

        std::fs::write(
            &path,
            "accord-model 1\njudgment it_price\nalpha x\nq 12\nrange 0 1\n",
        )
        .unwrap();
        assert!(matches!(load_pipeline(&path), Err(Error::ModelFormat(_))));

        assert!(load_pipeline(Path::new("/nonexistent/model.txt")).is_err());
    }
}
