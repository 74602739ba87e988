//! Blending a binary classifier's predictions with a domain expert's
//! judgment.
//!
//! The pipeline: train any probabilistic classifier, train an adversarial
//! estimator of the expert's judgment variable from the remaining features,
//! then for each prediction measure how far the observed judgment variable
//! sits from its estimate and shift trust toward the expert's judgment
//! function accordingly. Agreement between predictions and judgment is scored
//! with bucketed divergence profiles alongside plain accuracy.

pub mod correction;
pub mod dataio;
pub mod ejgan;
pub mod estimators;
pub mod experiment;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod model_io;
pub mod neural;
pub mod synthdata;

pub use correction::{
    alpha_score, correct, correct_batch, select_alpha, weight, CorrectedPrediction,
    CorrectionConfig, ValidationSlice,
};
pub use dataio::{
    load_csv, prepare_credit, registry_get, write_csv, CsvOptions, Dataset, Judgment,
    JudgmentTable,
};
pub use ejgan::{normalize_judgment, split_judgment, EjGan, EjGanConfig, GanTrainLog, ZScaler};
pub use error::{Error, Result};
pub use estimators::{fit_estimator, EstimatorKind, EstimatorParams, JudgmentEstimator};
pub use experiment::{
    report, run, split_seed, sweep, sweep_report, DataSource, ExperimentSpec, Method, ReportPaths, RunFailure,
    RunOutcome, RunRecord, SweepAxis, SweepCell,
};
pub use learners::{
    fit_er, fit_sl, fit_ws, BaselineConfig, BoostingModel, Learner, LearnerKind, LogisticModel,
    RegressionTree,
};
pub use metrics::{
    accuracy, bucketize, closeness, combined, evaluate, jsd, profile_divergence, profile_table,
    welch_t, BucketProfile, MetricsReport, WelchT,
};
pub use model_io::{load_pipeline, save_pipeline, PipelineModel};
pub use neural::{Activation, AdamState, DenseNet, Gradients, TrainConfig};
pub use synthdata::{
    generate, split_top_k, split_uniform, FeatureCount, JudgmentFunction, SplitIndices, SynthConfig,
    SynthDataset, SynthForm,
};
