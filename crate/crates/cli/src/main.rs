//! `accord` — dataset generation, pipeline training, prediction
//! correction, evaluation, sweeps, and experiment reports from one binary.
//!
//! Every knob has one name, usable both as a `--flag` and as a line in a
//! flat `key = value` config file (`--config FILE`); flags override the
//! file. Exit codes: 0 success, 1 usage or configuration, 2 data or model
//! problems, 3 training divergence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use accord_core::correction::{correct_batch, select_alpha, CorrectionConfig, ValidationSlice};
use accord_core::dataio::{load_csv, prepare_credit, registry_get, write_csv, CsvOptions, Dataset};
use accord_core::error::{Error, Result};
use accord_core::estimators::{fit_estimator, EstimatorKind, EstimatorParams};
use accord_core::experiment::{
    report, run, split_seed, sweep, sweep_report, DataSource, ExperimentSpec, Method, SweepAxis,
};
use accord_core::learners::{fit_sl, BaselineConfig, LearnerKind};
use accord_core::metrics::{evaluate, profile_table};
use accord_core::model_io::{load_pipeline, save_pipeline, PipelineModel};
use accord_core::synthdata::{
    generate, split_top_k, split_uniform, FeatureCount, SynthConfig, SynthForm,
};

#[derive(Parser)]
#[command(
    name = "accord",
    about = "Correct a binary classifier's predictions with expert judgment",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic labeled dataset and write it as CSV.
    Generate(GenerateArgs),
    /// Fit the target model and judgment estimator, select the correction
    /// steepness on a validation split, and save the pipeline bundle.
    Train(TrainArgs),
    /// Apply a saved pipeline to rows and write corrected predictions.
    Correct(ApplyArgs),
    /// Score a saved pipeline on labeled rows.
    Evaluate(ApplyArgs),
    /// Repeat an experiment across one axis and summarize per value.
    Sweep(SweepArgs),
    /// Run the full repeated-seed experiment and write all report files.
    Report(ReportArgs),
}

/// Data-source knobs shared by every verb that reads or draws rows.
#[derive(Args)]
struct SourceArgs {
    /// Flat `key = value` file supplying any flag; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Source kind: synthetic, credit, or csv.
    #[arg(long)]
    data: Option<String>,
    /// Input file for credit/csv sources.
    #[arg(long)]
    path: Option<PathBuf>,
    /// Synthetic label recipe: sigmoid_w1x, exp_w1x, exp_w1x_squared,
    /// exp_two_weights.
    #[arg(long)]
    form: Option<String>,
    /// Synthetic row count.
    #[arg(long)]
    n: Option<usize>,
    /// Synthetic feature count: an integer or `sampled`.
    #[arg(long)]
    m: Option<String>,
    /// Percent of rows forced into the test split by extreme judgment.
    #[arg(long = "k-percent")]
    k_percent: Option<f64>,
    /// Half-width of the uniform feature range (overrides the form default).
    #[arg(long = "half-width")]
    half_width: Option<f64>,
    /// Label column name for csv sources.
    #[arg(long)]
    label: Option<String>,
    /// Judgment column name for csv sources.
    #[arg(long)]
    judgment: Option<String>,
    /// Judgment-function registry name for csv sources.
    #[arg(long = "judgment-name")]
    judgment_name: Option<String>,
    /// Drop the first category of each one-hot block (true/false).
    #[arg(long = "drop-first")]
    drop_first: Option<bool>,
}

/// Model and training knobs.
#[derive(Args)]
struct ModelArgs {
    /// Target model: logistic or gradient_boosting.
    #[arg(long)]
    target: Option<String>,
    /// Judgment estimator: ejgan, linear_regression, ridge, knn, mean.
    #[arg(long)]
    estimator: Option<String>,
    /// Adversarial training epoch budget.
    #[arg(long = "gan-epochs")]
    gan_epochs: Option<usize>,
    /// Neighbour count for the knn estimator.
    #[arg(long = "knn-k")]
    knn_k: Option<usize>,
    /// L2 strength for the ridge estimator.
    #[arg(long = "ridge-penalty")]
    ridge_penalty: Option<f64>,
    /// Epoch budget for baseline model fits.
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate for baseline model fits.
    #[arg(long = "learn-rate")]
    learn_rate: Option<f64>,
}

/// Correction knobs.
#[derive(Args)]
struct CorrectionArgs {
    /// Fixed correction steepness (used when no grid is searched).
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated steepness grid searched on validation.
    #[arg(long = "alpha-grid")]
    alpha_grid: Option<String>,
    /// Bucket count of the evaluation grid.
    #[arg(long)]
    q: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Generation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    correction: CorrectionArgs,
    /// Draw-and-split seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path of the pipeline bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ApplyArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Saved pipeline bundle.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output path (corrected-prediction CSV, or profile table for
    /// evaluate; evaluate prints metrics either way).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Comma-separated method list.
    #[arg(long)]
    methods: Option<String>,
    /// Repetition count (default: 100 synthetic, 20 fixed datasets).
    #[arg(long)]
    repetitions: Option<usize>,
    /// Repetition i runs on seed base+i.
    #[arg(long = "base-seed")]
    base_seed: Option<u64>,
    /// Report directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    correction: CorrectionArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Swept axis: k_percent, q, or alpha.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated axis values.
    #[arg(long)]
    values: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    correction: CorrectionArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

/// Every key a config file may define — the same names as the long flags,
/// with underscores.
const ALLOWED_KEYS: [&str; 24] = [
    "data",
    "path",
    "form",
    "n",
    "m",
    "k_percent",
    "half_width",
    "label",
    "judgment",
    "judgment_name",
    "drop_first",
    "target",
    "estimator",
    "gan_epochs",
    "knn_k",
    "ridge_penalty",
    "epochs",
    "learn_rate",
    "alpha",
    "alpha_grid",
    "q",
    "methods",
    "repetitions",
    "base_seed",
];

/// File-backed settings; a flag always overrides its file entry.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(config: Option<&Path>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Config(format!(
                        "{}:{}: expected `key = value`",
                        path.display(),
                        i + 1
                    ))
                })?;
                let key = key.trim().to_string();
                if !ALLOWED_KEYS.contains(&key.as_str()) && !["seed", "out", "axis", "values", "model"].contains(&key.as_str()) {
                    return Err(Error::Config(format!(
                        "{}:{}: unknown key '{key}'",
                        path.display(),
                        i + 1
                    )));
                }
                file.insert(key, value.trim().to_string());
            }
        }
        Ok(Settings { file })
    }

    /// Flag, else file entry, else default.
    fn get<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>, default: T) -> Result<T> {
        self.get_opt(key, flag).map(|v| v.unwrap_or(default))
    }

    /// Flag, else file entry, else None.
    fn get_opt<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>) -> Result<Option<T>> {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key '{key}': cannot parse '{raw}'"))),
            None => Ok(None),
        }
    }

    /// Flag, else file entry; missing is a usage error.
    fn require<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>) -> Result<T> {
        self.get_opt(key, flag)?
            .ok_or_else(|| Error::Config(format!("'{key}' is required (flag or config file)")))
    }
}

fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("bad {what} entry '{s}'")))
        })
        .collect()
}

fn parse_feature_count(raw: &str) -> Result<FeatureCount> {
    if raw == "sampled" {
        return Ok(FeatureCount::Sampled);
    }
    raw.parse::<usize>()
        .map(FeatureCount::Fixed)
        .map_err(|_| Error::Config(format!("feature count must be an integer or 'sampled', got '{raw}'")))
}

fn synth_config(s: &Settings, a: &SourceArgs, seed: u64) -> Result<SynthConfig> {
    let defaults = SynthConfig::default();
    let form = match s.get_opt::<String>("form", &a.form)? {
        Some(raw) => SynthForm::from_token(&raw)?,
        None => defaults.form,
    };
    let m = match s.get_opt::<String>("m", &a.m)? {
        Some(raw) => parse_feature_count(&raw)?,
        None => defaults.m,
    };
    Ok(SynthConfig {
        n: s.get("n", &a.n, defaults.n)?,
        m,
        form,
        seed,
        holdout_k_percent: s.get("k_percent", &a.k_percent, defaults.holdout_k_percent)?,
        feature_half_width: s.get_opt("half_width", &a.half_width)?,
    })
}

fn data_source(s: &Settings, a: &SourceArgs, seed: u64) -> Result<DataSource> {
    let kind = s.get("data", &a.data, "synthetic".to_string())?;
    match kind.as_str() {
        "synthetic" => Ok(DataSource::Synthetic(synth_config(s, a, seed)?)),
        "credit" => Ok(DataSource::Credit { path: s.require("path", &a.path)? }),
        "csv" => Ok(DataSource::Csv {
            path: s.require("path", &a.path)?,
            label_column: s.get("label", &a.label, "label".to_string())?,
            judgment_column: s.require("judgment", &a.judgment)?,
            judgment_name: s.require("judgment_name", &a.judgment_name)?,
            options: CsvOptions { drop_first: s.get("drop_first", &a.drop_first, false)? },
        }),
        other => Err(Error::Config(format!(
            "unknown data source '{other}' (synthetic, credit, or csv)"
        ))),
    }
}

fn correction_config(s: &Settings, a: &CorrectionArgs) -> Result<CorrectionConfig> {
    let mut config = CorrectionConfig::default();
    config.alpha = s.get("alpha", &a.alpha, config.alpha)?;
    if let Some(raw) = s.get_opt::<String>("alpha_grid", &a.alpha_grid)? {
        config.alpha_grid = parse_list(&raw, "alpha grid")?;
    }
    config.q_buckets = s.get("q", &a.q, config.q_buckets)?;
    config.validate()?;
    Ok(config)
}

fn target_kind(s: &Settings, a: &ModelArgs) -> Result<LearnerKind> {
    match s.get_opt::<String>("target", &a.target)? {
        Some(raw) => LearnerKind::from_token(&raw),
        None => Ok(LearnerKind::Logistic),
    }
}

fn estimator_params(s: &Settings, a: &ModelArgs) -> Result<EstimatorParams> {
    let mut params = EstimatorParams::default();
    if let Some(epochs) = s.get_opt("gan_epochs", &a.gan_epochs)? {
        params.gan.train.max_epochs = epochs;
    }
    params.knn_k = s.get("knn_k", &a.knn_k, params.knn_k)?;
    params.ridge_penalty = s.get("ridge_penalty", &a.ridge_penalty, params.ridge_penalty)?;
    Ok(params)
}

fn baseline_config(s: &Settings, a: &ModelArgs) -> Result<BaselineConfig> {
    let mut config = BaselineConfig::default();
    config.epochs = s.get("epochs", &a.epochs, config.epochs)?;
    config.learn_rate = s.get("learn_rate", &a.learn_rate, config.learn_rate)?;
    Ok(config)
}

fn experiment_spec(
    source: &SourceArgs,
    model: &ModelArgs,
    correction: &CorrectionArgs,
    experiment: &ExperimentArgs,
) -> Result<ExperimentSpec> {
    let s = Settings::load(source.config.as_deref())?;
    let base_seed = s.get("base_seed", &experiment.base_seed, 0)?;
    let src = data_source(&s, source, base_seed)?;
    let mut spec = ExperimentSpec::new(
        src,
        target_kind(&s, model)?,
        s.get("out", &experiment.out, PathBuf::from("accord-out"))?,
    );
    spec.base_seed = base_seed;
    if let Some(raw) = s.get_opt::<String>("methods", &experiment.methods)? {
        let tokens: Vec<String> = parse_list(&raw, "method")?;
        spec.methods = tokens
            .iter()
            .map(|t| Method::from_token(t))
            .collect::<Result<_>>()?;
    }
    if let Some(reps) = s.get_opt("repetitions", &experiment.repetitions)? {
        spec.repetitions = reps;
    }
    spec.correction = correction_config(&s, correction)?;
    spec.estimator = estimator_params(&s, model)?;
    spec.baseline = baseline_config(&s, model)?;
    spec.validate()?;
    Ok(spec)
}

/// Prints `key value` lines; all values are shortest-round-trip, so the
/// output is byte-stable per seed.
fn emit(pairs: &[(&str, String)]) {
    for (key, value) in pairs {
        println!("{key} {value}");
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let s = Settings::load(args.source.config.as_deref())?;
    let seed = s.get("seed", &args.seed, 0)?;
    let config = synth_config(&s, &args.source, seed)?;
    let out = s.get("out", &args.out, PathBuf::from("synthetic.csv"))?;
    let drawn = generate(&config)?;
    write_csv(&drawn.dataset, &out)?;
    let judgment = accord_core::dataio::Judgment::Synthetic(drawn.judgment);
    emit(&[
        ("out", out.display().to_string()),
        ("rows", drawn.dataset.n().to_string()),
        ("features", drawn.dataset.feature_names.len().to_string()),
        ("label_column", "label".to_string()),
        ("judgment_column", drawn.dataset.judgment_name.clone()),
        ("judgment", judgment.name()),
    ]);
    Ok(())
}

/// Materializes rows for train/correct/evaluate: a fixed file as-is, or one
/// synthetic draw on `seed`.
fn one_dataset(s: &Settings, a: &SourceArgs, seed: u64) -> Result<(Dataset, String, bool)> {
    match data_source(s, a, seed)? {
        DataSource::Synthetic(config) => {
            let drawn = generate(&config)?;
            let name = accord_core::dataio::Judgment::Synthetic(drawn.judgment).name();
            Ok((drawn.dataset, name, true))
        }
        DataSource::Credit { path } => {
            let (ds, judgment) = prepare_credit(&path)?;
            Ok((ds, judgment.name(), false))
        }
        DataSource::Csv { path, label_column, judgment_column, judgment_name, options } => {
            registry_get(&judgment_name)?;
            let ds = load_csv(&path, &label_column, &judgment_column, &options)?;
            Ok((ds, judgment_name, false))
        }
    }
}

fn judgment_range(ds: &Dataset) -> (f64, f64) {
    let z = ds.judgment_column();
    let lo = z.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let s = Settings::load(args.source.config.as_deref())?;
    let seed = s.get("seed", &args.seed, 0)?;
    let correction = correction_config(&s, &args.correction)?;
    let (ds, judgment_name, synthetic) = one_dataset(&s, &args.source, seed)?;
    let judgment = registry_get(&judgment_name)?;

    let split = if synthetic {
        let k = s.get("k_percent", &args.source.k_percent, SynthConfig::default().holdout_k_percent)?;
        split_top_k(&ds, k, split_seed(seed))?
    } else {
        split_uniform(ds.n(), split_seed(seed))?
    };
    let train = ds.subset(&split.train)?;
    let val = ds.subset(&split.val)?;
    let range = judgment_range(&ds);

    let target = fit_sl(&ds.subset(&split.train)?, target_kind(&s, &args.model)?, &baseline_config(&s, &args.model)?)?;
    let kind = match s.get_opt::<String>("estimator", &args.model.estimator)? {
        Some(raw) => EstimatorKind::from_token(&raw)?,
        None => EstimatorKind::EjGan,
    };
    let mut params = estimator_params(&s, &args.model)?;
    params.gan.train.seed = seed;
    let estimator = fit_estimator(kind, &train.context_rows(), &train.judgment_column(), &params)?;

    let val_z = val.judgment_column();
    let g_val = judgment.values(&val_z);
    let y_hat_val: Vec<f64> = val
        .features
        .iter()
        .map(|r| target.predict_proba(r))
        .collect::<Result<_>>()?;
    let k_val: Vec<f64> = val
        .features
        .iter()
        .map(|r| estimator.distance_k(r, val.judgment_index))
        .collect::<Result<_>>()?;
    let slice = ValidationSlice {
        y_hat: &y_hat_val,
        g_of_z: &g_val,
        k: &k_val,
        labels: &val.labels,
        judgment_scores: &val_z,
    };
    let alpha = select_alpha(&correction, &slice, range)?;

    let pipeline = PipelineModel {
        learner: target,
        estimator,
        judgment_name,
        alpha,
        q_buckets: correction.q_buckets,
        judgment_range: range,
    };
    let out = s.get("out", &args.out, PathBuf::from("model.txt"))?;
    save_pipeline(&pipeline, &out)?;
    emit(&[
        ("model", out.display().to_string()),
        ("judgment", pipeline.judgment_name.clone()),
        ("estimator", kind.token().to_string()),
        ("alpha", format!("{alpha}")),
        ("train_rows", train.n().to_string()),
    ]);
    Ok(())
}

/// Loads the bundle and the rows it applies to, and computes everything the
/// correction needs on those rows.
struct Applied {
    pipeline: PipelineModel,
    ds: Dataset,
    z: Vec<f64>,
    g: Vec<f64>,
    y_hat: Vec<f64>,
    corrected: Vec<accord_core::correction::CorrectedPrediction>,
}

/// Rows for correct/evaluate. The judgment *function* comes from the
/// bundle, so csv inputs need only their column names here.
fn rows_for_apply(s: &Settings, a: &SourceArgs) -> Result<Dataset> {
    let kind = s.get("data", &a.data, "synthetic".to_string())?;
    match kind.as_str() {
        "synthetic" => {
            let seed = s.file.get("seed").map_or(Ok(0), |v| {
                v.parse::<u64>()
                    .map_err(|_| Error::Config(format!("config key 'seed': cannot parse '{v}'")))
            })?;
            Ok(generate(&synth_config(s, a, seed)?)?.dataset)
        }
        "credit" => prepare_credit(&s.require("path", &a.path)?).map(|(ds, _)| ds),
        "csv" => load_csv(
            &s.require("path", &a.path)?,
            &s.get("label", &a.label, "label".to_string())?,
            &s.require("judgment", &a.judgment)?,
            &CsvOptions { drop_first: s.get("drop_first", &a.drop_first, false)? },
        ),
        other => Err(Error::Config(format!(
            "unknown data source '{other}' (synthetic, credit, or csv)"
        ))),
    }
}

fn apply(args: &ApplyArgs) -> Result<Applied> {
    let s = Settings::load(args.source.config.as_deref())?;
    let model_path: PathBuf = s.require("model", &args.model)?;
    let pipeline = load_pipeline(&model_path)?;
    let ds = rows_for_apply(&s, &args.source)?;
    let judgment = registry_get(&pipeline.judgment_name)?;

    let z = ds.judgment_column();
    let g = judgment.values(&z);
    let y_hat: Vec<f64> = ds
        .features
        .iter()
        .map(|r| pipeline.learner.predict_proba(r))
        .collect::<Result<_>>()?;
    let k: Vec<f64> = ds
        .features
        .iter()
        .map(|r| pipeline.estimator.distance_k(r, ds.judgment_index))
        .collect::<Result<_>>()?;
    let corrected = correct_batch(&y_hat, &g, &k, pipeline.alpha)?;
    Ok(Applied { pipeline, ds, z, g, y_hat, corrected })
}

fn cmd_correct(args: &ApplyArgs) -> Result<()> {
    let s = Settings::load(args.source.config.as_deref())?;
    let out: PathBuf = s.get("out", &args.out, PathBuf::from("corrected.csv"))?;
    let applied = apply(args)?;
    let mut text = String::from("# accord-corrections v1\n");
    text.push_str("z,y_hat,g_of_z,k,w,y_final\n");
    for (z, c) in applied.z.iter().zip(&applied.corrected) {
        text.push_str(&format!(
            "{z},{},{},{},{},{}\n",
            c.y_hat, c.g_of_z, c.k, c.w, c.y_final
        ));
    }
    std::fs::write(&out, text).map_err(|e| Error::Io { path: out.display().to_string(), source: e })?;
    emit(&[
        ("out", out.display().to_string()),
        ("rows", applied.corrected.len().to_string()),
        ("alpha", format!("{}", applied.pipeline.alpha)),
    ]);
    Ok(())
}

fn cmd_evaluate(args: &ApplyArgs) -> Result<()> {
    let s = Settings::load(args.source.config.as_deref())?;
    let out: Option<PathBuf> = s.get_opt("out", &args.out)?;
    let applied = apply(args)?;
    let q = applied.pipeline.q_buckets;
    let range = applied.pipeline.judgment_range;
    let y_final: Vec<f64> = applied.corrected.iter().map(|c| c.y_final).collect();
    let corrected = evaluate(&y_final, &applied.ds.labels, &applied.z, &applied.g, q, range)?;
    let plain = evaluate(&applied.y_hat, &applied.ds.labels, &applied.z, &applied.g, q, range)?;
    emit(&[
        ("rows", applied.ds.n().to_string()),
        ("alpha", format!("{}", applied.pipeline.alpha)),
        ("accuracy", format!("{}", corrected.accuracy)),
        ("closeness", format!("{}", corrected.closeness)),
        ("combined", format!("{}", corrected.combined)),
        ("uncorrected_accuracy", format!("{}", plain.accuracy)),
        ("uncorrected_closeness", format!("{}", plain.closeness)),
        ("uncorrected_combined", format!("{}", plain.combined)),
    ]);
    if let Some(path) = out {
        let table = profile_table(
            &plain.model_profile,
            &plain.judgment_profile,
            Some(&corrected.model_profile),
        )?;
        std::fs::write(&path, table)
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        emit(&[("profile_out", path.display().to_string())]);
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let s = Settings::load(args.source.config.as_deref())?;
    let spec = experiment_spec(&args.source, &args.model, &args.correction, &args.experiment)?;
    let axis = SweepAxis::from_token(&s.require("axis", &args.axis)?)?;
    let values: Vec<f64> = parse_list(&s.require::<String>("values", &args.values)?, "axis value")?;
    let cells = sweep(&spec, axis, &values)?;
    let path = sweep_report(&cells, &spec.output_dir)?;
    let failed: usize = cells.iter().map(|c| c.outcome.failures.len()).sum();
    emit(&[
        ("out", path.display().to_string()),
        ("cells", cells.len().to_string()),
        ("failures", failed.to_string()),
    ]);
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let spec = experiment_spec(&args.source, &args.model, &args.correction, &args.experiment)?;
    let outcome = run(&spec)?;
    let paths = report(&outcome, &spec.output_dir)?;
    emit(&[
        ("results", paths.results.display().to_string()),
        ("summary", paths.summary.display().to_string()),
        ("profiles", paths.profiles.display().to_string()),
        ("records", outcome.records.len().to_string()),
        ("failures", outcome.failures.len().to_string()),
    ]);
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Correct(args) => cmd_correct(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // Usage problems exit 1 regardless of clap's own convention.
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
