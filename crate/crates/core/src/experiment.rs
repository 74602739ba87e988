//! Repeated-seed experiment orchestration.
//!
//! A [`run`] draws one dataset per repetition (or re-splits a fixed one),
//! trains the requested methods, corrects the target model's test
//! predictions, and scores everything on a bucket grid shared across the
//! repetition's splits. Repetitions are independent — seed `base + i`
//! drives repetition `i` — so they execute in parallel and merge into a
//! deterministic (seed, method) order before reporting.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::correction::{correct_batch, select_alpha, CorrectionConfig, ValidationSlice};
use crate::dataio::{load_csv, prepare_credit, registry_get, CsvOptions, Dataset, Judgment};
use crate::error::{Error, Result};
use crate::estimators::{fit_estimator, EstimatorKind, EstimatorParams};
use crate::learners::{fit_er, fit_sl, fit_ws, BaselineConfig, Learner, LearnerKind};
use crate::metrics::{welch_t, BucketProfile};
use crate::synthdata::{generate, split_top_k, split_uniform, SynthConfig};

/// XOR salt decorrelating the split RNG stream from the generation stream,
/// which both key off the repetition seed.
const SPLIT_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// The split seed a repetition derives from its own seed. Single-shot
/// pipelines reuse this so `seed` means the same thing everywhere.
pub fn split_seed(seed: u64) -> u64 {
    seed ^ SPLIT_SEED_SALT
}

/// One scoring pipeline per record: the expert alone, the three
/// judgment-blind or judgment-in-training baselines, and the corrected
/// target model under each estimator backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Score the judgment function itself as the predictor.
    JudgmentOnly,
    /// Plain supervised target model, uncorrected.
    Sl,
    /// Weak supervision: target model trained on judgment-derived labels.
    Ws,
    /// Expectation regularization toward the judgment distribution.
    Er,
    /// Corrected target model; adversarially estimated judgment variable.
    OursEjGan,
    /// Corrected; least-squares estimate.
    OursLr,
    /// Corrected; ridge estimate.
    OursRidge,
    /// Corrected; nearest-neighbour estimate.
    OursKnn,
    /// Corrected; constant mean estimate (ablation floor).
    OursMean,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::JudgmentOnly,
        Method::Sl,
        Method::Ws,
        Method::Er,
        Method::OursEjGan,
        Method::OursLr,
        Method::OursRidge,
        Method::OursKnn,
        Method::OursMean,
    ];

    /// Stable config-file and results-column token.
    pub fn token(self) -> &'static str {
        match self {
            Method::JudgmentOnly => "judgment_only",
            Method::Sl => "sl",
            Method::Ws => "ws",
            Method::Er => "er",
            Method::OursEjGan => "ours_ejgan",
            Method::OursLr => "ours_lr",
            Method::OursRidge => "ours_ridge",
            Method::OursKnn => "ours_knn",
            Method::OursMean => "ours_mean",
        }
    }

    /// Parses a config-file token.
    pub fn from_token(token: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.token() == token)
            .ok_or_else(|| Error::Config(format!("unknown method '{token}'")))
    }

    /// The estimator backend behind a correction method, if any.
    pub fn estimator_kind(self) -> Option<EstimatorKind> {
        match self {
            Method::OursEjGan => Some(EstimatorKind::EjGan),
            Method::OursLr => Some(EstimatorKind::LinearRegression),
            Method::OursRidge => Some(EstimatorKind::Ridge),
            Method::OursKnn => Some(EstimatorKind::Knn),
            Method::OursMean => Some(EstimatorKind::Mean),
        _ => None,
        }
    }

    fn needs_target(self) -> bool {
        self == Method::Sl || self.estimator_kind().is_some()
    }
}

/// Where each repetition's rows come from.
#[derive(Clone, Debug)]
pub enum DataSource {
    /// Fresh draw per repetition; the top-k split protocol applies.
    Synthetic(SynthConfig),
    /// The statlog credit file, re-split uniformly per repetition.
    Credit { path: PathBuf },
    /// Any labeled CSV with a numeric judgment column, re-split uniformly.
    Csv {
        path: PathBuf,
        label_column: String,
        judgment_column: String,
        /// Registry name of the judgment function to score against.
        judgment_name: String,
        options: CsvOptions,
    },
}

impl DataSource {
    /// Synthetic sources redraw per repetition: 100 seeds. Fixed datasets
    /// only re-split, where 20 repetitions match reported-table scale.
    pub fn default_repetitions(&self) -> usize {
        match self {
            DataSource::Synthetic(_) => 100,
            _ => 20,
        }
    }
}

/// Full description of one experiment.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub target: LearnerKind,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub correction: CorrectionConfig,
    pub estimator: EstimatorParams,
    pub baseline: BaselineConfig,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    /// A spec with every method, source-appropriate repetition count, and
    /// default training knobs.
    pub fn new(source: DataSource, target: LearnerKind, output_dir: PathBuf) -> Self {
        let repetitions = source.default_repetitions();
        ExperimentSpec {
            source,
            target,
            methods: Method::ALL.to_vec(),
            repetitions,
            base_seed: 0,
            correction: CorrectionConfig::default(),
            estimator: EstimatorParams::default(),
            baseline: BaselineConfig::default(),
            output_dir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if let DataSource::Synthetic(cfg) = &self.source {
            cfg.validate()?;
        }
        self.correction.validate()?;
        Ok(())
    }
}

/// One method's scores on one repetition.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    /// Forced-holdout percent for synthetic splits; 0 for uniform re-splits.
    pub k_percent: f64,
    pub q: usize,
    pub accuracy: f64,
    pub closeness: f64,
    pub combined: f64,
    /// Steepness selected on validation; None for uncorrected methods.
    pub alpha: Option<f64>,
    /// Fit-plus-score time. Reported in aggregate only — never in the
    /// machine-readable output, which must be byte-identical per seed.
    pub wall_time: Duration,
    pub model_profile: BucketProfile,
    pub judgment_profile: BucketProfile,
}

/// A repetition that error-aborted, with the stage message.
#[derive(Clone, Debug)]
pub struct RunFailure {
    pub seed: u64,
    pub message: String,
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

fn judgment_range(ds: &Dataset) -> Result<(f64, f64)> {
    let z = ds.judgment_column();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &z {
        if !v.is_finite() {
            return Err(Error::Data("non-finite judgment value".into()));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

fn predict_all(model: &Learner, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    rows.iter().map(|r| model.predict_proba(r)).collect()
}

fn distances(
    estimator: &crate::estimators::JudgmentEstimator,
    rows: &[Vec<f64>],
    judgment_index: usize,
) -> Result<Vec<f64>> {
    rows.iter()
        .map(|r| estimator.distance_k(r, judgment_index))
        .collect()
}

/// Loads a fixed (non-synthetic) source once; synthetic sources return None
/// and draw inside each repetition.
fn load_fixed(source: &DataSource) -> Result<Option<(Dataset, Judgment)>> {
    match source {
        DataSource::Synthetic(_) => Ok(None),
        DataSource::Credit { path } => prepare_credit(path).map(Some),
        DataSource::Csv {
            path,
            label_column,
            judgment_column,
            judgment_name,
            options,
        } => {
            let ds = load_csv(path, label_column, judgment_column, options)?;
            let judgment = registry_get(judgment_name)?;
            Ok(Some((ds, judgment)))
        }
    }
}

/// One repetition: materialize rows, split, fit, correct, score every
/// requested method. Any error aborts the whole repetition.
fn run_repetition(
    spec: &ExperimentSpec,
    fixed: Option<&(Dataset, Judgment)>,
    seed: u64,
) -> Result<Vec<RunRecord>> {
    let holdout_seed = split_seed(seed);
    let (ds, judgment, split, k_percent): (Dataset, Judgment, _, f64) = match (&spec.source, fixed)
    {
        (DataSource::Synthetic(cfg), _) => {
            let mut cfg = *cfg;
            cfg.seed = seed;
            let sd = generate(&cfg)?;
            let split = split_top_k(&sd.dataset, cfg.holdout_k_percent, holdout_seed)?;
            (
                sd.dataset,
                Judgment::Synthetic(sd.judgment),
                split,
                cfg.holdout_k_percent,
            )
        }
        (_, Some((ds, judgment))) => {
            let split = split_uniform(ds.n(), holdout_seed)?;
            (ds.clone(), judgment.clone(), split, 0.0)
        }
        (_, None) => return Err(Error::Config("fixed source was not loaded".into())),
    };

    let train = ds.subset(&split.train)?;
    let val = ds.subset(&split.val)?;
    let test = ds.subset(&split.test)?;
    // One bucket grid per repetition, spanning the full dataset, so train,
    // validation, and test profiles land on comparable buckets.
    let range = judgment_range(&ds)?;
    let q = spec.correction.q_buckets;

    let target = if spec.methods.iter().any(|m| m.needs_target()) {
        Some(fit_sl(&train, spec.target, &spec.baseline)?)
    } else {
        None
    };

    let test_z = test.judgment_column();
    let g_test = judgment.values(&test_z);
    let val_z = val.judgment_column();
    let g_val = judgment.values(&val_z);

    let mut records = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let started = Instant::now();
        let (predictions, alpha) = match method {
            Method::JudgmentOnly => (g_test.clone(), None),
            Method::Sl => {
                let model = target.as_ref().expect("target fitted for sl");
                (predict_all(model, &test.features)?, None)
            }
            Method::Ws => {
                let g_train = judgment.values(&train.judgment_column());
                let model = fit_ws(&train, &g_train, spec.target, &spec.baseline)?;
                (predict_all(&model, &test.features)?, None)
            }
            Method::Er => {
                let g_train = judgment.values(&train.judgment_column());
                let model = fit_er(&train, &g_train, spec.target, &spec.baseline)?;
                (predict_all(&model, &test.features)?, None)
            }
            corrected => {
                let kind = corrected.estimator_kind().expect("ours method");
                let model = target.as_ref().expect("target fitted for correction");
                let mut params = spec.estimator;
                // The estimator's internal RNG follows the repetition.
                params.gan.train.seed = seed;
                let estimator = fit_estimator(
                    kind,
                    &train.context_rows(),
                    &train.judgment_column(),
                    &params,
                )?;
                let y_hat_val = predict_all(model, &val.features)?;
                let k_val = distances(&estimator, &val.features, val.judgment_index)?;
                let slice = ValidationSlice {
                    y_hat: &y_hat_val,
                    g_of_z: &g_val,
                    k: &k_val,
                    labels: &val.labels,
                    judgment_scores: &val_z,
                };
                let alpha = select_alpha(&spec.correction, &slice, range)?;
                let y_hat_test = predict_all(model, &test.features)?;
                let k_test = distances(&estimator, &test.features, test.judgment_index)?;
                let corrected = correct_batch(&y_hat_test, &g_test, &k_test, alpha)?;
                let y_final: Vec<f64> = corrected.iter().map(|c| c.y_final).collect();
                (y_final, Some(alpha))
            }
        };
        let report =
            crate::metrics::evaluate(&predictions, &test.labels, &test_z, &g_test, q, range)?;
        records.push(RunRecord {
            method,
            seed,
            k_percent,
            q,
            accuracy: report.accuracy,
            closeness: report.closeness,
            combined: report.combined,
            alpha,
            wall_time: started.elapsed(),
            model_profile: report.model_profile,
            judgment_profile: report.judgment_profile,
        });
    }
    Ok(records)
}

/// Runs every repetition, tolerating per-repetition failures.
fn run_outcome(spec: &ExperimentSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let fixed = load_fixed(&spec.source)?;
    let results: Vec<(u64, Result<Vec<RunRecord>>)> = (0..spec.repetitions)
        .into_par_iter()
        .map(|i| {
            let seed = spec.base_seed + i as u64;
            (seed, run_repetition(spec, fixed.as_ref(), seed))
        })
        .collect();

    let mut outcome = RunOutcome { records: Vec::new(), failures: Vec::new() };
    for (seed, result) in results {
        match result {
            Ok(records) => outcome.records.extend(records),
            Err(e) => outcome.failures.push(RunFailure { seed, message: e.to_string() }),
        }
    }
    // Parallel collection already preserves index order; the explicit
    // (seed, method) sort is the documented merge rule.
    outcome
        .records
        .sort_by(|a, b| (a.seed, a.method).cmp(&(b.seed, b.method)));
    Ok(outcome)
}

/// Runs the experiment. Individual repetitions may fail and are recorded;
/// the run itself fails only when every repetition failed.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutcome> {
    let outcome = run_outcome(spec)?;
    if outcome.records.is_empty() {
        if let Some(first) = outcome.failures.first() {
            return Err(Error::Data(format!(
                "all {} repetitions failed; first failure (seed {}): {}",
                outcome.failures.len(),
                first.seed,
                first.message
            )));
        }
    }
    Ok(outcome)
}

/// Sweepable experiment axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    /// Forced-holdout percent (synthetic sources only).
    KPercent,
    /// Bucket count of the evaluation grid.
    QBuckets,
    /// Fixed correction steepness (collapses the selection grid).
    Alpha,
}

impl SweepAxis {
    pub fn token(self) -> &'static str {
        match self {
            SweepAxis::KPercent => "k_percent",
            SweepAxis::QBuckets => "q",
            SweepAxis::Alpha => "alpha",
        }
    }

    pub fn from_token(token: &str) -> Result<Self> {
        match token {
            "k_percent" => Ok(SweepAxis::KPercent),
            "q" => Ok(SweepAxis::QBuckets),
            "alpha" => Ok(SweepAxis::Alpha),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

/// One axis value's worth of repetitions.
#[derive(Clone, Debug)]
pub struct SweepCell {
    pub axis: SweepAxis,
    pub value: f64,
    pub outcome: RunOutcome,
}

fn spec_for_axis(spec: &ExperimentSpec, axis: SweepAxis, value: f64) -> Result<ExperimentSpec> {
    let mut varied = spec.clone();
    match axis {
        SweepAxis::KPercent => match &mut varied.source {
            DataSource::Synthetic(cfg) => cfg.holdout_k_percent = value,
            _ => {
                return Err(Error::Config(
                    "k_percent sweeps apply to synthetic sources only; fixed datasets re-split uniformly".into(),
                ))
            }
        },
        SweepAxis::QBuckets => {
            if value.fract() != 0.0 || value < 2.0 || value > 1e6 {
                return Err(Error::Config(format!(
                    "bucket count must be an integer of at least 2, got {value}"
                )));
            }
            varied.correction.q_buckets = value as usize;
        }
        SweepAxis::Alpha => {
            // A one-point grid makes selection pick exactly this value.
            varied.correction.alpha = value;
            varied.correction.alpha_grid = vec![value];
        }
    }
    varied.validate()?;
    Ok(varied)
}

/// Runs the experiment once per axis value. Per-repetition errors are
/// recorded in each cell; an empty-records cell does not abort the sweep.
pub fn sweep(spec: &ExperimentSpec, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepCell>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one axis value".into()));
    }
    values
        .iter()
        .map(|&value| {
            let varied = spec_for_axis(spec, axis, value)?;
            let outcome = run_outcome(&varied)?;
            Ok(SweepCell { axis, value, outcome })
        })
        .collect()
}

/// Paths of the files a report writes.
#[derive(Clone, Debug)]
pub struct ReportPaths {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub profiles: PathBuf,
}

fn fmt_alpha(alpha: Option<f64>) -> String {
    alpha.map(|a| format!("{a}")).unwrap_or_default()
}

/// Machine-readable results: one line per record, versioned header,
/// shortest-round-trip floats, no timing — byte-identical per (spec, seed).
fn render_results(records: &[RunRecord]) -> String {
    let mut out = String::from("# accord-results v1\n");
    out.push_str("method,seed,k_percent,q,accuracy,closeness,combined,alpha\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.method.token(),
            r.seed,
            r.k_percent,
            r.q,
            r.accuracy,
            r.closeness,
            r.combined,
            fmt_alpha(r.alpha),
        ));
    }
    out
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn methods_in(records: &[RunRecord]) -> Vec<Method> {
    let mut seen = Vec::new();
    for r in records {
        if !seen.contains(&r.method) {
            seen.push(r.method);
        }
    }
    seen.sort();
    seen
}

fn column<F: Fn(&RunRecord) -> f64>(records: &[RunRecord], method: Method, f: F) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.method == method)
        .map(f)
        .collect()
}

/// Human summary: mean (std) per method and metric, Welch significance of
/// each corrected method against the plain target model, failures, and the
/// only place wall time appears.
fn render_summary(outcome: &RunOutcome) -> String {
    let records = &outcome.records;
    let mut out = String::from("experiment summary\n==================\n\n");
    let reps_ok = {
        let mut seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
        seeds.dedup();
        seeds.len()
    };
    out.push_str(&format!(
        "repetitions: {} scored, {} failed\n\n",
        reps_ok,
        outcome.failures.len()
    ));

    out.push_str(&format!(
        "{:<14} {:>4}  {:<16} {:<16} {:<16} {:<10}\n",
        "method", "n", "accuracy", "closeness", "combined", "alpha"
    ));
    for method in methods_in(records) {
        let acc = column(records, method, |r| r.accuracy);
        let clo = column(records, method, |r| r.closeness);
        let com = column(records, method, |r| r.combined);
        let alphas: Vec<f64> = records
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.alpha)
            .collect();
        let cell = |vals: &[f64]| {
            let (m, s) = mean_std(vals);
            format!("{m:.3} ({s:.3})")
        };
        let alpha_cell = if alphas.is_empty() {
            "-".to_string()
        } else {
            format!("{:.2}", mean_std(&alphas).0)
        };
        out.push_str(&format!(
            "{:<14} {:>4}  {:<16} {:<16} {:<16} {:<10}\n",
            method.token(),
            acc.len(),
            cell(&acc),
            cell(&clo),
            cell(&com),
            alpha_cell
        ));
    }

    let sl_combined = column(records, Method::Sl, |r| r.combined);
    if sl_combined.len() >= 2 {
        let mut lines = Vec::new();
        for method in methods_in(records) {
            if method.estimator_kind().is_none() {
                continue;
            }
            let ours = column(records, method, |r| r.combined);
            if ours.len() < 2 {
                continue;
            }
            match welch_t(&ours, &sl_combined) {
                Ok(w) => lines.push(format!(
                    "  {:<14} t={:+.3}  p={:.4}\n",
                    method.token(),
                    w.t,
                    w.p
                )),
                Err(e) => lines.push(format!("  {:<14} unavailable: {e}\n", method.token())),
            }
        }
        if !lines.is_empty() {
            out.push_str("\ncombined vs sl (welch two-sided):\n");
            for line in lines {
                out.push_str(&line);
            }
        }
    }

    if !outcome.failures.is_empty() {
        out.push_str("\nfailures:\n");
        for f in &outcome.failures {
            out.push_str(&format!("  seed {}: {}\n", f.seed, f.message));
        }
    }

    let total: Duration = records.iter().map(|r| r.wall_time).sum();
    out.push_str(&format!("\ntotal fit+score time: {:.2}s\n", total.as_secs_f64()));
    out
}

/// Plot data: per method and bucket index, the mean bucket centre and the
/// mean of each profile's per-bucket means across repetitions. Synthetic
/// repetitions each carry their own grid, so bucket index — relative
/// position in the judgment range — is the comparable unit.
fn render_profiles(records: &[RunRecord]) -> String {
    let mut out = String::from("# accord-profiles v1\n");
    out.push_str("method\tbucket\tcenter\tmodel_mean\tjudgment_mean\n");
    for method in methods_in(records) {
        let rows: Vec<&RunRecord> = records.iter().filter(|r| r.method == method).collect();
        let q = rows.iter().map(|r| r.model_profile.q()).max().unwrap_or(0);
        for bucket in 0..q {
            let mut centers = Vec::new();
            let mut model = Vec::new();
            let mut judgment = Vec::new();
            for r in &rows {
                if bucket >= r.model_profile.q() {
                    continue;
                }
                centers.push(r.model_profile.centers()[bucket]);
                if let Some(v) = r.model_profile.means[bucket] {
                    model.push(v);
                }
                if let Some(v) = r.judgment_profile.means[bucket] {
                    judgment.push(v);
                }
            }
            let cell = |vals: &[f64]| {
                if vals.is_empty() {
                    "NA".to_string()
                } else {
                    format!("{}", vals.iter().sum::<f64>() / vals.len() as f64)
                }
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                method.token(),
                bucket,
                cell(&centers),
                cell(&model),
                cell(&judgment),
            ));
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the three report files into `dir`: `results.csv` (machine
/// readable, deterministic), `summary.txt` (human table + significance +
/// timing), `profiles.tsv` (bucket-profile plot data).
pub fn report(outcome: &RunOutcome, dir: &Path) -> Result<ReportPaths> {
    if outcome.records.is_empty() {
        return Err(Error::Config("nothing to report: no records".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = ReportPaths {
        results: dir.join("results.csv"),
        summary: dir.join("summary.txt"),
        profiles: dir.join("profiles.tsv"),
    };
    write_file(&paths.results, &render_results(&outcome.records))?;
    write_file(&paths.summary, &render_summary(outcome))?;
    write_file(&paths.profiles, &render_profiles(&outcome.records))?;
    Ok(paths)
}

/// Writes sweep summaries: one row per (axis value, method) with mean and
/// standard deviation of every metric. Deterministic.
pub fn sweep_report(cells: &[SweepCell], dir: &Path) -> Result<PathBuf> {
    if cells.is_empty() {
        return Err(Error::Config("nothing to report: no sweep cells".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = String::from("# accord-sweep v1\n");
    out.push_str(
        "axis,value,method,n,accuracy_mean,accuracy_std,closeness_mean,closeness_std,combined_mean,combined_std\n",
    );
    for cell in cells {
        for method in methods_in(&cell.outcome.records) {
            let records = &cell.outcome.records;
            let (am, asd) = mean_std(&column(records, method, |r| r.accuracy));
            let (cm, csd) = mean_std(&column(records, method, |r| r.closeness));
            let (om, osd) = mean_std(&column(records, method, |r| r.combined));
            let n = records.iter().filter(|r| r.method == method).count();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                cell.axis.token(),
                cell.value,
                method.token(),
                n,
                am,
                asd,
                cm,
                csd,
                om,
                osd,
            ));
        }
    }
    let path = dir.join("sweep.csv");
    write_file(&path, &out)?;
    Ok(path)
}
