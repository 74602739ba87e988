//! Dataset container and ingestion.
//!
//! A [`Dataset`] is a dense f64 feature matrix with binary labels and one
//! designated judgment column — the feature an expert reasons about (a price,
//! a credit attribute). Everything downstream (classifier fitting, judgment
//! estimation, prediction correction) works off this one shape. Ingestion
//! covers generic CSV with one-hot encoding, the space-separated statlog
//! credit file, and a registry of named judgment functions.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::synthdata::{JudgmentFunction, SynthForm};

/// Feature matrix, binary labels, and the judgment-column designation.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    pub judgment_index: usize,
    pub judgment_name: String,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        judgment_index: usize,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        let m = features[0].len();
        if feature_names.len() != m {
            return Err(Error::Shape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                m
            )));
        }
        if features.iter().any(|row| row.len() != m) {
            return Err(Error::Shape("ragged feature rows".into()));
        }
        if judgment_index >= m {
            return Err(Error::Config(format!(
                "judgment column {judgment_index} out of range for {m} features"
            )));
        }
        for (i, row) in features.iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite feature value in row {i}")));
            }
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::Data("labels must be 0 or 1".into()));
        }
        let judgment_name = feature_names[judgment_index].clone();
        Ok(Dataset { features, labels, feature_names, judgment_index, judgment_name })
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn m(&self) -> usize {
        self.features[0].len()
    }

    /// The judgment column as an owned vector.
    pub fn judgment_column(&self) -> Vec<f64> {
        self.features.iter().map(|row| row[self.judgment_index]).collect()
    }

    /// Feature rows with the judgment column removed — the context an
    /// estimator conditions on.
    pub fn context_rows(&self) -> Vec<Vec<f64>> {
        self.features
            .iter()
            .map(|row| {
                let mut s = Vec::with_capacity(row.len() - 1);
                s.extend_from_slice(&row[..self.judgment_index]);
                s.extend_from_slice(&row[self.judgment_index + 1..]);
                s
            })
            .collect()
    }

    /// Row subset by index, preserving order. Indices must be in range.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for &i in rows {
            let row = self
                .features
                .get(i)
                .ok_or_else(|| Error::Shape(format!("row index {i} out of range")))?;
            features.push(row.clone());
            labels.push(self.labels[i]);
        }
        Dataset::new(features, labels, self.feature_names.clone(), self.judgment_index)
    }

    pub fn positive_rate(&self) -> f64 {
        self.labels.iter().map(|&y| y as f64).sum::<f64>() / self.labels.len() as f64
    }
}

/// Encoding knobs for CSV ingestion.
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Drop the alphabetically first indicator of every categorical column,
    /// the usual dummy-variable convention for linear models.
    pub drop_first: bool,
}

/// Reads "0"/"1", their float spellings, and yes/no/true/false.
fn parse_label(cell: &str) -> Option<u8> {
    match cell.to_ascii_lowercase().as_str() {
        "0" | "no" | "false" => Some(0),
        "1" | "yes" | "true" => Some(1),
        other => match other.parse::<f64>() {
            Ok(v) if v == 0.0 => Some(0),
            Ok(v) if v == 1.0 => Some(1),
            _ => None,
        },
    }
}

/// Loads a comma-separated file with a header row into a [`Dataset`].
///
/// Numeric columns (every cell parses as a finite f64) pass through;
/// anything else is one-hot encoded with categories in alphabetical order.
/// The judgment column must be numeric. Rows with empty cells, non-finite
/// numbers, or non-binary labels abort ingestion with their 1-based data
/// row numbers listed.
pub fn load_csv(
    path: &Path,
    label_column: &str,
    judgment_column: &str,
    options: &CsvOptions,
) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("unreadable header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Data(format!("csv parse: {e}")))?;
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{} has no data rows", path.display())));
    }
    let column_index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("column '{name}' not found in header")))
    };
    let label_idx = column_index(label_column)?;
    let judgment_idx = column_index(judgment_column)?;
    if judgment_idx == label_idx {
        return Err(Error::Config(
            "judgment and label columns must differ".into(),
        ));
    }

    // One pass of integrity checks so the error can name every bad row.
    let mut bad: Vec<String> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.iter().any(String::is_empty) {
            bad.push(format!("{}: empty cell", i + 1));
        } else if parse_label(&row[label_idx]).is_none() {
            bad.push(format!("{}: label '{}' is not binary", i + 1, row[label_idx]));
        }
    }
    if !bad.is_empty() {
        return Err(Error::Data(format!(
            "rejected data rows — {}",
            bad.join("; ")
        )));
    }

    let numeric: Vec<bool> = (0..headers.len())
        .map(|c| rows.iter().all(|row| row[c].parse::<f64>().is_ok()))
        .collect();
    if !numeric[judgment_idx] {
        return Err(Error::Config(format!(
            "judgment column '{judgment_column}' must be numeric"
        )));
    }

    let mut features: Vec<Vec<f64>> = vec![Vec::new(); rows.len()];
    let mut names: Vec<String> = Vec::new();
    let mut judgment_out = None;
    for c in 0..headers.len() {
        if c == label_idx {
            continue;
        }
        if c == judgment_idx {
            judgment_out = Some(names.len());
        }
        if numeric[c] {
            names.push(headers[c].clone());
            for (i, row) in rows.iter().enumerate() {
                let v: f64 = row[c].parse().expect("pre-checked numeric");
                if !v.is_finite() {
                    bad.push(format!("{}: non-finite '{}' in {}", i + 1, row[c], headers[c]));
                }
                features[i].push(v);
            }
        } else {
            let categories: BTreeSet<&str> = rows.iter().map(|row| row[c].as_str()).collect();
            let keep: Vec<&str> = categories
                .into_iter()
                .skip(usize::from(options.drop_first))
                .collect();
            for cat in &keep {
                names.push(format!("{}={cat}", headers[c]));
            }
            for (i, row) in rows.iter().enumerate() {
                for cat in &keep {
                    features[i].push(f64::from(row[c].as_str() == *cat));
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::Data(format!(
            "rejected data rows — {}",
            bad.join("; ")
        )));
    }
    let labels: Vec<u8> = rows
        .iter()
        .map(|row| parse_label(&row[label_idx]).expect("pre-checked label"))
        .collect();
    Dataset::new(features, labels, names, judgment_out.expect("judgment column visited"))
}

/// Writes a dataset as CSV: every feature column under its name plus a
/// final `label` column. [`load_csv`] on the output reproduces the dataset
/// exactly, because f64 values print in shortest round-trip form.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    if ds.feature_names.iter().any(|n| n == "label") {
        return Err(Error::Config(
            "a feature named 'label' would collide with the label column".into(),
        ));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push("label");
    writer
        .write_record(&header)
        .map_err(|e| Error::Data(format!("csv write: {e}")))?;
    for (row, &y) in ds.features.iter().zip(&ds.labels) {
        let mut record: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        record.push(format!("{y}"));
        writer
            .write_record(&record)
            .map_err(|e| Error::Data(format!("csv write: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Rows in the statlog credit file.
const CREDIT_ROWS: usize = 1000;
/// Attributes plus the trailing label field.
const CREDIT_FIELDS: usize = 21;
/// 1-indexed positions of the numeric attributes in the statlog schema.
const CREDIT_NUMERIC: [usize; 7] = [2, 5, 8, 11, 13, 16, 18];
/// 1-indexed position of the other-debtors attribute.
const CREDIT_DEBTORS: usize = 10;
/// Category code meaning a guarantor is present.
const CREDIT_GUARANTOR_CODE: &str = "A103";

/// Loads the space-separated statlog credit file.
///
/// Labels map good=1/bad=0. The other-debtors attribute collapses into a
/// binary judgment column — 1 exactly when a guarantor exists — and every
/// other categorical attribute is one-hot encoded over its observed codes
/// in alphabetical order. The paired judgment function shifts the
/// indicator onto the label scale: g(0) = 0.5, g(1) = 1.
pub fn prepare_credit(path: &Path) -> Result<(Dataset, Judgment)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().collect())
        .collect();
    if rows.len() != CREDIT_ROWS {
        return Err(Error::Data(format!(
            "credit file must hold exactly {CREDIT_ROWS} records, found {}",
            rows.len()
        )));
    }
    let mut labels = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != CREDIT_FIELDS {
            return Err(Error::Data(format!(
                "record {} has {} fields, expected {CREDIT_FIELDS}",
                i + 1,
                row.len()
            )));
        }
        labels.push(match row[CREDIT_FIELDS - 1] {
            "1" => 1u8, // good credit
            "2" => 0u8, // bad credit
            other => {
                return Err(Error::Data(format!(
                    "record {} has label '{other}', expected 1 or 2",
                    i + 1
                )))
            }
        });
    }

    let mut features: Vec<Vec<f64>> = vec![Vec::new(); rows.len()];
    let mut names: Vec<String> = Vec::new();
    let mut judgment_index = None;
    for attr in 1..=CREDIT_FIELDS - 1 {
        let field = attr - 1;
        if attr == CREDIT_DEBTORS {
            judgment_index = Some(names.len());
            names.push("guarantor".into());
            for (i, row) in rows.iter().enumerate() {
                features[i].push(f64::from(row[field] == CREDIT_GUARANTOR_CODE));
            }
        } else if CREDIT_NUMERIC.contains(&attr) {
            names.push(format!("a{attr}"));
            for (i, row) in rows.iter().enumerate() {
                let v: f64 = row[field].parse().map_err(|_| {
                    Error::Data(format!(
                        "record {} attribute {attr}: '{}' is not numeric",
                        i + 1,
                        row[field]
                    ))
                })?;
                features[i].push(v);
            }
        } else {
            let categories: BTreeSet<&str> = rows.iter().map(|row| row[field]).collect();
            for cat in &categories {
                names.push(format!("a{attr}={cat}"));
            }
            for (i, row) in rows.iter().enumerate() {
                for cat in &categories {
                    features[i].push(f64::from(row[field] == *cat));
                }
            }
        }
    }
    let ds = Dataset::new(
        features,
        labels,
        names,
        judgment_index.expect("debtors attribute visited"),
    )?;
    Ok((ds, Judgment::GuarantorShift))
}

/// User-supplied judgment curve: linear interpolation through (z, g)
/// points, clamped at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentTable {
    source: String,
    zs: Vec<f64>,
    gs: Vec<f64>,
    monotone: bool,
}

impl JudgmentTable {
    /// Builds a table from points, sorting by z. Requires at least two
    /// distinct z values and g inside [0, 1]. Non-monotone g is accepted
    /// but remembered so callers can warn.
    pub fn new(source: &str, mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Data(format!(
                "judgment table needs at least 2 points, got {}",
                points.len()
            )));
        }
        for &(z, g) in &points {
            if !z.is_finite() || !g.is_finite() || !(0.0..=1.0).contains(&g) {
                return Err(Error::Data(format!(
                    "judgment table point ({z}, {g}) is invalid"
                )));
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite z"));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Data("judgment table has duplicate z values".into()));
        }
        let (zs, gs): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let monotone = gs.windows(2).all(|w| w[0] <= w[1]) || gs.windows(2).all(|w| w[0] >= w[1]);
        Ok(JudgmentTable {
            source: source.to_string(),
            zs,
            gs,
            monotone,
        })
    }

    /// Loads a two-column (z, g) CSV; a non-numeric first row is treated
    /// as a header and skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(file);
        let mut points = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Data(format!("csv parse: {e}")))?;
            let fields: Vec<&str> = record.iter().map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Data(format!(
                    "judgment table row {} has {} columns, expected 2",
                    i + 1,
                    fields.len()
                )));
            }
            match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(z), Ok(g)) => points.push((z, g)),
                _ if i == 0 => continue, // header row
                _ => {
                    return Err(Error::Data(format!(
                        "judgment table row {} is not numeric",
                        i + 1
                    )))
                }
            }
        }
        JudgmentTable::new(&path.display().to_string(), points)
    }

    fn value(&self, z: f64) -> f64 {
        let n = self.zs.len();
        if z <= self.zs[0] {
            return self.gs[0];
        }
        if z >= self.zs[n - 1] {
            return self.gs[n - 1];
        }
        let i = self.zs.partition_point(|&x| x <= z) - 1;
        let t = (z - self.zs[i]) / (self.zs[i + 1] - self.zs[i]);
        self.gs[i] + t * (self.gs[i + 1] - self.gs[i])
    }

    /// False when g is neither non-decreasing nor non-increasing in z.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }
}

/// Named judgment function mapping the judgment variable onto the label
/// scale; every kind returns values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Judgment {
    /// `g(z) = 1 − z` over prices pre-normalized to [0, 1] in log scale:
    /// cheaper listings are likelier genuine.
    PriceNegation,
    /// `g(z) = 0.5 + 0.5·z` over a binary indicator: a guarantor lifts an
    /// otherwise uninformative 0.5 to certainty.
    GuarantorShift,
    /// Scalar slice of a synthetic label recipe.
    Synthetic(JudgmentFunction),
    /// User-supplied interpolation table.
    Table(JudgmentTable),
}

impl Judgment {
    /// Evaluates the function, clamped into [0, 1].
    pub fn value(&self, z: f64) -> f64 {
        match self {
            Judgment::PriceNegation => (1.0 - z).clamp(0.0, 1.0),
            Judgment::GuarantorShift => (0.5 + 0.5 * z).clamp(0.0, 1.0),
            Judgment::Synthetic(f) => f.value(z),
            Judgment::Table(t) => t.value(z),
        }
    }

    /// Applies [`Self::value`] across a column.
    pub fn values(&self, zs: &[f64]) -> Vec<f64> {
        zs.iter().map(|&z| self.value(z)).collect()
    }

    /// Registry name that resolves back to this function.
    pub fn name(&self) -> String {
        match self {
            Judgment::PriceNegation => "it_price".into(),
            Judgment::GuarantorShift => "credit_guarantor".into(),
            Judgment::Synthetic(f) => {
                let table: Vec<String> = f.table().iter().map(|v| format!("{v}")).collect();
                format!(
                    "synthetic:{}:{}:{}",
                    f.form().token(),
                    f.coefficient(),
                    table.join(",")
                )
            }
            Judgment::Table(t) => format!("custom:{}", t.source),
        }
    }

    /// A caveat the caller should surface, if any.
    pub fn warning(&self) -> Option<String> {
        match self {
            Judgment::Table(t) if !t.monotone => {
                Some("judgment table is not monotone in z".into())
            }
            Judgment::Synthetic(f) if f.is_degenerate() => {
                Some("judgment function is constant over its data".into())
            }
            _ => None,
        }
    }
}

/// Resolves a judgment function by registry name.
///
/// Names: `it_price`, `credit_guarantor`,
/// `synthetic:<form>:<coefficient>:<v0,v1,…>` (the comma list being the
/// kernel sample the output is rank-normalized against), `custom:<csv-path>`.
pub fn registry_get(name: &str) -> Result<Judgment> {
    if name == "it_price" {
        return Ok(Judgment::PriceNegation);
    }
    if name == "credit_guarantor" {
        return Ok(Judgment::GuarantorShift);
    }
    if let Some(spec) = name.strip_prefix("synthetic:") {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "synthetic judgment spec needs form:coefficient:table, got '{}…'",
                spec.chars().take(40).collect::<String>()
            )));
        }
        let form = SynthForm::from_token(parts[0])?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("'{s}' is not a number in a synthetic judgment spec")))
        };
        let table = parts[2].split(',').map(parse).collect::<Result<Vec<f64>>>()?;
        let f = JudgmentFunction::from_parts(form, parse(parts[1])?, table)?;
        return Ok(Judgment::Synthetic(f));
    }
    if let Some(path) = name.strip_prefix("custom:") {
        return Ok(Judgment::Table(JudgmentTable::load(Path::new(path))?));
    }
    Err(Error::Config(format!("unknown judgment function '{name}'")))
}
