//! Tabular datasets: CSV loading, seeded train/test splitting, recipe augmentation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exprlang::{eval_column, FeatureRecipe, RecipeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Regression,
    Classification,
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regression" => Ok(TaskKind::Regression),
            "classification" => Ok(TaskKind::Classification),
            other => Err(format!("unknown task kind '{other}' (expected regression or classification)")),
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
        })
    }
}

/// Prediction target. Class labels stay opaque strings; learners integer-code them internally.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Numeric(Vec<f64>),
    Labels(Vec<String>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Numeric(v) => v.len(),
            Target::Labels(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> TaskKind {
        match self {
            Target::Numeric(_) => TaskKind::Regression,
            Target::Labels(_) => TaskKind::Classification,
        }
    }

    pub fn select(&self, rows: &[usize]) -> Target {
        match self {
            Target::Numeric(v) => Target::Numeric(rows.iter().map(|&i| v[i]).collect()),
            Target::Labels(v) => Target::Labels(rows.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Target::Numeric(v) => Some(v),
            Target::Labels(_) => None,
        }
    }

    pub fn as_labels(&self) -> Option<&[String]> {
        match self {
            Target::Labels(v) => Some(v),
            Target::Numeric(_) => None,
        }
    }

    /// Sorted distinct labels; empty for numeric targets.
    pub fn classes(&self) -> Vec<String> {
        match self {
            Target::Labels(v) => v.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            Target::Numeric(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    Io { path: PathBuf, message: String },
    Csv(String),
    MissingTargetColumn(String),
    DuplicateColumn(String),
    EmptyFeatureName,
    /// `line` is the 1-based line in the file (the header is line 1).
    NonNumeric { line: usize, column: String, value: String },
    RaggedRow { line: usize, expected: usize, found: usize },
    Empty,
    LengthMismatch { column: String, expected: usize, found: usize },
    TooFewClasses,
    BadSplit(String),
    Recipe(Vec<RecipeError>),
    Manifest(String),
    HeaderMismatch { expected: Vec<String>, found: Vec<String> },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            DataError::Csv(m) => write!(f, "csv: {m}"),
            DataError::MissingTargetColumn(c) => write!(f, "target column '{c}' not found in header"),
            DataError::DuplicateColumn(c) => write!(f, "duplicate column '{c}'"),
            DataError::EmptyFeatureName => write!(f, "empty feature name"),
            DataError::NonNumeric { line, column, value } => {
                write!(f, "line {line}, column '{column}': '{value}' is not a number")
            }
            DataError::RaggedRow { line, expected, found } => {
                write!(f, "line {line}: expected {expected} fields, found {found}")
            }
            DataError::Empty => write!(f, "dataset has no rows"),
            DataError::LengthMismatch { column, expected, found } => {
                write!(f, "column '{column}' has {found} rows, expected {expected}")
            }
            DataError::TooFewClasses => write!(f, "classification target needs at least 2 distinct labels"),
            DataError::BadSplit(m) => write!(f, "invalid split: {m}"),
            DataError::Recipe(errs) => {
                let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
                write!(f, "recipe does not fit dataset: {}", msgs.join("; "))
            }
            DataError::Manifest(m) => write!(f, "manifest: {m}"),
            DataError::HeaderMismatch { expected, found } => {
                write!(f, "csv features {found:?} do not match manifest features {expected:?}")
            }
        }
    }
}

impl std::error::Error for DataError {}

/// Named numeric feature columns plus a target. Immutable once built.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Target,
    index: HashMap<String, usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.feature_names == other.feature_names
            && self.columns == other.columns
            && self.target == other.target
    }
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target: Target,
    ) -> Result<Dataset, DataError> {
        let n = target.len();
        if n == 0 {
            return Err(DataError::Empty);
        }
        if feature_names.len() != columns.len() {
            return Err(DataError::LengthMismatch {
                column: "<feature names>".into(),
                expected: columns.len(),
                found: feature_names.len(),
            });
        }
        let mut index = HashMap::with_capacity(feature_names.len());
        for (i, (fname, col)) in feature_names.iter().zip(&columns).enumerate() {
            if fname.is_empty() {
                return Err(DataError::EmptyFeatureName);
            }
            if index.insert(fname.clone(), i).is_some() {
                return Err(DataError::DuplicateColumn(fname.clone()));
            }
            if col.len() != n {
                return Err(DataError::LengthMismatch { column: fname.clone(), expected: n, found: col.len() });
            }
        }
        if let Target::Labels(_) = &target {
            if target.classes().len() < 2 {
                return Err(DataError::TooFewClasses);
            }
        }
        Ok(Dataset { name: name.into(), feature_names, columns, target, index })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.index.get(name).map(|&i| self.columns[i].as_slice())
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn task(&self) -> TaskKind {
        self.target.task()
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    /// New dataset holding `rows` (in the given order). Classification subsets
    /// may legitimately contain a single class, so invariants are not re-checked.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect(),
            target: self.target.select(rows),
            index: self.index.clone(),
        }
    }

    /// Same rows and target, different feature columns.
    pub fn with_features(&self, feature_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Dataset, DataError> {
        let mut d = Dataset::new(self.name.clone(), feature_names, columns, Target::Numeric(vec![0.0; self.n_rows()]))?;
        d.target = self.target.clone();
        Ok(d)
    }
}

/// Reads a comma-separated file with one header row.
pub fn load_csv(path: &Path, target_column: &str, task: TaskKind) -> Result<Dataset, DataError> {
    let io_err = |e: &dyn fmt::Display| DataError::Io { path: path.to_path_buf(), message: e.to_string() };
    let file = std::fs::File::open(path).map_err(|e| io_err(&e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let header: Vec<String> =
        reader.headers().map_err(|e| DataError::Csv(e.to_string()))?.iter().map(|h| h.trim().to_string()).collect();

    let mut target_at = None;
    for (i, h) in header.iter().enumerate() {
        if h == target_column {
            if target_at.is_some() {
                return Err(DataError::DuplicateColumn(h.clone()));
            }
            target_at = Some(i);
        }
    }
    let target_at = target_at.ok_or_else(|| DataError::MissingTargetColumn(target_column.to_string()))?;
    let feature_names: Vec<String> =
        header.iter().enumerate().filter(|&(i, _)| i != target_at).map(|(_, h)| h.clone()).collect();

    let mut columns = vec![Vec::new(); feature_names.len()];
    let mut numeric_target = Vec::new();
    let mut label_target = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        if record.len() != header.len() {
            return Err(DataError::RaggedRow { line, expected: header.len(), found: record.len() });
        }
        let mut c = 0;
        for (i, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let parse = |col: &str| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| DataError::NonNumeric {
                    line,
                    column: col.to_string(),
                    value: cell.to_string(),
                })
            };
            if i == target_at {
                match task {
                    TaskKind::Regression => numeric_target.push(parse(&header[i])?),
                    TaskKind::Classification => label_target.push(cell.to_string()),
                }
            } else {
                columns[c].push(parse(&header[i])?);
                c += 1;
            }
        }
    }
    let target = match task {
        TaskKind::Regression => Target::Numeric(numeric_target),
        TaskKind::Classification => Target::Labels(label_target),
    };
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Dataset::new(name, feature_names, columns, target)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Seeded Fisher–Yates shuffle; the first `floor(train_ratio * n)` shuffled rows train.
pub fn split(data: &Dataset, train_ratio: f64, seed: u64) -> Result<SplitPair, DataError> {
    let n = data.n_rows();
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(DataError::BadSplit(format!("train ratio {train_ratio} must lie strictly between 0 and 1")));
    }
    // small slack so that e.g. 0.7 * 10 lands on 7 even when the product rounds down
    let n_train = (train_ratio * n as f64 + 1e-9).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(DataError::BadSplit(format!("ratio {train_ratio} on {n} rows leaves one side empty")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(SplitPair { train: data.select_rows(&perm[..n_train]), test: data.select_rows(&perm[n_train..]), seed })
}

/// Appends one column per recipe entry, evaluated row-wise on the original features.
pub fn augment(data: &Dataset, recipe: &FeatureRecipe) -> Result<Dataset, DataError> {
    recipe.validate(data.feature_names()).map_err(DataError::Recipe)?;
    let mut names = data.feature_names.clone();
    let mut columns = data.columns.clone();
    for e in &recipe.entries {
        let col = eval_column(&e.expression, data).map_err(|err| {
            DataError::Recipe(vec![RecipeError::UnknownFeature { entry: e.name.clone(), feature: err.to_string() }])
        })?;
        names.push(e.name.clone());
        columns.push(col);
    }
    let mut out = data.with_features(names, columns)?;
    out.name = data.name.clone();
    Ok(out)
}

/// Plain `key = value` description of a dataset on disk.
///
/// ```text
/// name = concrete
/// csv = concrete.csv
/// target = strength
/// task = regression
/// objective = predict concrete compressive strength
/// features = cement, Blast furnace slag, ...
/// ```
///
/// `csv` is resolved relative to the manifest. `features` is optional; when
/// present it lists the expected feature columns in order and lets prompts be
/// built without the data file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub csv: PathBuf,
    pub target: String,
    pub task: TaskKind,
    pub objective: String,
    pub features: Option<Vec<String>>,
}

impl DatasetManifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<DatasetManifest, DataError> {
        let mut kv = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| DataError::Manifest(format!("line {}: expected 'key = value'", i + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| DataError::Manifest(format!("missing key '{k}'")));
        let name = get("name")?;
        let csv = base_dir.join(get("csv")?);
        let target = get("target")?;
        let task = get("task")?.parse().map_err(DataError::Manifest)?;
        let objective = get("objective")?;
        let features = kv.get("features").map(|s| s.split(',').map(|f| f.trim().to_string()).collect());
        Ok(DatasetManifest { name, csv, target, task, objective, features })
    }

    pub fn load(path: &Path) -> Result<DatasetManifest, DataError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DataError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        DatasetManifest::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Loads the CSV, names the dataset after the manifest, and checks the header against `features`.
    pub fn load_dataset(&self) -> Result<Dataset, DataError> {
        let mut d = load_csv(&self.csv, &self.target, self.task)?;
        if let Some(expected) = &self.features {
            if expected != d.feature_names() {
                return Err(DataError::HeaderMismatch { expected: expected.clone(), found: d.feature_names.clone() });
            }
        }
        d.name = self.name.clone();
        Ok(d)
    }

    /// Feature names from the manifest, falling back to the CSV header.
    pub fn feature_names(&self) -> Result<Vec<String>, DataError> {
        match &self.features {
            Some(f) => Ok(f.clone()),
            None => Ok(self.load_dataset()?.feature_names),
        }
    }
}
