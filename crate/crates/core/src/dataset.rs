//! Categorical datasets: schemas, CSV ingestion, equal-frequency binning and
//! train/test/fold splitting.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Predictor,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    pub states: Vec<String>,
    pub role: Role,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, states: &[&str], role: Role) -> Self {
        VariableSpec {
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
            role,
        }
    }

    /// Variable whose states are the labels `1..=r`.
    pub fn numbered(name: impl Into<String>, r: usize, role: Role) -> Self {
        VariableSpec {
            name: name.into(),
            states: (1..=r).map(|i| i.to_string()).collect(),
            role,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// Numeric value of a state: its label when it parses as a number,
    /// otherwise the 1-based position.
    pub fn numeric_value(&self, state: usize) -> f64 {
        self.states[state]
            .trim()
            .parse::<f64>()
            .unwrap_or((state + 1) as f64)
    }
}

/// Ordered list of variables with exactly one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    variables: Vec<VariableSpec>,
    target: usize,
}

impl Schema {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if v.name.is_empty() || v.name.contains(char::is_whitespace) {
                return Err(Error::Schema(format!("invalid variable name `{}`", v.name)));
            }
            if seen.insert(v.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate variable `{}`", v.name)));
            }
            if v.states.len() < 2 {
                return Err(Error::Schema(format!(
                    "variable `{}` needs at least 2 states",
                    v.name
                )));
            }
            let mut labels: Vec<&String> = v.states.iter().collect();
            labels.sort();
            labels.dedup();
            if labels.len() != v.states.len() {
                return Err(Error::Schema(format!(
                    "variable `{}` has duplicate state labels",
                    v.name
                )));
            }
        }
        let targets: Vec<usize> = variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.role == Role::Target)
            .map(|(i, _)| i)
            .collect();
        if targets.len() != 1 {
            return Err(Error::Schema(format!(
                "exactly one target variable required, found {}",
                targets.len()
            )));
        }
        Ok(Schema {
            target: targets[0],
            variables,
        })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &VariableSpec {
        &self.variables[self.target]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn variable(&self, name: &str) -> Option<&VariableSpec> {
        self.index_of(name).map(|i| &self.variables[i])
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality()).collect()
    }

    /// Sub-schema over `names`, in the given order. The target must be kept.
    pub fn project(&self, names: &[String]) -> Result<Schema> {
        let vars = names
            .iter()
            .map(|n| self.require(n).map(|i| self.variables[i].clone()))
            .collect::<Result<Vec<_>>>()?;
        Schema::new(vars)
    }

    /// Parses the line format `name : s1|s2|... [target]`.
    pub fn parse(text: &str, origin: &str) -> Result<Schema> {
        let mut vars = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (name, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(origin, lineno + 1, "expected `name : states`"))?;
            let mut rest = rest.trim();
            let mut role = Role::Predictor;
            if let Some(stripped) = rest.strip_suffix("[target]") {
                role = Role::Target;
                rest = stripped.trim_end();
            }
            let states: Vec<String> = rest.split('|').map(|s| s.trim().to_string()).collect();
            if states.iter().any(|s| s.is_empty()) {
                return Err(Error::parse(origin, lineno + 1, "empty state label"));
            }
            vars.push(VariableSpec {
                name: name.trim().to_string(),
                states,
                role,
            });
        }
        Schema::new(vars)
    }

    pub fn from_file(path: &Path) -> Result<Schema> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.variables {
            let _ = write!(out, "{} : {}", v.name, v.states.join("|"));
            if v.role == Role::Target {
                out.push_str(" [target]");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// Fully observed categorical records. Cells hold state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Vec<usize>>,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<Vec<usize>>) -> Result<Self> {
        let cards = schema.cardinalities();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cards.len() {
                return Err(Error::Invalid(format!(
                    "row {r} has {} cells, schema has {} variables",
                    row.len(),
                    cards.len()
                )));
            }
            for (c, (&cell, &card)) in row.iter().zip(&cards).enumerate() {
                if cell >= card {
                    return Err(Error::UnknownState {
                        variable: schema.variables[c].name.clone(),
                        value: cell.to_string(),
                        row: r,
                    });
                }
            }
        }
        Ok(Dataset { schema, rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_vars(&self) -> usize {
        self.schema.len()
    }

    pub fn column(&self, col: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[col]).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Keeps only the named variables, in the given order.
    pub fn project(&self, names: &[String]) -> Result<Dataset> {
        let schema = self.schema.project(names)?;
        let cols: Vec<usize> = names
            .iter()
            .map(|n| self.schema.require(n))
            .collect::<Result<_>>()?;
        let rows = self
            .rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c]).collect())
            .collect();
        Ok(Dataset { schema, rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.schema.variables.iter().map(|v| v.name.as_str()))?;
        for row in &self.rows {
            w.write_record(
                row.iter()
                    .zip(&self.schema.variables)
                    .map(|(&s, v)| v.states[s].as_str()),
            )?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub trim: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            trim: true,
        }
    }
}

pub fn ingest_csv(path: &Path, schema: &Schema, options: &CsvOptions) -> Result<Dataset> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(f, schema, options)
}

/// Maps columns by header name; extra columns are ignored with a warning.
pub fn read_csv<R: Read>(input: R, schema: &Schema, options: &CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .trim(if options.trim {
            csv::Trim::All
        } else {
            csv::Trim::None
        })
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.is_empty() {
        return Err(Error::Empty("csv file has no header".into()));
    }
    let mut col_of = Vec::with_capacity(schema.len());
    for v in schema.variables() {
        let col = header
            .iter()
            .position(|h| h == v.name)
            .ok_or_else(|| Error::MissingColumn(v.name.clone()))?;
        col_of.push(col);
    }
    for h in header.iter() {
        if schema.index_of(h).is_none() {
            log::warn!("ignoring column `{h}` not present in schema");
        }
    }
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(schema.len());
        for (v, &c) in schema.variables().iter().zip(&col_of) {
            let cell = rec.get(c).unwrap_or("");
            let s = v.state_index(cell).ok_or_else(|| Error::UnknownState {
                variable: v.name.clone(),
                value: cell.to_string(),
                row: r,
            })?;
            row.push(s);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty("csv file has no records".into()));
    }
    Dataset::new(schema.clone(), rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinDirection {
    Ascending,
    /// Bucket 1 holds the largest values.
    Descending,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    pub thresholds: Vec<f64>,
    /// Bucket numbers in `1..=k`.
    pub labels: Vec<usize>,
}

/// Equal-frequency binning at type-1 empirical quantiles `i/k`.
/// A value equal to a cut point falls into the lower bucket.
pub fn discretize_equal_frequency(
    values: &[f64],
    k: usize,
    direction: BinDirection,
) -> Result<Binning> {
    if values.is_empty() {
        return Err(Error::Empty("no values to discretize".into()));
    }
    if k < 2 {
        return Err(Error::Invalid("bucket count must be at least 2".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite value in binning input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if k > distinct.len() {
        return Err(Error::DegenerateBinning {
            buckets: k,
            distinct: distinct.len(),
        });
    }
    let n = sorted.len();
    let thresholds: Vec<f64> = (1..k)
        .map(|i| {
            // smallest order statistic x_(j) with j >= n*i/k
            let j = (n * i).div_ceil(k);
            sorted[j.max(1) - 1]
        })
        .collect();
    let labels = apply_thresholds(values, &thresholds, direction);
    Ok(Binning { thresholds, labels })
}

/// Buckets values against externally supplied ascending cut points.
pub fn apply_thresholds(values: &[f64], thresholds: &[f64], direction: BinDirection) -> Vec<usize> {
    let k = thresholds.len() + 1;
    values
        .iter()
        .map(|&v| {
            let asc = thresholds.iter().take_while(|&&t| v > t).count() + 1;
            match direction {
                BinDirection::Ascending => asc,
                BinDirection::Descending => k + 1 - asc,
            }
        })
        .collect()
}

/// Row assignment for hold-out testing and cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub seed: u64,
    pub test_fraction: f64,
    pub fold_count: usize,
    pub fold_size: usize,
    pub n: usize,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub folds: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    Test,
    Fold(usize),
    TrainOnly,
}

impl SplitPlan {
    /// Training rows with fold `i` removed.
    pub fn fold_train(&self, i: usize) -> Vec<usize> {
        let mut fold = self.folds[i].clone();
        fold.sort_unstable();
        self.train_idx
            .iter()
            .copied()
            .filter(|r| fold.binary_search(r).is_err())
            .collect()
    }

    pub fn assignments(&self) -> Vec<Assignment> {
        let mut out = vec![Assignment::TrainOnly; self.n];
        for &t in &self.test_idx {
            out[t] = Assignment::Test;
        }
        for (f, fold) in self.folds.iter().enumerate() {
            for &r in fold {
                out[r] = Assignment::Fold(f + 1);
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row_index", "assignment"])?;
        for (i, a) in self.assignments().iter().enumerate() {
            let label = match a {
                Assignment::Test => "test".to_string(),
                Assignment::Fold(f) => format!("fold_{f}"),
                Assignment::TrainOnly => "train_only".to_string(),
            };
            w.write_record([i.to_string(), label])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Rebuilds a plan from its CSV form. Fraction and seed are not stored
    /// in the file and must be supplied.
    pub fn read_csv<R: Read>(input: R, seed: u64, test_fraction: f64) -> Result<SplitPlan> {
        let mut r = csv::Reader::from_reader(input);
        let mut test = Vec::new();
        let mut train = Vec::new();
        let mut folds: Vec<Vec<usize>> = Vec::new();
        let mut n = 0;
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = || Error::parse("split csv", line + 2, "malformed row");
            let idx: usize = rec.get(0).ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let label = rec.get(1).ok_or_else(bad)?;
            n = n.max(idx + 1);
            match label {
                "test" => test.push(idx),
                "train_only" => train.push(idx),
                other => {
                    let f: usize = other
                        .strip_prefix("fold_")
                        .and_then(|s| s.parse().ok())
                        .filter(|&f| f >= 1)
                        .ok_or_else(bad)?;
                    if folds.len() < f {
                        folds.resize(f, Vec::new());
                    }
                    folds[f - 1].push(idx);
                    train.push(idx);
                }
            }
        }
        train.sort_unstable();
        let fold_size = folds.first().map_or(0, Vec::len);
        Ok(SplitPlan {
            seed,
            test_fraction,
            fold_count: folds.len(),
            fold_size,
            n,
            train_idx: train,
            test_idx: test,
            folds,
        })
    }
}

/// Deterministic hold-out split plus `fold_count` validation folds drawn
/// without replacement from the training rows. Fold size is
/// `round(fold_fraction * n)`, a fraction of the full dataset.
pub fn make_split(
    n: usize,
    test_fraction: f64,
    fold_count: usize,
    fold_fraction: f64,
    seed: u64,
) -> Result<SplitPlan> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "test fraction {test_fraction} outside (0,1)"
        )));
    }
    if fold_count < 2 {
        return Err(Error::InvalidSplit("fold count must be at least 2".into()));
    }
    if !(fold_fraction > 0.0 && fold_fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "fold fraction {fold_fraction} outside (0,1)"
        )));
    }
    let test_size = (test_fraction * n as f64).round() as usize;
    let fold_size = (fold_fraction * n as f64).round() as usize;
    let train_size = n - test_size.min(n);
    if fold_size == 0 {
        return Err(Error::InvalidSplit("fold size rounds to zero".into()));
    }
    if fold_count * fold_size > train_size {
        return Err(Error::InvalidSplit(format!(
            "{fold_count} folds of {fold_size} rows do not fit in {train_size} training rows"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut test_idx = perm[..test_size].to_vec();
    let mut train_idx = perm[test_size..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();

    let mut pool = train_idx.clone();
    pool.shuffle(&mut rng);
    let folds = pool
        .chunks(fold_size)
        .take(fold_count)
        .map(|c| {
            let mut f = c.to_vec();
            f.sort_unstable();
            f
        })
        .collect();
    Ok(SplitPlan {
        seed,
        test_fraction,
        fold_count,
        fold_size,
        n,
        train_idx,
        test_idx,
        folds,
    })
}
