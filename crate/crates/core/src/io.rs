//! Delimited data tables, set collections and result tables.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bnb::{CollectionRow, NamedSet, RowOutcome};
use crate::error::{Error, Result};
use crate::linmodel::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    None,
    Log2,
    Glog,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::Log2 => "log2",
            Normalization::Glog => "glog",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "log2" => Ok(Normalization::Log2),
            "glog" => Ok(Normalization::Glog),
            other => Err(Error::InvalidInput(format!(
                "unknown normalization `{other}` (expected none, log2 or glog)"
            ))),
        }
    }
}

pub const GLOG_A: f64 = 1.0;

/// `log₂((x + √(x² + a²)) / 2)` with `a = 1`.
pub fn glog(x: f64) -> f64 {
    ((x + x.hypot(GLOG_A)) / 2.0).log2()
}

/// Header plus string cells, as read from a delimited file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Tab-delimited if the header line contains a tab, comma-delimited
    /// otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let header = text.lines().next().ok_or_else(|| Error::Parse("empty table".into()))?;
        let delimiter = if header.contains('\t') { b'\t' } else { b',' };
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .flexible(true)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut seen = HashSet::new();
        for h in &headers {
            if h.is_empty() {
                return Err(Error::MalformedLine { line: 1, reason: "empty column name".into() });
            }
            if !seen.insert(h.as_str()) {
                return Err(Error::MalformedLine { line: 1, reason: format!("duplicate column `{h}`") });
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != headers.len() {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("expected {} fields, found {}", headers.len(), record.len()),
                });
            }
            let row: Vec<String> = record.iter().map(|c| c.trim().to_string()).collect();
            if let Some(j) = row.iter().position(|c| c.is_empty()) {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("empty cell in column `{}`", headers[j]),
                });
            }
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    fn numeric_column(&self, j: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[j].parse::<f64>().map_err(|_| Error::MalformedLine {
                    line: r + 2,
                    reason: format!("`{}` in column `{}` is not a number", row[j], self.headers[j]),
                })
            })
            .collect()
    }
}

/// Response labels in the order they were coded: `labels[0] ↦ 0`,
/// `labels[1] ↦ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResponseMapping {
    pub column: String,
    pub labels: [String; 2],
}

impl fmt::Display for ResponseMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}=0, {}=1", self.column, self.labels[0], self.labels[1])
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub mapping: ResponseMapping,
    pub normalization: Normalization,
}

/// Builds a dataset from a table. The first column holds sample ids when it
/// is neither response nor confounder and has a non-numeric cell; every other
/// column that is not the response or a confounder is a feature.
pub fn load_dataset(
    table: &RawTable,
    response: &str,
    confounders: &[String],
    normalization: Normalization,
) -> Result<LoadedDataset> {
    let resp = table.column(response)?;
    let conf: Vec<usize> = confounders.iter().map(|c| table.column(c)).collect::<Result<_>>()?;
    if conf.contains(&resp) {
        return Err(Error::InvalidInput(format!("`{response}` is both response and confounder")));
    }
    let n = table.rows.len();
    let id_col = (resp != 0
        && !conf.contains(&0)
        && table.rows.iter().any(|r| r[0].parse::<f64>().is_err()))
    .then_some(0);
    let features: Vec<usize> = (0..table.headers.len())
        .filter(|j| *j != resp && !conf.contains(j) && Some(*j) != id_col)
        .collect();
    if features.is_empty() {
        return Err(Error::InvalidInput("no feature columns".into()));
    }

    let (y, mapping) = code_response(table, resp)?;
    let mut z = DMatrix::from_element(n, conf.len() + 1, 1.0);
    for (k, &j) in conf.iter().enumerate() {
        z.set_column(k + 1, &nalgebra::DVector::from_vec(table.numeric_column(j)?));
    }
    let mut x = DMatrix::zeros(n, features.len());
    let mut nonpositive = Vec::new();
    for (k, &j) in features.iter().enumerate() {
        let col = table.numeric_column(j)?;
        if normalization == Normalization::Log2 && col.iter().any(|&v| v <= 0.0) {
            nonpositive.push(table.headers[j].clone());
            continue;
        }
        for (i, v) in col.into_iter().enumerate() {
            x[(i, k)] = match normalization {
                Normalization::None => v,
                Normalization::Log2 => v.log2(),
                Normalization::Glog => glog(v),
            };
        }
    }
    if !nonpositive.is_empty() {
        return Err(Error::NonPositiveForLog2(nonpositive));
    }
    let sample_ids = match id_col {
        Some(j) => table.rows.iter().map(|r| r[j].clone()).collect(),
        None => (1..=n).map(|i| i.to_string()).collect(),
    };
    let names = features.iter().map(|&j| table.headers[j].clone()).collect();
    Ok(LoadedDataset {
        dataset: Dataset::new(y, z, x, names, sample_ids)?,
        mapping,
        normalization,
    })
}

fn code_response(table: &RawTable, j: usize) -> Result<(Vec<f64>, ResponseMapping)> {
    let column = table.headers[j].clone();
    let mut labels: Vec<&str> = Vec::new();
    for row in &table.rows {
        if !labels.contains(&row[j].as_str()) {
            labels.push(&row[j]);
        }
    }
    if labels.len() != 2 {
        return Err(Error::NonBinaryResponse {
            column,
            detail: format!("found {} distinct values", labels.len()),
        });
    }
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse::<f64>().ok()).collect();
    if let Some(v) = numeric {
        if v.contains(&0.0) && v.contains(&1.0) && v[0] == 1.0 {
            labels.swap(0, 1);
        }
    }
    let y = table.rows.iter().map(|r| if r[j] == labels[0] { 0.0 } else { 1.0 }).collect();
    let mapping = ResponseMapping {
        column,
        labels: [labels[0].to_string(), labels[1].to_string()],
    };
    Ok((y, mapping))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pathway {
    pub name: String,
    pub description: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathwayCollection {
    pub pathways: Vec<Pathway>,
}

/// How one pathway's members matched the dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub name: String,
    pub found: Vec<String>,
    pub missing: Vec<String>,
}

impl PathwayCollection {
    pub fn len(&self) -> usize {
        self.pathways.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pathways.is_empty()
    }

    pub fn resolution(&self, feature_names: &[String]) -> Vec<Resolution> {
        let known: HashSet<&str> = feature_names.iter().map(String::as_str).collect();
        self.pathways
            .iter()
            .map(|p| {
                let (found, missing) = p.members.iter().cloned().partition(|m| known.contains(m.as_str()));
                Resolution {
                    name: p.name.clone(),
                    found,
                    missing,
                }
            })
            .collect()
    }

    /// Pathways as index sets; unknown members are dropped.
    pub fn to_named_sets(&self, dataset: &Dataset) -> Vec<NamedSet> {
        self.pathways
            .iter()
            .map(|p| NamedSet {
                name: p.name.clone(),
                size: p.members.len(),
                members: crate::sets::normalize(p.members.iter().filter_map(|m| dataset.feature_index(m)).collect()),
            })
            .collect()
    }
}

pub fn load_pathways(path: impl AsRef<Path>) -> Result<PathwayCollection> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_pathways(std::io::BufReader::new(file))
}

/// One pathway per line: name, description, members, tab-separated.
/// Blank lines are ignored.
pub fn read_pathways(reader: impl BufRead) -> Result<PathwayCollection> {
    let mut pathways = Vec::new();
    let mut names = HashSet::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let name = fields.next().unwrap_or("").trim();
        let Some(description) = fields.next() else {
            return Err(Error::MalformedLine {
                line: k + 1,
                reason: "expected name and description separated by a tab".into(),
            });
        };
        if name.is_empty() {
            return Err(Error::MalformedLine { line: k + 1, reason: "empty pathway name".into() });
        }
        if !names.insert(name.to_string()) {
            return Err(Error::DuplicatePathwayName(name.to_string()));
        }
        let mut members: Vec<String> = Vec::new();
        for m in fields.map(str::trim).filter(|m| !m.is_empty()) {
            if !members.iter().any(|x| x == m) {
                members.push(m.to_string());
            }
        }
        pathways.push(Pathway {
            name: name.to_string(),
            description: description.trim().to_string(),
            members,
        });
    }
    Ok(PathwayCollection { pathways })
}

pub fn write_pathways(collection: &PathwayCollection, mut out: impl Write) -> Result<()> {
    for p in &collection.pathways {
        write!(out, "{}\t{}", p.name, p.description)?;
        for m in &p.members {
            write!(out, "\t{m}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Settings echoed alongside results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub alpha: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub trunc_tol: f64,
    pub seed: Option<u64>,
    pub normalization: Normalization,
    pub response_mapping: Option<ResponseMapping>,
}

pub const RESULT_COLUMNS: [&str; 9] = [
    "set_name",
    "size",
    "resolved_size",
    "level",
    "statistic",
    "critical_value_root",
    "decision",
    "iterations_used",
    "witness_or_empty",
];

/// One result row in output form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub set_name: String,
    pub size: usize,
    pub resolved_size: usize,
    pub level: Option<f64>,
    pub statistic: Option<f64>,
    pub critical_value_root: Option<f64>,
    pub decision: String,
    pub iterations_used: Option<usize>,
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResultRecord {
    pub fn from_row(row: &CollectionRow, feature_names: &[String]) -> Self {
        let mut rec = ResultRecord {
            set_name: row.name.clone(),
            size: row.size,
            resolved_size: row.resolved.len(),
            level: None,
            statistic: None,
            critical_value_root: None,
            decision: String::new(),
            iterations_used: None,
            witness: None,
            note: None,
        };
        match &row.outcome {
            RowOutcome::Done(r) => {
                rec.level = Some(r.level);
                rec.statistic = Some(r.statistic);
                rec.critical_value_root = Some(r.critical_value);
                rec.decision = r.result.decision.as_str().to_string();
                rec.iterations_used = Some(r.result.iterations_used);
                rec.witness = r
                    .result
                    .witness
                    .as_ref()
                    .map(|w| w.iter().map(|&i| feature_names[i].clone()).collect());
            }
            RowOutcome::Skipped(reason) => {
                rec.decision = "skipped".into();
                rec.note = Some(reason.clone());
            }
            RowOutcome::Failed(e) => {
                rec.decision = "error".into();
                rec.note = Some(e.to_string());
            }
        }
        rec
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_results_tsv(records: &[ResultRecord], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    for r in records {
        w.write_record([
            r.set_name.clone(),
            r.size.to_string(),
            r.resolved_size.to_string(),
            opt(r.level),
            opt(r.statistic),
            opt(r.critical_value_root),
            r.decision.clone(),
            opt(r.iterations_used),
            r.witness.as_ref().map(|w| w.join(";")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonResults<'a> {
    config: &'a RunMetadata,
    results: &'a [ResultRecord],
}

pub fn write_results_json(meta: &RunMetadata, records: &[ResultRecord], mut out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &JsonResults { config: meta, results: records })
        .map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
