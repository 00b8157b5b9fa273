use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("confounder matrix is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficientZ { rank: usize, cols: usize },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("weighted chi-square series did not reach mass 1 - {tol:e} within {max_terms} terms (weight ratio {ratio:e})")]
    SeriesStall { max_terms: usize, tol: f64, ratio: f64 },

    #[error("vector does not majorize the reference spectrum (partial sum {index} short by {deficit:e})")]
    NotMajorizing { index: usize, deficit: f64 },

    #[error("value {value} outside of range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("no feasible majorizing vector at level {level} (range [{lo}, {hi}])")]
    Infeasible { level: f64, lo: f64, hi: f64 },

    #[error("closed testing enumeration over {size} free features exceeds the cap of {cap}; raise --oracle-cap or use the shortcut")]
    CapExceeded { size: usize, cap: usize },

    #[error("log2 normalization requires strictly positive values; offending columns: {}", .0.join(", "))]
    NonPositiveForLog2(Vec<String>),

    #[error("response column `{column}` is not binary: {detail}")]
    NonBinaryResponse { column: String, detail: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("duplicate pathway name `{0}`")]
    DuplicatePathwayName(String),

    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
