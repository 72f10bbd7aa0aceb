use thiserror::Error;

use crate::dataset::FeatureRole;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dataset is invalid: {0:?}")]
    Invalid(Vec<crate::dataset::Violation>),

    #[error("no column has role {0:?}")]
    NoColumnsWithRole(FeatureRole),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{name}` has role {found:?}, expected {expected:?}")]
    WrongRole {
        name: String,
        expected: FeatureRole,
        found: FeatureRole,
    },

    #[error("feature `{0}` is continuous; role detection needs discrete features")]
    ContinuousFeature(String),

    #[error("joint table needs {cells} cells, budget is {budget}")]
    TableTooLarge { cells: u128, budget: u128 },

    #[error("feature index {index} out of range 1..={n}")]
    FeatureIndex { index: usize, n: usize },

    #[error("degenerate features: {}", .0.iter().map(|d| format!("{} ({})", d.feature, d.reason)).collect::<Vec<_>>().join(", "))]
    Degenerate(Vec<DegenerateFeature>),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("context group {0} was not seen during fitting")]
    UnknownGroup(u32),

    #[error("observation has no group tag")]
    MissingGroup,

    #[error("shape mismatch: expected {expected}, got {found}")]
    Shape { expected: usize, found: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateFeature {
    pub feature: String,
    pub reason: String,
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
