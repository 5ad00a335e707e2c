use std::fmt;

/// Errors raised while reading dataset and checkpoint files.
///
/// Every variant names the 1-based line (text formats) or record index
/// (binary formats) where parsing stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    MalformedHeader { line: usize, msg: String },
    Truncated { line: usize, expected: String },
    BadToken { line: usize, token: String },
    EdgeOutOfRange { line: usize, index: usize, n: usize },
    LabelOutOfRange { line: usize, label: usize, classes: usize },
    FeatureCount { line: usize, expected: usize, found: usize },
    BadMagic { expected: String },
    UnsupportedVersion(u8),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::MalformedHeader { line, msg } => {
                write!(f, "line {line}: malformed header: {msg}")
            }
            ParseError::Truncated { line, expected } => {
                write!(f, "line {line}: unexpected end of input, expected {expected}")
            }
            ParseError::BadToken { line, token } => {
                write!(f, "line {line}: cannot parse token {token:?}")
            }
            ParseError::EdgeOutOfRange { line, index, n } => {
                write!(f, "line {line}: edge endpoint {index} out of range for {n} nodes")
            }
            ParseError::LabelOutOfRange { line, label, classes } => {
                write!(f, "line {line}: label {label} is not below class count {classes}")
            }
            ParseError::FeatureCount { line, expected, found } => {
                write!(f, "line {line}: expected {expected} feature values, found {found}")
            }
            ParseError::BadMagic { expected } => write!(f, "bad magic, expected {expected:?}"),
            ParseError::UnsupportedVersion(v) => write!(f, "unsupported format version {v}"),
        }
    }
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MalformedHeader { line, .. }
            | ParseError::Truncated { line, .. }
            | ParseError::BadToken { line, .. }
            | ParseError::EdgeOutOfRange { line, .. }
            | ParseError::LabelOutOfRange { line, .. }
            | ParseError::FeatureCount { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {bound}")]
    OutOfRange { index: usize, bound: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("row {0} has zero degree; cannot normalize")]
    DegenerateDegree(usize),

    #[error("measure undefined: {0}")]
    UndefinedMeasure(String),

    #[error("class {0} has zero total degree")]
    DegenerateClass(usize),

    #[error("matrix is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}")]
    Asymmetric { row: usize, col: usize, diff: f64 },

    #[error("dense spectrum is limited to {max} nodes, got {n}")]
    SpectrumTooLarge { n: usize, max: usize },

    #[error("insufficient spectrum: {have} of {need} eigenvalues available")]
    InsufficientSpectrum { have: usize, need: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("parse error: {0}")]
    Parse(ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
