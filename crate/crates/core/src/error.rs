use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid preset parameters for `{name}`: {reason}")]
    PresetParams { name: String, reason: String },
    #[error("expression error at offset {offset}: {message}")]
    Expr { offset: usize, message: String },
    #[error("definition file line {line}: {message}")]
    Definition { line: usize, message: String },
    #[error("difference order must be a positive integer, got {0}")]
    DiffOrder(i64),
    #[error("invalid rectangle: {0}")]
    Rect(String),
    #[error(
        "kernel singular at x = {x} for r = {r}: |sin(r x / 2)| below {floor:e}, nearest excluded point 2*{l}*pi/{r} = {nearest}"
    )]
    Singular { x: f64, r: i64, l: i64, nearest: f64, floor: f64 },
    #[error("kernel bound check is only available for r = 2 (got r = {0})")]
    KernelBoundOrder(u32),
    #[error("horizon {horizon} is below the scan start {start}")]
    HorizonBelowScanStart { horizon: u64, start: u64 },
    #[error("lambda {0} is too small for this family")]
    Lambda(u64),
    #[error("index {index} outside the domain of the class (needs >= {min})")]
    Domain { index: u64, min: u64 },
    #[error("negative or complex coefficient at ({j}, {k}); this check needs a nonnegative sequence")]
    Negative { j: u64, k: u64 },
    #[error("no eta found up to cap {cap}")]
    EtaNotFound { cap: u64 },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("report output failed: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
