use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("part measures sum to {0}, expected 1")]
    MeasureSum(String),
    #[error("block values are not symmetric at ({0},{1})")]
    Asymmetry(usize, usize),
    #[error("value {0} out of range")]
    Range(String),
    #[error("intervals do not form one contiguous interval")]
    NonContiguous,
    #[error("index out of range: {0}")]
    Index(String),
    #[error("overlapping intervals or tiles: {0}")]
    Overlap(String),
    #[error("partition does not cover [0,1): {0}")]
    Coverage(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("root tuple is not feasible: {0}")]
    InfeasibleRoots(String),
    #[error("decoration has measure zero: {0}")]
    EmptyDecoration(String),
    #[error("no feasible root tuple found after {0} draws")]
    FeasibilitySampling(u64),
    #[error("unknown suite: {0:?}")]
    UnknownSuite(String),
    #[error("unknown part: {0}")]
    UnknownPart(String),
    #[error("terms are not compatible: {0}")]
    Incompatible(String),
    #[error("a non-null set has degree {0} >= 1")]
    DegreeOne(String),
    #[error("balancing value out of range in part {part}: {value}")]
    BalanceRange { part: String, value: f64 },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("graphon lacks the expected block layout: {0}")]
    Layout(String),
    #[error("newton iteration did not converge: {0}")]
    NewtonDivergence(String),
    #[error("no linearly independent family after {0} trials")]
    RankFailure(usize),
    #[error("map is not measure preserving: {0}")]
    NotMeasurePreserving(String),
    #[error("pushforward precheck failed: {0}")]
    Precheck(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::parse(e.column(), e.to_string())
    }
}
