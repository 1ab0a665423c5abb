use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown atom `{name}` at {line}:{col}")]
    UnknownAtom { name: String, line: usize, col: usize },

    #[error("atom `{name}` takes {expected} argument(s), got {found} (at {line}:{col})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },

    #[error("unbound constant `{0}`")]
    UnboundConstant(String),

    #[error("unknown constant `{0}`")]
    UnknownConstant(String),

    #[error("missing context field `{0}`")]
    MissingContext(String),

    #[error("map has no {0}")]
    MissingFeature(&'static str),

    #[error("step index {index} out of range for trace of length {len}")]
    StepOutOfRange { index: usize, len: usize },

    #[error("lateral position {y:.3} m is off the road")]
    OffRoad { y: f64 },

    #[error("lane {0} does not exist on this map")]
    NoSuchLane(i64),

    #[error("hermite parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("prediction covers {have} steps, horizon needs {need}")]
    PredictionTooShort { have: usize, need: usize },

    #[error("candidate does not continue the history: {0}")]
    Misaligned(String),

    #[error("no legal candidate and the trajectory buffer is empty")]
    BufferExhausted,

    #[error("buffered trajectory no longer satisfies the law: {0}")]
    BufferIllegal(String),

    #[error("script ends at {end:.2} s, requested {requested:.2} s")]
    ScriptExhausted { end: f64, requested: f64 },

    #[error("time step mismatch: plan {plan} s, simulation {sim} s")]
    DtMismatch { plan: f64, sim: f64 },

    #[error("planned point exceeds kinematic limits: {0}")]
    Implausible(String),

    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Format { path: String, line: usize, msg: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
