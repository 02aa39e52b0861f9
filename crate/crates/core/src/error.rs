use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the interval on which the operation is defined.
    #[error("{quantity} = {value} is outside [{min}, {max}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Free-surface width is zero (empty or completely full section).
    #[error("free-surface width is zero at wetted area {area} (section area {full_area})")]
    DegenerateWidth { area: f64, full_area: f64 },

    /// The water layer fills the pipe, leaving no room for air.
    #[error("air area {air_area} is not positive: the section is pressurized")]
    Pressurized { air_area: f64 },

    /// A layer has no material where the operation needs some.
    #[error("{layer} layer is empty (amount {amount})")]
    EmptyLayer { layer: &'static str, amount: f64 },

    /// Solver produced NaN or infinity.
    #[error("non-finite {field} = {value} in cell {cell}")]
    NonFinite {
        cell: usize,
        field: &'static str,
        value: f64,
    },

    #[error("step limit of {max_steps} reached at t = {t}")]
    StepLimit { max_steps: usize, t: f64 },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A config file entry could not be accepted.
    #[error("line {line}: key `{key}`: {message}")]
    ConfigEntry {
        line: usize,
        key: String,
        message: String,
    },

    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },

    #[error("snapshot mismatch: {0}")]
    Mismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Short machine-readable category, used by the CLI's one-line errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::DegenerateWidth { .. } => "degenerate-width",
            Error::Pressurized { .. } => "pressurized",
            Error::EmptyLayer { .. } => "empty-layer",
            Error::NonFinite { .. } => "non-finite",
            Error::StepLimit { .. } => "step-limit",
            Error::Mesh(_) => "mesh",
            Error::Config(_) | Error::ConfigEntry { .. } => "config",
            Error::UnknownPreset { .. } => "unknown-preset",
            Error::Mismatch(_) => "mismatch",
            Error::Io { .. } | Error::Csv { .. } => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
