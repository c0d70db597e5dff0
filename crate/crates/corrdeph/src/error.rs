use thiserror::Error;

/// Errors raised by kernel construction, state construction, rate
/// evaluation, simulation, and output emission.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel parameter: {0}")]
    InvalidKernel(String),

    #[error("invalid array: {0}")]
    InvalidArray(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state requires an even number of ions, got n = {0}")]
    OddIonCount(usize),

    #[error("coherence pair has length {pair} but array has {array} sites")]
    LengthMismatch { pair: usize, array: usize },

    #[error("kernel matrix is not admissible: minimum eigenvalue {min_eigenvalue:e}")]
    InadmissibleKernel { min_eigenvalue: f64 },

    #[error("Hilbert-space dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("integration step too coarse: h*|generator| = {0:.3} > 0.1; use a finer time grid")]
    StepTooCoarse(f64),

    #[error("total duration T = {t_total} is shorter than one interrogation time {t_opt}")]
    InfeasibleHorizon { t_total: f64, t_opt: f64 },

    #[error("invalid metrology input: {0}")]
    InvalidMetrology(String),

    #[error("invalid sweep specification: {0}")]
    InvalidSweep(String),

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
