use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter combination (bad sizes, non-positive time step, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A physical quantity outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("no bound state below the asymptote for j = {j} (lowest level {energy:.6e} Eh, asymptote {asymptote:.6e} Eh)")]
    Unbound { j: u32, energy: f64, asymptote: f64 },

    #[error("numerical instability: {reason} (max Rayleigh quotient {max_rayleigh:.6e} Eh outside [{e_min:.6e}, {e_max:.6e}])")]
    Instability {
        reason: String,
        max_rayleigh: f64,
        e_min: f64,
        e_max: f64,
    },

    #[error("grid too small: {0:.3e} of the norm on the bound surface reached the absorber")]
    GridTooSmall(f64),

    #[error("observable undefined: {0}")]
    Undefined(&'static str),

    #[error("unit error: {0}")]
    Unit(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
