use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("no feasible counting backend for n={n}, l={l}")]
    NoBackend { n: u32, l: usize },

    #[error("switching step {step} rejected: {constraint}")]
    SwitchChoice { step: usize, constraint: String },

    #[error(
        "zero-count exclusion fraction {fraction:.4} exceeds threshold {threshold:.4} \
         ({excluded} of {trials} trials)"
    )]
    ZeroExclusion {
        fraction: f64,
        threshold: f64,
        excluded: usize,
        trials: usize,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn cap(msg: impl Into<String>) -> Self {
        Error::CapExceeded(msg.into())
    }

    /// Process exit code for the CLI: 2 validation, 3 cap/backend, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::SwitchChoice { .. } | Error::ZeroExclusion { .. } => 2,
            Error::CapExceeded(_) | Error::NoBackend { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}
