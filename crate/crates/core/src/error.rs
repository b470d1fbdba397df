use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),
    #[error("truncation leakage {leakage:.3e} exceeds {threshold:.1e}")]
    Truncation { leakage: f64, threshold: f64 },
    #[error("grid cannot resolve the interaction: {0}")]
    Resolution(String),
    #[error("refused by cost guard: {0}")]
    CostGuard(String),
    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("fit refused: {0}")]
    Fit(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    Missing(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 contract/validation, 2 missing inputs, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Missing(_) | Error::Io(_) => 2,
            Error::Truncation { .. }
            | Error::NonConvergence { .. }
            | Error::Numerical(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Shape(what()))
    }
}
