use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("no convergence after {iterations} iterations (last defect {defect:.3e})")]
    Convergence { iterations: usize, defect: f64 },
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("bracket: f(lo)={flo:.3e} and f(hi)={fhi:.3e} share a sign")]
    Bracket { flo: f64, fhi: f64 },
    #[error("fit: condition number {cond:.3e} above {limit:.1e}")]
    Fit { cond: f64, limit: f64 },
    #[error("coverage: {0}")]
    Coverage(String),
    #[error("resonance at n={n}: denominator {value:.3e}")]
    Resonance { n: usize, value: f64 },
    #[error("alignment: {0}")]
    Alignment(String),
}

impl Error {
    /// Process exit status for the CLI: 1 usage, 2 convergence, 3 accuracy, 4 domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Convergence { .. } => 2,
            Error::Accuracy(_)
            | Error::Resolution(_)
            | Error::Fit { .. }
            | Error::Coverage(_)
            | Error::Alignment(_) => 3,
            Error::Domain(_) | Error::Bracket { .. } | Error::Resonance { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
