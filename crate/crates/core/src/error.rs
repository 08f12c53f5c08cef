use std::path::PathBuf;

/// Errors raised by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("amplitude vector is zero")]
    ZeroVector,

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("threshold {value} outside admissible range [{lower}, 1]")]
    ThresholdRange { value: f64, lower: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("operator is not Hermitian: imaginary expectation residue {0:e}")]
    NonHermitian(f64),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no admissible epsilon after {halvings} halvings (A - C below numerical resolution)")]
    EpsilonSearch { halvings: u32 },

    #[error("family verification failed: {0}")]
    FamilyVerification(String),

    #[error("region sampling failed: {0}")]
    RegionSampling(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures that signal mathematical or numerical infeasibility
    /// rather than bad user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EpsilonSearch { .. }
                | Error::RegionSampling(_)
                | Error::SizeCap(_)
                | Error::FamilyVerification(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
