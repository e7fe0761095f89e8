use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid register: {0}")]
    Register(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("Gell-Mann index {0} out of range 1..=8")]
    GellMannIndex(usize),
    #[error("need at least {min} neutrinos, got {got}")]
    TooFewNeutrinos { min: usize, got: usize },
    #[error("circuit verification failed: {what} deviates by {deviation:.3e}")]
    Verification { what: String, deviation: f64 },
    #[error("two-qubit synthesis failed: {0}")]
    Synthesis(String),
    #[error("density-matrix path limited to total dimension {cap}, got {dim}")]
    DensityCap { dim: usize, cap: usize },
    #[error("probabilities not normalized (sum {0})")]
    Unnormalized(f64),
    #[error("invalid probability {0}")]
    Probability(f64),
    #[error("initial flavor word is not palindromic: {0}")]
    NotPalindromic(String),
    #[error("no physical outcomes left after post-selection")]
    EmptyPostSelection,
    #[error("missing tomography setting {0:?}")]
    MissingSetting(Vec<usize>),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
