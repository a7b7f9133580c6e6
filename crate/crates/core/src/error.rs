use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("channel is not trace preserving (deviation {deviation:.3e})")]
    NotCptp { deviation: f64 },
    #[error("Renyi order {0} out of range")]
    OrderOutOfRange(f64),
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("support condition violated: {0}")]
    SupportViolation(String),
    #[error("CSI marginal mismatch (trace distance {deviation:.3e})")]
    CsiMismatch { deviation: f64 },
    #[error("covertness constraint infeasible: {0}")]
    CovertInfeasible(String),
    #[error("size {requested} exceeds cap {cap}")]
    CapExceeded { requested: u128, cap: u128 },
    #[error("no feasible point in the search grid")]
    EmptyFeasibleSet,
    #[error("no jointly typical bin found")]
    EncodingFailure,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
