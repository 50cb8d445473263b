use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("degenerate geometry: user {user} landed on the transmitter {attempts} times")]
    DegenerateGeometry { user: usize, attempts: usize },

    #[error("degenerate combination of beamforming directions for user {0}")]
    DegenerateCombination(usize),

    #[error("SINR targets are infeasible for the given directions: {0}")]
    DirectionInfeasible(String),

    #[error("no root found for the power-splitting system: {0}")]
    NoRoot(String),

    #[error("every grid point of the weight search was infeasible")]
    SearchInfeasible,

    #[error("baseline not supported: {0}")]
    UnsupportedBaseline(String),

    #[error("problem is infeasible: SINR targets cannot be met within the power budget")]
    Infeasible,

    #[error("conic solver failed: {0}")]
    Solver(String),

    /// `trace` holds the search history as JSON lines.
    #[error("golden-section search exceeded {limit} iterations (bound {bound})")]
    AlgorithmFailure { limit: usize, bound: i64, trace: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
