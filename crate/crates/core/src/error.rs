use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported {family} order {order}")]
    UnsupportedOrder { family: &'static str, order: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    Shape {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("division hazard: symbol modulus {modulus:e} at index {index}")]
    DivisionHazard { index: usize, modulus: f64 },

    #[error("crossover undefined for a constant-modulus constellation")]
    DegenerateCrossover,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("MSE budget {c0:e} is below the achievable floor {floor:e}")]
    Infeasible { c0: f64, floor: f64 },

    #[error("multiplier search failed after {iterations} steps: {detail}")]
    MultiplierSearch { iterations: usize, detail: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
