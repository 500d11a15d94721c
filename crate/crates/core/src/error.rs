use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("oracle size cap exceeded: {points} points (limit {limit})")]
    SizeCap { points: usize, limit: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(
        "Picard iteration is not contracting on [{start}, {end}] (observed ratio {ratio:.3}); \
         the subinterval length must satisfy 2(k1+1)ρ<1, here 2(k1+1)ρ = {bound:.3}"
    )]
    NonContraction {
        start: f64,
        end: f64,
        ratio: f64,
        bound: f64,
    },
    #[error(
        "Picard iteration did not converge on [{start}, {end}] within {sweeps} sweeps (last difference {residual:e})"
    )]
    NotConverged {
        start: f64,
        end: f64,
        sweeps: usize,
        residual: f64,
    },
    #[error("non-finite state at t = {time}")]
    BlowUp { time: f64 },
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
