use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cell index {j} out of range for {cells} cells")]
    InvalidCell { j: usize, cells: usize },

    #[error("site ({x1}, {x2}) outside lattice of {d} sites")]
    OutOfRange { x1: usize, x2: usize, d: usize },

    #[error("no recurrence found up to t = {t_max}; best candidate t = {best_time} with value {best_value}")]
    NoRecurrence {
        t_max: f64,
        best_time: f64,
        best_value: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigensolver did not converge")]
    Eigensolver,

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with [`Error::Domain`] unless `value > 0`.
pub(crate) fn positive<T: crate::Real>(what: &'static str, value: T) -> Result<()> {
    if value > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: value.to_f64_lossy(),
        })
    }
}
