use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hopping range must be at least 1")]
    ZeroRange,

    #[error("offset {offset} lies outside the hopping range [-{range}, {range}]")]
    OffsetOutOfRange { offset: i64, range: usize },

    #[error("root finder did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("characteristic polynomial is identically zero")]
    DegenerateAllZero,

    #[error("no grid cell passed the coarse GBZ filter; the scan window probably misses the spectrum")]
    EmptyCurve,

    #[error("bad size: {0}")]
    BadSize(String),

    #[error("QR iteration stalled while deflating row {row} of {dim}")]
    EigNonConvergence { row: usize, dim: usize },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("hoppings are not one-sided")]
    NotOneSided,

    #[error("force must be nonzero")]
    ZeroForce,

    #[error("monodromy is defective (Wannier-Stark exceptional point); ladder eigenstates coalesce")]
    AtExceptionalPoint,

    #[error("norm reached {norm:e} at t = {time}; step too large or runaway growth")]
    Instability { time: f64, norm: f64 },

    #[error("edge occupancy {occupancy:e} exceeds {limit:e} at t = {time}; lattice too small")]
    EdgeContamination { time: f64, occupancy: f64, limit: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key `{key}` (line {line})")]
    UnknownKey { key: String, line: usize },

    #[error("missing key `{0}`")]
    MissingKey(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::ZeroRange
                | Error::OffsetOutOfRange { .. }
                | Error::EmptyCurve
                | Error::BadSize(_)
                | Error::ZeroForce
                | Error::NotOneSided
                | Error::StepTooLarge { .. }
                | Error::Parse { .. }
                | Error::UnknownKey { .. }
                | Error::MissingKey(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
