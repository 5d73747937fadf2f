use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the requested operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("e_q({z}) is within 1e-12 of a pole (factor index {index})")]
    PoleProximity { z: f64, index: u64 },

    #[error("table captures mass {captured}, which is below 1 - {tolerance}")]
    TableMass { captured: f64, tolerance: f64 },

    #[error("table support [{low}, {high}] is not inside [0, {n}]")]
    Support { low: i64, high: i64, n: i64 },

    #[error("drift value f(n) = {f} is outside (0, {n})")]
    DriftRange { f: f64, n: u64 },

    #[error("no root bracket: need n >= 2*mu, got n = {n}, mu = {mu}")]
    Bracket { n: u64, mu: f64 },

    /// A computed quantity disagrees with a case table that must hold
    /// exactly; this points at a numerical bug rather than bad input.
    #[error("numerical consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by the caller's parameters rather than by the
    /// numerics.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::TableMass { .. }
                | Error::Support { .. }
                | Error::DriftRange { .. }
                | Error::Bracket { .. }
        )
    }
}
