use core::fmt;

use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(Reason),

    #[error("numerical failure: {what} (residual {residual:e})")]
    NumericalFailure { what: &'static str, residual: f64 },

    #[error("derivative undefined: ground state degenerate at h = {h}")]
    DerivativeUndefined { h: f64 },

    #[error("internal consistency violated: {what} (value {value:e})")]
    InternalConsistency { what: &'static str, value: f64 },

    #[error("invalid density block: {what} = {value:e}")]
    InvalidDensity { what: &'static str, value: f64 },

    #[error("block has vanishing determinant but no second derivative was supplied")]
    MissingSecondDerivative,

    #[error("susceptibility singular: eigenvalue {value:e} vanishes with non-zero slope {slope:e}")]
    SingularSusceptibility { value: f64, slope: f64 },

    #[error("fidelity is zero; susceptibility undefined")]
    ZeroFidelity,

    #[error("divergence at the critical point h = 1")]
    CriticalDivergence,

    #[error("isotropic ground state is degenerate at level crossing h = {h}")]
    LevelCrossing { h: f64 },

    #[error("gamma = 1 is the isotropic model; use the isotropic routines")]
    IsotropicRouting,

    #[error("peak is ambiguous: {count} local maxima in pre-scan (first at h = {first})")]
    AmbiguousPeak { count: usize, first: f64 },

    #[error("peak lies on the search boundary h = {h}")]
    PeakAtBoundary { h: f64 },

    #[error("least-squares fit needs at least 3 points with distinct abscissae (got {points})")]
    DegenerateFit { points: usize },

    #[error("fit window too close to the critical point (log-log curvature {curvature:.3})")]
    WindowTooClose { curvature: f64 },
}

/// Detail attached to [`Error::InvalidParameter`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reason(pub &'static str, pub f64);

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (got {})", self.0, self.1)
    }
}

impl Error {
    pub(crate) fn param(what: &'static str, value: f64) -> Self {
        Error::InvalidParameter(Reason(what, value))
    }

    /// True for the failures a caller reports as "numerical" rather than "bad input".
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::IsotropicRouting)
    }
}

pub type Result<T> = core::result::Result<T, Error>;
