//! Error type shared across the crate.

use thiserror::Error;

/// Errors surfaced by state construction, geometry validation, and the
/// measurement chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A state vector with no usable norm.
    #[error("cannot normalize a vector with norm {norm:e}")]
    ZeroVector { norm: f64 },

    /// A matrix handed to an observable constructor is not Hermitian.
    #[error("matrix deviates from Hermitian symmetry by {deviation:e}")]
    NotHermitian { deviation: f64 },

    /// Spectral decomposition is restricted to small operators.
    #[error("dimension {dim} exceeds the spectral-decomposition cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// Postselection orthogonal to the preselection: the weak value has no
    /// finite limit.
    #[error("postselection is orthogonal to preselection (overlap probability {overlap:e})")]
    OrthogonalPostselection { overlap: f64 },

    /// The beam amplitude vanishes at the requested point, so amplitude
    /// ratios there are undefined.
    #[error("beam amplitude vanishes at {point}")]
    NodePoint { point: f64 },

    /// No intensity survives the postselection on the detection grid.
    #[error("postselected intensity is zero on the detection grid")]
    ZeroPostselectedIntensity,

    /// The weak-value quadrature used by an estimator vanishes, so the
    /// centroid carries no displacement signal.
    #[error("amplifier weak-value component is {value:e}; displacement cannot be inverted")]
    DegenerateAmplifier { value: f64 },

    /// The state overlaps the tomography postselection too weakly for a
    /// stable reconstruction.
    #[error("overlap probability with the tomography port is {overlap:e}")]
    SmallOverlap { overlap: f64 },

    /// An operation assuming a centered beam received one with a displaced
    /// mean.
    #[error("beam profile mean is {mean:e}, expected centered")]
    NonCenteredProfile { mean: f64 },

    /// The detection density vanishes at the requested pixel.
    #[error("detection density vanishes at pixel {pixel}")]
    ZeroDensity { pixel: f64 },

    /// A scalar or structural parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
