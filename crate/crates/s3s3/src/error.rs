//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum GeomError {
    /// A quaternion meant to lie on the unit sphere drifted too far from norm 1.
    #[error("point off the unit sphere: |norm - 1| = {drift:.3e} exceeds {limit:.1e}")]
    OffSphere { drift: f64, limit: f64 },

    /// A binary operation received vectors anchored at different base points.
    #[error("vectors based at different points (distance {distance:.3e})")]
    BasePointMismatch { distance: f64 },

    /// A vector that must be tangent to S3 x S3 is not.
    #[error("vector not tangent to the sphere factors: defect {defect:.3e}")]
    NotTangent { defect: f64 },

    /// Inversion of a zero-norm quaternion.
    #[error("cannot invert a zero-norm quaternion")]
    ZeroNorm,

    /// The pushforward of an immersion lost rank at a chart point.
    #[error("pushforward rank-deficient at chart point {at:?}: smallest eigenvalue {sigma:.3e}")]
    RankDeficient { at: [f64; 3], sigma: f64 },

    /// A map that must be Lagrangian is not, beyond tolerance.
    #[error("not Lagrangian at chart point {at:?}: residual {residual:.3e}")]
    NotLagrangian { at: [f64; 3], residual: f64 },

    /// The restricted product-structure operators fail to commute.
    #[error("A and B fail to commute: residual {residual:.3e} (non-Lagrangian data or numeric breakdown)")]
    AbNotCommuting { residual: f64 },

    /// Two independent evaluation routes disagree badly enough to signal a defect.
    #[error("independent routes disagree: {what} differs by {difference:.3e}")]
    RouteMismatch { what: &'static str, difference: f64 },

    /// A totally geodesic grid shows point-to-point angle drift, which the
    /// constant-angle theorem forbids.
    #[error("angles inconsistent across the grid at {at:?}: deviation {spread:.3e}")]
    InconsistentAngles { at: [f64; 3], spread: f64 },

    /// Catalog lookup with an unrecognized name.
    #[error("unknown example name: {0:?}")]
    UnknownExample(String),

    /// A user-supplied parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An integrator detected an invariant drifting beyond its abort threshold.
    #[error("integration aborted: {0}")]
    IntegrationAborted(String),

    /// A sampled-immersion file failed schema or consistency checks.
    #[error("sample file rejected: {0}")]
    BadSampleFile(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GeomError>;
