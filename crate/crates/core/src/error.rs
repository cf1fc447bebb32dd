use thiserror::Error;

/// Failures of the geometric primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("space form dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point violates the model equation (residual {residual:e})")]
    ModelViolation { residual: f64 },
    #[error("vector is not tangent at its base point (residual {residual:e})")]
    NotTangent { residual: f64 },
    #[error("tangent vector has zero length")]
    ZeroTangent,
    #[error("points coincide or are antipodal; no unique chord")]
    DegenerateChord,
    #[error("reflection normal has <Gn,n> = {0:e}")]
    ZeroNormal(f64),
    #[error("parameter {lambda} lies within the guard band of global eigenvalue {eigenvalue}")]
    GlobalEigenvalue { lambda: f64, eigenvalue: f64 },
    #[error("semiaxes must be finite and positive")]
    InvalidAxes,
    #[error("matrix is not symmetric or has the wrong size")]
    InvalidMatrix,
    #[error("root refinement did not converge within {steps} bisection steps")]
    RootIsolationFailure { steps: usize },
    #[error("point lies on the quadric; the circumscribed cone is undefined")]
    PointOnQuadric,
    #[error("subspace is isotropic for the space-form metric")]
    IsotropicSubspace,
    #[error("basis is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),
    #[error("geodesic does not meet the hypersurface")]
    NoIntersection,
    #[error("geodesic is tangent to the hypersurface within the guard band")]
    TangentGeodesic,
    #[error("surface is not strictly convex: {0}")]
    ConvexityLost(String),
    #[error("quadric does not bound a compact convex body: {0}")]
    NotConvexBody(String),
    #[error("spherical body is not contained in an open hemisphere")]
    NotInHemisphere,
    #[error("operation is not supported in the {0} model")]
    UnsupportedModel(&'static str),
}

pub type GeometryResult<T> = Result<T, GeometryError>;
