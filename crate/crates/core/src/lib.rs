//! Billiards in quadrics of the three constant-curvature space forms.

pub mod billiard;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod parallel;
pub mod quadric;
pub mod rng;
pub mod spaceform;
pub mod subspace;
pub mod tolerances;

pub use error::{GeometryError, GeometryResult};
pub use quadric::{ConfocalPencil, Quadric};
pub use spaceform::{geodesic_distance, Matrix, ModelKind, OrientedGeodesic, SpaceForm, SurfacePoint, TangentVector, Vector};
pub use tolerances::Tolerances;
pub use billiard::{ConvexHypersurface, ImplicitField, PerturbationMode, ReflectionKind, ReflectionOutcome};
pub use subspace::{orthogonal_polarity, principal_angle_distance, pseudo_symmetry, SubspaceBasis};
pub use parallel::Workers;
