//! Numerical thresholds shared by every module.
//!
//! All guard bands live in one record so an experiment can tighten or relax
//! them in a single place. [`Tolerances::default`] carries the documented
//! defaults.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed model-equation residual of a normalized point or tangent.
    pub model_residual: f64,
    /// Largest violation a constructor silently re-projects; larger inputs are rejected.
    pub reproject_limit: f64,
    /// Points closer than this (or that close to antipodal) do not span a chord.
    pub degenerate_chord: f64,
    /// Minimum `<Gn,n>` of a reflection normal.
    pub zero_normal: f64,
    /// Minimum distance of a pencil parameter from a global eigenvalue.
    pub eigenvalue_guard: f64,
    /// Normalized tangency discriminant (or transversality) below which a
    /// geodesic counts as tangent.
    pub tangency_guard: f64,
    /// Target accuracy of λ-roots.
    pub root_tolerance: f64,
    /// Cap on bisection steps during root refinement.
    pub max_bisection_steps: usize,
    /// Smallest admissible singular value of a column-normalized basis.
    pub rank_tolerance: f64,
    /// Smallest admissible `|det|` of an orthonormalized Gram matrix.
    pub isotropy_tolerance: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        model_residual: 1e-12,
        reproject_limit: 1e-8,
        degenerate_chord: 1e-10,
        zero_normal: 1e-14,
        eigenvalue_guard: 1e-9,
        tangency_guard: 1e-9,
        root_tolerance: 1e-10,
        max_bisection_steps: 200,
        rank_tolerance: 1e-10,
        isotropy_tolerance: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
