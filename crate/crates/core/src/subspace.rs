//! Linear subspaces of `R^{d+1}`, pseudo-symmetries and the orthogonal polarity.

use crate::error::{GeometryError, GeometryResult};
use crate::linalg::{orthogonal_complement, orthonormal_columns};
use crate::spaceform::{Matrix, ModelKind, SpaceForm, Vector};
use crate::tolerances::Tolerances;

/// A `k`-dimensional subspace given by `k` linearly independent columns, `1 ≤ k ≤ d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    basis: Matrix,
}

impl SubspaceBasis {
    pub fn new(basis: Matrix) -> GeometryResult<Self> {
        Self::with_tolerance(basis, Tolerances::DEFAULT.rank_tolerance)
    }

    pub fn with_tolerance(basis: Matrix, rank_tolerance: f64) -> GeometryResult<Self> {
        let (n, k) = basis.shape();
        if k == 0 || k >= n {
            return Err(GeometryError::RankDeficient(0.0));
        }
        let mut normalized = basis.clone();
        for mut c in normalized.column_iter_mut() {
            let len = c.norm();
            if !(len > 0.0) || !len.is_finite() {
                return Err(GeometryError::RankDeficient(0.0));
            }
            c /= len;
        }
        let smin = normalized.singular_values().min();
        if !(smin > rank_tolerance) {
            return Err(GeometryError::RankDeficient(smin));
        }
        Ok(SubspaceBasis { basis })
    }

    pub fn from_vectors(vectors: &[Vector]) -> GeometryResult<Self> {
        if vectors.is_empty() {
            return Err(GeometryError::RankDeficient(0.0));
        }
        Self::new(Matrix::from_columns(vectors))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Euclidean-orthonormal basis of the same subspace.
    pub fn orthonormal(&self) -> Matrix {
        orthonormal_columns(&self.basis, 0.0).expect("rank checked at construction")
    }

    /// Image under a linear map.
    pub fn transformed(&self, m: &Matrix) -> GeometryResult<SubspaceBasis> {
        SubspaceBasis::new(m * &self.basis)
    }

    /// `|det|` of the Gram matrix `<Gv_i, v_j>` of the orthonormalized basis.
    pub fn gram_determinant(&self, form: &SpaceForm) -> f64 {
        let q = self.orthonormal();
        (q.transpose() * form.g_matrix() * &q).determinant().abs()
    }
}

/// Euclidean orthogonal complement `L ↦ L^⊥`.
pub fn orthogonal_polarity(l: &SubspaceBasis) -> SubspaceBasis {
    SubspaceBasis {
        basis: orthogonal_complement(&l.orthonormal()),
    }
}

/// The involution `I_V`: identity on `V`, minus identity on its `G`-orthogonal complement.
///
/// In the Euclidean model the `G`-orthogonal complement of a non-isotropic `V`
/// always contains the kernel `e_0` of `G`, so every subspace is rejected there.
pub fn pseudo_symmetry(v: &SubspaceBasis, form: &SpaceForm) -> GeometryResult<Matrix> {
    let n = form.ambient_dim();
    if v.ambient_dim() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, got: v.ambient_dim() });
    }
    let b = v.orthonormal();
    let g = form.g_matrix();
    let gram = b.transpose() * &g * &b;
    if !(gram.determinant().abs() > form.tolerances().isotropy_tolerance) {
        return Err(GeometryError::IsotropicSubspace);
    }
    if form.kind() == ModelKind::Euclidean {
        // the complement {x : B^T G x = 0} contains e_0 because G e_0 = 0
        return Err(GeometryError::IsotropicSubspace);
    }
    let inv = gram.try_inverse().ok_or(GeometryError::IsotropicSubspace)?;
    let p = &b * inv * b.transpose() * &g;
    Ok(p * 2.0 - Matrix::identity(n, n))
}

/// Largest principal-angle sine between two subspaces; 1 when dimensions differ.
pub fn principal_angle_distance(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    if a.dim() != b.dim() || a.ambient_dim() != b.ambient_dim() {
        return 1.0;
    }
    let qa = a.orthonormal();
    let qb = b.orthonormal();
    let n = qa.nrows();
    let resid = (Matrix::identity(n, n) - &qa * qa.transpose()) * qb;
    resid.singular_values().max().min(1.0)
}
