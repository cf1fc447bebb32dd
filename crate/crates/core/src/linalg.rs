//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::spaceform::{Matrix, Vector};

/// Orthonormalizes the columns of `cols` (two passes of modified Gram-Schmidt).
///
/// Returns `None` when a column collapses below `tol` after normalization of
/// the input columns.
pub fn orthonormal_columns(cols: &Matrix, tol: f64) -> Option<Matrix> {
    let mut out: Vec<Vector> = Vec::with_capacity(cols.ncols());
    for j in 0..cols.ncols() {
        let mut c: Vector = cols.column(j).into_owned();
        let n0 = c.norm();
        if !(n0 > 0.0) {
            return None;
        }
        c /= n0;
        for _ in 0..2 {
            for q in &out {
                let k = q.dot(&c);
                c -= q * k;
            }
        }
        let n = c.norm();
        if !(n > tol) {
            return None;
        }
        out.push(c / n);
    }
    Some(Matrix::from_columns(&out))
}

/// Orthonormal basis of the Euclidean orthogonal complement of the column span.
///
/// `cols` must already have orthonormal columns.
pub fn orthogonal_complement(orthonormal: &Matrix) -> Matrix {
    let n = orthonormal.nrows();
    let k = orthonormal.ncols();
    let proj = Matrix::identity(n, n) - orthonormal * orthonormal.transpose();
    let eig = SymmetricEigen::new(proj);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let picked: Vec<Vector> = idx[..n - k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let m = Matrix::from_columns(&picked);
    // Re-project against the input span to remove eigen-solver leakage.
    let cleaned = &m - orthonormal * (orthonormal.transpose() * &m);
    orthonormal_columns(&cleaned, 1e-6).unwrap_or(m)
}

/// Eigenvalues of the symmetric-definite pencil `a - λ b` (`b` positive definite), ascending.
pub fn symmetric_definite_eigenvalues(a: &Matrix, b: &Matrix) -> Option<Vec<f64>> {
    let chol = Cholesky::new(b.clone())?;
    let l = chol.l();
    // C = L^{-1} a L^{-T}
    let y = l.solve_lower_triangular(a)?;
    let c = l.solve_lower_triangular(&y.transpose())?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Some(ev)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Symmetric eigen-decomposition sorted by ascending eigenvalue.
pub fn sorted_symmetric_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vector> = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (values, Matrix::from_columns(&vectors))
}

/// Scales `m` so its largest absolute entry is 1 and its first non-negligible
/// entry (row-major) is positive.
pub fn normalize_max_abs(m: &Matrix) -> Option<Matrix> {
    let max = m.amax();
    if !(max > 0.0) || !max.is_finite() {
        return None;
    }
    let mut out = m / max;
    let first = (0..out.nrows())
        .flat_map(|i| (0..out.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| out[(i, j)])
        .find(|x| x.abs() > 1e-12);
    if matches!(first, Some(x) if x < 0.0) {
        out.neg_mut();
    }
    Some(out)
}

/// Real roots of `det(q - λ g) = 0` for symmetric `q` and diagonal `g`,
/// via eigenvalues of `(q - σ g)^{-1} g` for a regular shift `σ`.
pub fn shift_invert_real_eigenvalues(q: &Matrix, g: &Matrix) -> Vec<f64> {
    let scale = q.amax().max(1.0);
    for sigma in [0.0, 0.618_034, -1.324_718, 2.718_28, -3.141_59] {
        let shift = sigma * scale;
        let Some(inv) = (q - g * shift).try_inverse() else {
            continue;
        };
        let k = inv * g;
        let cond = k.amax();
        if !cond.is_finite() || cond > 1e12 {
            continue;
        }
        let mut out: Vec<f64> = k
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.re.abs()) && z.re.abs() > 1e-12 * cond.max(1.0))
            .map(|z| shift + 1.0 / z.re)
            .collect();
        out.sort_by(f64::total_cmp);
        return out;
    }
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn complement_is_orthogonal_and_complete() {
        let cols = Matrix::from_column_slice(4, 2, &[1., 2., 0., 1., 0., 1., 1., -1.]);
        let q = orthonormal_columns(&cols, 1e-10).unwrap();
        let c = orthogonal_complement(&q);
        assert_eq!(c.ncols(), 2);
        assert_abs_diff_eq!(q.transpose() * &c, Matrix::zeros(2, 2), epsilon = 1e-14);
        assert_abs_diff_eq!(c.transpose() * &c, Matrix::identity(2, 2), epsilon = 1e-14);
    }

    #[test]
    fn definite_pencil_matches_diagonal_case() {
        let a = Matrix::from_diagonal(&Vector::from_column_slice(&[3., 1., 2.]));
        let b = Matrix::from_diagonal(&Vector::from_column_slice(&[1., 2., 4.]));
        let ev = symmetric_definite_eigenvalues(&a, &b).unwrap();
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[2], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn shift_invert_handles_singular_metric() {
        let q = Matrix::from_diagonal(&Vector::from_column_slice(&[-1., 3., 2., 1.]));
        let g = Matrix::from_diagonal(&Vector::from_column_slice(&[0., 1., 1., 1.]));
        let ev = shift_invert_real_eigenvalues(&q, &g);
        assert_eq!(ev.len(), 3);
        for (a, b) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalization_fixes_scale_and_sign() {
        let m = Matrix::from_row_slice(2, 2, &[-2., 1., 1., 4.]);
        let n = normalize_max_abs(&m).unwrap();
        assert_eq!(n, Matrix::from_row_slice(2, 2, &[0.5, -0.25, -0.25, -1.0]));
        assert_eq!(normalize_max_abs(&n).unwrap(), n);
    }
}
