//! Quadrics `Σ ∩ {<Qx,x> = 0}` and confocal pencils `Q_λ = (Q - λG)^{-1}`.
//!
//! Tangency of a geodesic (a 2-plane `Π`) to the cone of `Q_λ` happens exactly
//! when the dual form `Q - λG` degenerates on the Euclidean complement `Π^⊥`
//! (complementary minors of a matrix and its inverse). Restricted to `Π^⊥`
//! the metric `G` is positive definite in all three models, so the tangency
//! parameters are the eigenvalues of a symmetric-definite pencil of size
//! `d - 1`; the same argument with `Π = span(y)` gives the `d` confocal
//! parameters through a point.

use crate::error::{GeometryError, GeometryResult};
use crate::linalg::{
    normalize_max_abs, orthogonal_complement, orthonormal_columns, shift_invert_real_eigenvalues,
    symmetric_definite_eigenvalues, symmetric_eigenvalues,
};
use crate::spaceform::{Matrix, ModelKind, OrientedGeodesic, SpaceForm, SurfacePoint, TangentVector, Vector};

/// A symmetric `(d+1)×(d+1)` matrix up to scale, normalized to max-abs entry 1
/// with its first non-negligible entry positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadric {
    form: SpaceForm,
    matrix: Matrix,
}

impl Quadric {
    pub fn new(form: SpaceForm, matrix: Matrix) -> GeometryResult<Self> {
        let n = form.ambient_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(GeometryError::InvalidMatrix);
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if !(asym <= 1e-12 * matrix.amax().max(1.0)) {
            return Err(GeometryError::InvalidMatrix);
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let matrix = normalize_max_abs(&sym).ok_or(GeometryError::InvalidMatrix)?;
        Ok(Quadric { form, matrix })
    }

    pub fn form(&self) -> &SpaceForm {
        &self.form
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `<Qx, x>`.
    pub fn eval(&self, x: &Vector) -> f64 {
        x.dot(&(&self.matrix * x))
    }

    /// `<Qx, y>`.
    pub fn bilinear(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.matrix * y))
    }

    /// Unit metric normal of the level set through `y` (any sign).
    pub fn normal_at(&self, y: &SurfacePoint) -> GeometryResult<TangentVector> {
        let grad = &self.matrix * y.coords() * 2.0;
        let n = self.form.gradient_to_tangent(y, &grad);
        self.form.normalize_tangent(&n)
    }

    /// Raw tangency discriminant `<Qp,u>^2 - <Qp,p><Qu,u>` of the geodesic's 2-plane.
    pub fn tangency_discriminant(&self, l: &OrientedGeodesic) -> f64 {
        let (a, b, c) = self.restricted_form(l);
        b * b - a * c
    }

    /// Discriminant divided by `‖Q‖_F² ‖p∧u‖_F²`, invariant under rescaling
    /// `Q` and under change of spanning pair.
    pub fn normalized_discriminant(&self, l: &OrientedGeodesic) -> f64 {
        let q2 = self.matrix.norm_squared();
        self.tangency_discriminant(l) / (q2 * l.wedge_norm_sq())
    }

    /// Coefficients `(A, B, C)` of `<Q(sp + tu), sp + tu> = A s² + 2B st + C t²`.
    pub(crate) fn restricted_form(&self, l: &OrientedGeodesic) -> (f64, f64, f64) {
        let qp = &self.matrix * l.base();
        let qu = &self.matrix * l.direction();
        (qp.dot(l.base()), qp.dot(l.direction()), qu.dot(l.direction()))
    }

    /// Cone of geodesics through `y` tangent to this quadric:
    /// `C(x) = <Qy,y><Qx,x> - <Qx,y>²`.
    pub fn circumscribed_cone(&self, y: &SurfacePoint) -> GeometryResult<Quadric> {
        let y = y.coords();
        let qy = &self.matrix * y;
        let yqy = qy.dot(y);
        if yqy.abs() <= 1e-12 * self.matrix.amax() * y.norm_squared() {
            return Err(GeometryError::PointOnQuadric);
        }
        let cone = &self.matrix * yqy - &qy * qy.transpose();
        Quadric::new(self.form, cone)
    }
}

/// Confocal family generated by a symmetric matrix `Q`.
#[derive(Clone, Debug)]
pub struct ConfocalPencil {
    form: SpaceForm,
    q: Matrix,
    global_eigenvalues: Vec<f64>,
    squared_semiaxes: Option<Vec<f64>>,
}

impl ConfocalPencil {
    pub fn new(form: SpaceForm, q: Matrix) -> GeometryResult<Self> {
        let n = form.ambient_dim();
        if q.nrows() != n || q.ncols() != n {
            return Err(GeometryError::InvalidMatrix);
        }
        if !((&q - q.transpose()).amax() <= 1e-12 * q.amax().max(1.0)) || !q.iter().all(|x| x.is_finite()) {
            return Err(GeometryError::InvalidMatrix);
        }
        let q = (&q + q.transpose()) * 0.5;
        let global_eigenvalues = global_eigenvalues(&form, &q);
        Ok(ConfocalPencil {
            form,
            q,
            global_eigenvalues,
            squared_semiaxes: None,
        })
    }

    /// Pencil with `Q = diag(entries)`.
    pub fn diagonal(form: SpaceForm, entries: &[f64]) -> GeometryResult<Self> {
        if entries.len() != form.ambient_dim() {
            return Err(GeometryError::InvalidMatrix);
        }
        Self::new(form, Matrix::from_diagonal(&Vector::from_column_slice(entries)))
    }

    /// Euclidean pencil `Σ x_j² / (a_j² + μ) = 1`, i.e. `Q = diag(-1, a_1², ..., a_d²)`.
    ///
    /// Parameters follow the classical convention: [`ConfocalPencil::member_mu`]
    /// maps `μ` to the pencil parameter `λ = -μ`.
    pub fn euclidean_ellipsoid(semiaxes: &[f64]) -> GeometryResult<Self> {
        if !semiaxes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(GeometryError::InvalidAxes);
        }
        let squared: Vec<f64> = semiaxes.iter().map(|a| a * a).collect();
        Self::euclidean_ellipsoid_squared(&squared)
    }

    /// Same as [`ConfocalPencil::euclidean_ellipsoid`] from the squares `a_j²`.
    pub fn euclidean_ellipsoid_squared(squared: &[f64]) -> GeometryResult<Self> {
        if squared.len() < 2 || !squared.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(GeometryError::InvalidAxes);
        }
        let form = SpaceForm::euclidean(squared.len())?;
        let mut diag = vec![-1.0];
        diag.extend_from_slice(squared);
        let mut pencil = Self::diagonal(form, &diag)?;
        pencil.squared_semiaxes = Some(squared.to_vec());
        Ok(pencil)
    }

    pub fn with_form(mut self, form: SpaceForm) -> Self {
        debug_assert_eq!(form.kind(), self.form.kind());
        self.form = form;
        self
    }

    pub fn form(&self) -> &SpaceForm {
        &self.form
    }

    pub fn base_matrix(&self) -> &Matrix {
        &self.q
    }

    /// Semiaxes of the `μ = 0` member for pencils built by [`ConfocalPencil::euclidean_ellipsoid`].
    pub fn semiaxes(&self) -> Option<Vec<f64>> {
        self.member_semiaxes(0.0)
    }

    /// Sorted real `λ` with `det(Q - λG) = 0`.
    pub fn global_eigenvalues(&self) -> &[f64] {
        &self.global_eigenvalues
    }

    /// `Q - λG`, the matrix of the dual quadric of the member.
    pub fn dual_matrix(&self, lambda: f64) -> Matrix {
        &self.q - self.form.g_matrix() * lambda
    }

    fn check_regular(&self, lambda: f64) -> GeometryResult<()> {
        let guard = self.form.tolerances().eigenvalue_guard;
        if let Some(&ev) = self
            .global_eigenvalues
            .iter()
            .find(|&&ev| (ev - lambda).abs() <= guard * (1.0 + ev.abs()))
        {
            return Err(GeometryError::GlobalEigenvalue { lambda, eigenvalue: ev });
        }
        Ok(())
    }

    /// Member `Q_λ = (Q - λG)^{-1}`.
    pub fn member(&self, lambda: f64) -> GeometryResult<Quadric> {
        self.check_regular(lambda)?;
        let inv = self
            .dual_matrix(lambda)
            .try_inverse()
            .ok_or(GeometryError::GlobalEigenvalue { lambda, eigenvalue: lambda })?;
        Quadric::new(self.form, (&inv + inv.transpose()) * 0.5)
    }

    /// Member in the classical Euclidean convention, `λ = -μ`.
    pub fn member_mu(&self, mu: f64) -> GeometryResult<Quadric> {
        self.member(-mu)
    }

    /// Semiaxes `sqrt(a_j² + μ)` of a Euclidean ellipsoid member, when they are real.
    pub fn member_semiaxes(&self, mu: f64) -> Option<Vec<f64>> {
        let squared = self.squared_semiaxes.as_ref()?;
        let out: Vec<f64> = squared.iter().map(|a2| (a2 + mu).sqrt()).collect();
        out.iter().all(|a| a.is_finite() && *a > 0.0).then_some(out)
    }

    /// All `λ` whose member is tangent to the geodesic, ascending.
    pub fn tangent_confocal_parameters(&self, l: &OrientedGeodesic) -> GeometryResult<Vec<f64>> {
        let plane = Matrix::from_columns(&[l.base().clone(), l.direction().clone()]);
        let basis = orthonormal_columns(&plane, 1e-12).ok_or(GeometryError::RankDeficient(0.0))?;
        self.degeneracy_parameters(&orthogonal_complement(&basis))
    }

    /// All `λ` whose member passes through `y`, ascending.
    pub fn confocal_parameters_through(&self, y: &SurfacePoint) -> GeometryResult<Vec<f64>> {
        let line = Matrix::from_columns(&[y.coords().clone()]);
        let basis = orthonormal_columns(&line, 1e-12).ok_or(GeometryError::RankDeficient(0.0))?;
        self.degeneracy_parameters(&orthogonal_complement(&basis))
    }

    /// Roots of `det((Q - λG)|_N) = 0` on the span of the orthonormal columns `n`.
    fn degeneracy_parameters(&self, n: &Matrix) -> GeometryResult<Vec<f64>> {
        let a = n.transpose() * &self.q * n;
        let b = n.transpose() * self.form.g_matrix() * n;
        let estimates = symmetric_definite_eigenvalues(&a, &b).ok_or(GeometryError::IsotropicSubspace)?;
        let tol = self.form.tolerances();
        let mut roots = Vec::with_capacity(estimates.len());
        for r in estimates {
            let r = refine_determinant_root(&a, &b, r, tol.root_tolerance, tol.max_bisection_steps)?;
            if self.check_regular(r).is_ok() {
                roots.push(r);
            }
        }
        roots.sort_by(f64::total_cmp);
        Ok(roots)
    }
}

/// Bracket-and-bisect refinement of an eigenvalue estimate of `a - λb`,
/// followed by one guarded Newton step. Roots of even multiplicity (no sign
/// change nearby) keep their estimate.
fn refine_determinant_root(a: &Matrix, b: &Matrix, estimate: f64, tol: f64, max_steps: usize) -> GeometryResult<f64> {
    let f = |x: f64| (a - b * x).determinant();
    let scale = 1.0 + estimate.abs();
    let mut bracket = None;
    let mut h = 1e-13 * scale;
    while h <= 1e-9 * scale {
        let (lo, hi) = (estimate - h, estimate + h);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo.signum() != fhi.signum() {
            bracket = Some((lo, hi, flo));
            break;
        }
        h *= 10.0;
    }
    let Some((mut lo, mut hi, mut flo)) = bracket else {
        return Ok(estimate);
    };
    let mut steps = 0;
    while hi - lo > tol * 1e-3 * scale {
        if steps >= max_steps {
            return Err(GeometryError::RootIsolationFailure { steps });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let mid = 0.5 * (lo + hi);
    // Newton: f'/f = -tr((a - λb)^{-1} b)
    let polished = (a - b * mid)
        .try_inverse()
        .map(|inv| (inv * b).trace())
        .filter(|t| t.is_finite() && *t != 0.0)
        .map(|t| mid + 1.0 / t)
        .filter(|x| *x >= lo && *x <= hi);
    Ok(polished.unwrap_or(mid))
}

fn global_eigenvalues(form: &SpaceForm, q: &Matrix) -> Vec<f64> {
    let g = form.g_matrix();
    match form.kind() {
        ModelKind::Spherical => symmetric_eigenvalues(q),
        ModelKind::Euclidean if q[(0, 0)].abs() > 1e-12 * q.amax() => {
            let d = form.dim();
            let q00 = q[(0, 0)];
            let col = q.view((1, 0), (d, 1)).into_owned();
            let schur = q.view((1, 1), (d, d)).into_owned() - &col * col.transpose() / q00;
            symmetric_eigenvalues(&schur)
        }
        _ => shift_invert_real_eigenvalues(q, &g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn pencil321() -> ConfocalPencil {
        ConfocalPencil::euclidean_ellipsoid(&[3f64.sqrt(), 2f64.sqrt(), 1.0]).unwrap()
    }

    fn line(form: &SpaceForm, p: &[f64], u: &[f64]) -> OrientedGeodesic {
        let p = form.point(v(p)).unwrap();
        let u = form.tangent(&p, v(u)).unwrap();
        form.geodesic(&p, &u).unwrap()
    }

    #[test]
    fn base_member_matches_classical_ellipsoid() {
        let p = pencil321();
        assert_abs_diff_eq!(p.base_matrix(), &Matrix::from_diagonal(&v(&[-1., 3., 2., 1.])), epsilon = 1e-15);
        let q0 = p.member(0.0).unwrap();
        // Q^{-1} = diag(-1, 1/3, 1/2, 1), sign-normalized
        assert_abs_diff_eq!(q0.matrix(), &Matrix::from_diagonal(&v(&[1., -1. / 3., -0.5, -1.])), epsilon = 1e-15);
        assert_abs_diff_eq!(q0.eval(&v(&[1., 3f64.sqrt(), 0., 0.])), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn members_match_classical_forms_on_a_grid() {
        // oracle: Σ x_j²/(a_j²+μ) - 1 evaluated directly
        let axes2 = [3.0, 2.0, 1.0];
        let p = pencil321();
        for mu in [-0.5, 0.0, 1.0, 4.5] {
            let q = p.member_mu(mu).unwrap();
            let scale = q.eval(&v(&[1., 0., 0., 0.])) / -1.0;
            for i in -3..=3 {
                for j in -3..=3 {
                    for k in -3..=3 {
                        let x = [0.4 * i as f64, 0.35 * j as f64, 0.3 * k as f64];
                        let classical: f64 = x.iter().zip(axes2).map(|(x, a)| x * x / (a + mu)).sum::<f64>() - 1.0;
                        let ours = q.eval(&v(&[1., x[0], x[1], x[2]])) / -scale;
                        assert_abs_diff_eq!(ours, -classical, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pencil_member_examples() {
        let p = pencil321();
        let q1 = p.member_mu(1.0).unwrap();
        assert_abs_diff_eq!(q1.eval(&v(&[1., 2., 0., 0.])), 0.0, epsilon = 1e-15);
        assert!(matches!(p.member(3.0), Err(GeometryError::GlobalEigenvalue { .. })));
        assert!(matches!(p.member(2.0 + 1e-12), Err(GeometryError::GlobalEigenvalue { .. })));
        assert_eq!(p.global_eigenvalues().len(), 3);
        for (a, b) in p.global_eigenvalues().iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        assert!(matches!(
            ConfocalPencil::euclidean_ellipsoid(&[1.0, -2.0]),
            Err(GeometryError::InvalidAxes)
        ));
    }

    #[test]
    fn large_members_are_nearly_round() {
        let p = pencil321();
        let axes = p.member_semiaxes(1e6).unwrap();
        let ratio = axes[0] / axes[2];
        assert!((ratio - 1.0).abs() < 2e-6, "ratio {ratio}");
        assert_abs_diff_eq!(axes[0], 1e3, epsilon = 1e-2);
    }

    #[test]
    fn confocality_of_denominators() {
        // denominators a_j² + μ differ by μ-independent constants
        let p = pencil321();
        for mu in [0.0, 0.7, 3.0] {
            let a = p.member_semiaxes(mu).unwrap();
            assert_abs_diff_eq!(a[0] * a[0] - a[1] * a[1], 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(a[1] * a[1] - a[2] * a[2], 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn discriminant_examples() {
        let e = SpaceForm::euclidean(3).unwrap();
        let sphere = Quadric::new(e, Matrix::from_diagonal(&v(&[-1., 1., 1., 1.]))).unwrap();
        let tangent = line(&e, &[1., 0., 0., 1.], &[0., 1., 0., 0.]);
        assert_eq!(sphere.tangency_discriminant(&tangent), 0.0);
        let diameter = line(&e, &[1., 0., 0., 0.], &[0., 1., 0., 0.]);
        assert!(sphere.tangency_discriminant(&diameter) > 0.0);
        let miss = line(&e, &[1., 0., 0., 2.], &[0., 1., 0., 0.]);
        assert!(sphere.tangency_discriminant(&miss) < 0.0);
    }

    #[test]
    fn great_circle_tangent_to_small_circle() {
        // small circle x0 = cos(0.4) on S^3: cone x0² sin²(0.4) - cos²(0.4) Σ x_j² = 0
        let s = SpaceForm::spherical(3).unwrap();
        let (sn, cs) = 0.4f64.sin_cos();
        let q = Quadric::new(s, Matrix::from_diagonal(&v(&[sn * sn, -cs * cs, -cs * cs, -cs * cs]))).unwrap();
        let touch = s.point(v(&[cs, sn * 0.6, sn * 0.8, 0.0])).unwrap();
        let n = q.normal_at(&touch).unwrap();
        // a tangent direction orthogonal to the normal
        let w = s.project_to_tangent(&touch, &v(&[0., 0., 0., 1.]));
        assert_abs_diff_eq!(s.g_dot(w.vector(), n.vector()), 0.0, epsilon = 1e-15);
        let l = s.geodesic(&touch, &w).unwrap();
        assert!(q.normalized_discriminant(&l).abs() < 1e-15);
        let w2 = s.project_to_tangent(&touch, &v(&[0., 0., 0.1, 1.]));
        let l2 = s.geodesic(&touch, &(s.normalize_tangent(&w2).unwrap())).unwrap();
        assert!(q.normalized_discriminant(&l2) > 1e-6);
    }

    /// Independent oracle: sign scan of δ(λ) on a grid, skipping cells that
    /// contain a pole, then bisection on δ itself.
    fn scan_roots(p: &ConfocalPencil, l: &OrientedGeodesic, lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let delta = |x: f64| {
            let inv = p.dual_matrix(x).try_inverse().unwrap();
            let qp = &inv * l.base();
            let qu = &inv * l.direction();
            qp.dot(l.direction()).powi(2) - qp.dot(l.base()) * qu.dot(l.direction())
        };
        let poles = p.global_eigenvalues().to_vec();
        let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let mut roots = vec![];
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            if poles.iter().any(|&pl| pl >= a - 1e-9 && pl <= b + 1e-9) {
                continue;
            }
            let (fa, fb) = (delta(a), delta(b));
            if fa.signum() != fb.signum() {
                let (mut x0, mut x1, mut f0) = (a, b, fa);
                for _ in 0..200 {
                    let m = 0.5 * (x0 + x1);
                    let fm = delta(m);
                    if fm.signum() == f0.signum() {
                        x0 = m;
                        f0 = fm;
                    } else {
                        x1 = m;
                    }
                }
                roots.push(0.5 * (x0 + x1));
            }
        }
        roots
    }

    #[test]
    fn tangent_parameters_agree_with_sign_scan() {
        let p = pencil321();
        let e = *p.form();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        for _ in 0..40 {
            let x = v(&[1., rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)]);
            let w = v(&[0., rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            let l = line(&e, x.as_slice(), w.as_slice());
            let rho2 = l.base().rows(1, 3).norm_squared();
            let ours = p.tangent_confocal_parameters(&l).unwrap();
            let oracle = scan_roots(&p, &l, 1.0 - rho2 - 1.0, 4.0, 10_000);
            if ours.iter().any(|r| p.global_eigenvalues().iter().any(|g| (g - r).abs() < 1e-3)) {
                continue;
            }
            assert_eq!(ours.len(), 2, "{ours:?}");
            assert_eq!(ours.len(), oracle.len(), "ours {ours:?} oracle {oracle:?}");
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
            }
            checked += 1;
        }
        assert!(checked > 30);
    }

    #[test]
    fn major_axis_has_no_tangent_parameters() {
        let p = pencil321();
        let l = line(p.form(), &[1., 0., 0., 0.], &[0., 1., 0., 0.]);
        let oracle = scan_roots(&p, &l, -5.0, 5.0, 10_000);
        assert!(oracle.is_empty());
        assert!(p.tangent_confocal_parameters(&l).unwrap().is_empty());
    }

    #[test]
    fn tangent_line_to_base_has_zero_parameter() {
        let p = pencil321();
        let e = *p.form();
        let q0 = p.member(0.0).unwrap();
        let y = e.point(v(&[1., 1.0, 0.8, (1.0f64 - 1.0 / 3.0 - 0.32).sqrt()])).unwrap();
        assert_abs_diff_eq!(q0.eval(y.coords()), 0.0, epsilon = 1e-15);
        let n = q0.normal_at(&y).unwrap();
        let w = e.project_to_tangent(&y, &v(&[0., 0.3, -0.7, 0.2]));
        let k = e.g_dot(w.vector(), n.vector());
        let w = TangentVector { base: y.clone(), v: w.vector() - n.vector() * k };
        let l = e.geodesic(&y, &w).unwrap();
        let params = p.tangent_confocal_parameters(&l).unwrap();
        assert_eq!(params.len(), 2);
        assert!(params.iter().any(|r| r.abs() < 1e-10), "{params:?}");
    }

    #[test]
    fn confocal_parameters_through_point() {
        let p = pencil321();
        let e = *p.form();
        let y = e.point(v(&[1., 3f64.sqrt(), 0.0, 0.0])).unwrap();
        // on-axis points sit on degenerate members except for μ = 0
        let params = p.confocal_parameters_through(&y).unwrap();
        assert!(params.iter().any(|r| r.abs() < 1e-12));

        // oracle: sign changes of Σ y_j²/(a_j²+μ) - 1 between poles μ = -3, -2, -1 and beyond
        let yv = [1.0, 0.7, 0.4];
        let f = |mu: f64| yv.iter().zip([3.0, 2.0, 1.0]).map(|(y, a)| y * y / (a + mu)).sum::<f64>() - 1.0;
        let bisect = |mut a: f64, mut b: f64| {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m).signum() == f(a).signum() {
                    a = m
                } else {
                    b = m
                }
            }
            0.5 * (a + b)
        };
        let mut oracle = vec![bisect(-3.0 + 1e-12, -2.0 - 1e-12), bisect(-2.0 + 1e-12, -1.0 - 1e-12), bisect(-1.0 + 1e-12, 100.0)];
        oracle.iter_mut().for_each(|m| *m = -*m);
        oracle.sort_by(f64::total_cmp);
        let y = e.point(v(&[1., yv[0], yv[1], yv[2]])).unwrap();
        let ours = p.confocal_parameters_through(&y).unwrap();
        assert_eq!(ours.len(), 3);
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn circumscribed_cone_examples() {
        let e = SpaceForm::euclidean(3).unwrap();
        let sphere = Quadric::new(e, Matrix::from_diagonal(&v(&[-1., 1., 1., 1.]))).unwrap();
        let y = e.point(v(&[1., 2., 0., 0.])).unwrap();
        let cone = sphere.circumscribed_cone(&y).unwrap();
        assert_abs_diff_eq!(cone.eval(y.coords()), 0.0, epsilon = 1e-15);
        // direction from y making angle θ with the axis towards the center
        let dir = |theta: f64| v(&[0., -theta.cos(), theta.sin(), 0.]);
        let half = (0.5f64).asin();
        assert_abs_diff_eq!(cone.eval(&dir(half)), 0.0, epsilon = 1e-15);
        assert!(cone.eval(&dir(half - 0.1)).signum() != cone.eval(&dir(half + 0.1)).signum());
        let on = e.point(v(&[1., 1., 0., 0.])).unwrap();
        assert_eq!(sphere.circumscribed_cone(&on), Err(GeometryError::PointOnQuadric));
    }

    #[test]
    fn cone_vanishes_at_tangency_points() {
        let p = pencil321();
        let e = *p.form();
        let u = p.member(0.0).unwrap();
        let y = e.point(v(&[1., 1.9, 1.2, -0.4])).unwrap();
        let cone = u.circumscribed_cone(&y).unwrap();
        // tangent lines through y: scan directions in a plane for δ = 0, then the tangency point
        let mut found = 0;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=4000 {
            let th = std::f64::consts::TAU * i as f64 / 4000.0;
            let w = e.project_to_tangent(&y, &v(&[0., -th.cos(), -0.3, th.sin()]));
            let l = e.geodesic(&y, &w).unwrap();
            let d = u.tangency_discriminant(&l);
            if let Some((pt, pd)) = prev {
                if pd.signum() != d.signum() {
                    let (mut a, mut b) = (pt, th);
                    let mk = |t: f64| e.geodesic(&y, &e.project_to_tangent(&y, &v(&[0., -t.cos(), -0.3, t.sin()]))).unwrap();
                    for _ in 0..100 {
                        let m = 0.5 * (a + b);
                        if u.tangency_discriminant(&mk(m)).signum() == pd.signum() {
                            a = m
                        } else {
                            b = m
                        }
                    }
                    let l = mk(0.5 * (a + b));
                    let (aa, bb, cc) = u.restricted_form(&l);
                    // double root of the restricted binary form
                    let t = -bb / cc;
                    let x = l.base() + l.direction() * t;
                    let _ = aa;
                    assert!(cone.eval(&x).abs() < 1e-9, "{}", cone.eval(&x));
                    assert!(u.eval(&x).abs() < 1e-7);
                    found += 1;
                }
            }
            prev = Some((th, d));
        }
        assert!(found >= 2 && found % 2 == 0, "{found}");
    }

    #[test]
    fn spherical_and_hyperbolic_global_eigenvalues() {
        let s = SpaceForm::spherical(3).unwrap();
        let p = ConfocalPencil::diagonal(s, &[4., 1., 2., 3.]).unwrap();
        assert_eq!(p.global_eigenvalues().len(), 4);
        let h = SpaceForm::hyperbolic(3).unwrap();
        let p = ConfocalPencil::diagonal(h, &[2., 1., 2., 3.]).unwrap();
        let ev = p.global_eigenvalues();
        for (a, b) in ev.iter().zip([-2.0, 1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }
}
