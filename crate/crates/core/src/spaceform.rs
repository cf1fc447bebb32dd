//! Ambient models of the three simply connected space forms.
//!
//! Every model lives in `R^{d+1}` with coordinates `(x_0, ..., x_d)` and a
//! diagonal signature form `<Gx, x>`:
//!
//! | model      | `G`                   | hypersurface `Σ`                   |
//! |------------|-----------------------|------------------------------------|
//! | Euclidean  | `diag(0, 1, ..., 1)`  | `{x_0 = 1}`                        |
//! | Spherical  | `Id`                  | `{<Gx,x> = 1}`                     |
//! | Hyperbolic | `diag(-1, 1, ..., 1)` | `{<Gx,x> = -1, x_0 > 0}`           |
//!
//! Geodesics are the sections of `Σ` by 2-planes through the origin, so an
//! oriented geodesic is stored as a canonical pair (base point, unit tangent)
//! spanning that plane.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, GeometryResult};
use crate::tolerances::Tolerances;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Rotation angles below this are treated as "already canonical".
const CANONICAL_SHIFT_EPS: f64 = 1e-15;
/// Coordinates with `hypot(p_j, u_j)` below this cannot break a spherical tie.
const SPHERICAL_TIE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean,
    Spherical,
    Hyperbolic,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Euclidean => "euclidean",
            ModelKind::Spherical => "spherical",
            ModelKind::Hyperbolic => "hyperbolic",
        }
    }

    pub const ALL: [ModelKind; 3] = [
        ModelKind::Euclidean,
        ModelKind::Spherical,
        ModelKind::Hyperbolic,
    ];
}

/// Model descriptor: curvature kind, dimension `d` and tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceForm {
    kind: ModelKind,
    dim: usize,
    tol: Tolerances,
}

/// A point of `Σ`, stored by its ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoint(pub(crate) Vector);

impl SurfacePoint {
    pub fn coords(&self) -> &Vector {
        &self.0
    }

    pub fn into_inner(self) -> Vector {
        self.0
    }
}

/// A vector tangent to `Σ` at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub(crate) base: SurfacePoint,
    pub(crate) v: Vector,
}

impl TangentVector {
    pub fn base(&self) -> &SurfacePoint {
        &self.base
    }

    pub fn vector(&self) -> &Vector {
        &self.v
    }
}

/// An oriented geodesic in canonical form.
///
/// Euclidean: the base point is the foot of the perpendicular from the chart
/// origin. Spherical and hyperbolic: the base point is the point of the
/// geodesic closest (in the ambient Euclidean sense) to `e_0`; on great
/// circles equidistant from `e_0` the lexicographically largest point wins.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedGeodesic {
    form: SpaceForm,
    p: Vector,
    u: Vector,
}

impl SpaceForm {
    pub fn new(kind: ModelKind, dim: usize) -> GeometryResult<Self> {
        if dim < 2 {
            return Err(GeometryError::InvalidDimension(dim));
        }
        Ok(SpaceForm {
            kind,
            dim,
            tol: Tolerances::default(),
        })
    }

    pub fn euclidean(dim: usize) -> GeometryResult<Self> {
        Self::new(ModelKind::Euclidean, dim)
    }

    pub fn spherical(dim: usize) -> GeometryResult<Self> {
        Self::new(ModelKind::Spherical, dim)
    }

    pub fn hyperbolic(dim: usize) -> GeometryResult<Self> {
        Self::new(ModelKind::Hyperbolic, dim)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Diagonal entry `G_ii`.
    #[inline]
    pub fn signature(&self, i: usize) -> f64 {
        if i > 0 {
            return 1.0;
        }
        match self.kind {
            ModelKind::Euclidean => 0.0,
            ModelKind::Spherical => 1.0,
            ModelKind::Hyperbolic => -1.0,
        }
    }

    pub fn g_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&Vector::from_fn(self.ambient_dim(), |i, _| self.signature(i)))
    }

    /// `<Ga, b>`.
    #[inline]
    pub fn g_dot(&self, a: &Vector, b: &Vector) -> f64 {
        a.dot(b) - (1.0 - self.signature(0)) * a[0] * b[0]
    }

    /// `G v`.
    pub fn g_apply(&self, v: &Vector) -> Vector {
        let mut out = v.clone();
        out[0] *= self.signature(0);
        out
    }

    fn check_len(&self, v: &Vector) -> GeometryResult<()> {
        if v.len() != self.ambient_dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Residual of the model equation at `x`.
    pub fn model_residual(&self, x: &Vector) -> f64 {
        match self.kind {
            ModelKind::Euclidean => (x[0] - 1.0).abs(),
            ModelKind::Spherical => (self.g_dot(x, x) - 1.0).abs(),
            ModelKind::Hyperbolic => {
                let r = (self.g_dot(x, x) + 1.0).abs();
                if x[0] > 0.0 {
                    r
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Builds a point, re-projecting residuals up to the re-projection limit.
    pub fn point(&self, x: Vector) -> GeometryResult<SurfacePoint> {
        self.check_len(&x)?;
        let residual = self.model_residual(&x);
        if !(residual <= self.tol.reproject_limit) {
            return Err(GeometryError::ModelViolation { residual });
        }
        self.project_point(&x)
    }

    /// Radially projects a nonzero ambient vector onto `Σ`.
    ///
    /// Every line through the origin that meets `Σ` is accepted; in the
    /// hyperbolic model the vector must be timelike (either time orientation).
    pub fn project_point(&self, x: &Vector) -> GeometryResult<SurfacePoint> {
        self.check_len(x)?;
        let scale = match self.kind {
            ModelKind::Euclidean => x[0],
            ModelKind::Spherical => x.norm(),
            ModelKind::Hyperbolic => {
                let q = self.g_dot(x, x);
                if !(q < 0.0) {
                    return Err(GeometryError::ModelViolation { residual: (q + 1.0).abs() });
                }
                (-q).sqrt() * x[0].signum()
            }
        };
        if scale == 0.0 || !scale.is_finite() {
            return Err(GeometryError::ModelViolation { residual: f64::INFINITY });
        }
        let mut y = x / scale;
        if self.kind == ModelKind::Euclidean {
            y[0] = 1.0;
        }
        Ok(SurfacePoint(y))
    }

    /// `e_0`, the chart origin / north pole / hyperboloid vertex.
    pub fn origin(&self) -> SurfacePoint {
        SurfacePoint(Vector::from_fn(self.ambient_dim(), |i, _| if i == 0 { 1.0 } else { 0.0 }))
    }

    /// Orthogonal projection of an ambient vector onto `T_xΣ`.
    pub fn project_to_tangent(&self, base: &SurfacePoint, v: &Vector) -> TangentVector {
        let x = &base.0;
        let w = match self.kind {
            ModelKind::Euclidean => {
                let mut w = v.clone();
                w[0] = 0.0;
                w
            }
            _ => v - x * (self.g_dot(x, v) / self.g_dot(x, x)),
        };
        TangentVector {
            base: base.clone(),
            v: w,
        }
    }

    /// Tangent vector constructor with the same re-projection policy as [`SpaceForm::point`].
    pub fn tangent(&self, base: &SurfacePoint, v: Vector) -> GeometryResult<TangentVector> {
        self.check_len(&v)?;
        let scale = v.norm() * base.0.norm();
        let residual = match self.kind {
            ModelKind::Euclidean => v[0].abs(),
            _ => self.g_dot(&base.0, &v).abs(),
        };
        if !(residual <= self.tol.reproject_limit * scale.max(1.0)) {
            return Err(GeometryError::NotTangent { residual });
        }
        Ok(self.project_to_tangent(base, &v))
    }

    /// Metric gradient: the tangent vector `n` with `<Gn, v> = <grad, v>` for all tangent `v`.
    pub fn gradient_to_tangent(&self, base: &SurfacePoint, grad: &Vector) -> TangentVector {
        match self.kind {
            ModelKind::Euclidean => self.project_to_tangent(base, grad),
            _ => self.project_to_tangent(base, &self.g_apply(grad)),
        }
    }

    /// `sqrt(<Gv, v>)`.
    pub fn tangent_norm(&self, v: &TangentVector) -> f64 {
        self.g_dot(&v.v, &v.v).max(0.0).sqrt()
    }

    pub fn normalize_tangent(&self, v: &TangentVector) -> GeometryResult<TangentVector> {
        let n = self.tangent_norm(v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeometryError::ZeroTangent);
        }
        Ok(TangentVector {
            base: v.base.clone(),
            v: &v.v / n,
        })
    }

    /// Oriented geodesic through `p` with initial direction `u` (any positive length).
    pub fn geodesic(&self, p: &SurfacePoint, u: &TangentVector) -> GeometryResult<OrientedGeodesic> {
        let u = self.normalize_tangent(&self.project_to_tangent(p, &u.v))?;
        Ok(OrientedGeodesic::canonical(*self, p.0.clone(), u.v))
    }

    /// Exponential map `exp_x(v)`.
    pub fn exp(&self, v: &TangentVector) -> SurfacePoint {
        let x = &v.base.0;
        let len = self.tangent_norm(v);
        if len == 0.0 {
            return v.base.clone();
        }
        let dir = &v.v / len;
        let y = match self.kind {
            ModelKind::Euclidean => x + dir * len,
            ModelKind::Spherical => x * len.cos() + dir * len.sin(),
            ModelKind::Hyperbolic => x * len.cosh() + dir * len.sinh(),
        };
        self.project_point(&y).unwrap_or_else(|_| SurfacePoint(y))
    }

    /// Geodesic distance between two points.
    pub fn distance(&self, p: &SurfacePoint, q: &SurfacePoint) -> f64 {
        let diff = &q.0 - &p.0;
        match self.kind {
            ModelKind::Euclidean => diff.norm(),
            ModelKind::Spherical => 2.0 * (0.5 * diff.norm()).min(1.0).asin(),
            ModelKind::Hyperbolic => 2.0 * (0.5 * self.g_dot(&diff, &diff).max(0.0).sqrt()).asinh(),
        }
    }

    /// Oriented geodesic from `p` towards `q`.
    pub fn geodesic_through(&self, p: &SurfacePoint, q: &SurfacePoint) -> GeometryResult<OrientedGeodesic> {
        let tol = self.tol.degenerate_chord;
        let diff = &q.0 - &p.0;
        if diff.norm() <= tol {
            return Err(GeometryError::DegenerateChord);
        }
        if self.kind == ModelKind::Spherical && (&q.0 + &p.0).norm() <= tol {
            return Err(GeometryError::DegenerateChord);
        }
        let w = match self.kind {
            ModelKind::Euclidean => self.project_to_tangent(p, &diff),
            _ => self.project_to_tangent(p, &q.0),
        };
        let w = self.normalize_tangent(&w).map_err(|_| GeometryError::DegenerateChord)?;
        Ok(OrientedGeodesic::canonical(*self, p.0.clone(), w.v))
    }

    /// Mirror image of `v` in the hyperplane `G`-orthogonal to `n`.
    pub fn reflect_tangent(&self, v: &TangentVector, n: &TangentVector) -> GeometryResult<TangentVector> {
        let nn = self.g_dot(&n.v, &n.v);
        if !(nn > self.tol.zero_normal) {
            return Err(GeometryError::ZeroNormal(nn));
        }
        let k = 2.0 * self.g_dot(&v.v, &n.v) / nn;
        Ok(TangentVector {
            base: v.base.clone(),
            v: &v.v - &n.v * k,
        })
    }

    /// Linear map of `R^{d+1}` that fixes `y`, fixes the tangent hyperplane
    /// `G`-orthogonal to `n` in `T_yΣ`, and sends `n` to `-n`.
    ///
    /// In the Euclidean model this is the affine reflection in the chart.
    pub fn reflection_matrix(&self, y: &SurfacePoint, n: &TangentVector) -> Matrix {
        let nn = self.g_dot(&n.v, &n.v);
        let mut phi = self.g_apply(&n.v);
        if self.kind == ModelKind::Euclidean {
            phi[0] -= self.g_dot(&n.v, &y.0) / y.0[0];
        }
        let dim = self.ambient_dim();
        Matrix::identity(dim, dim) - (&n.v * phi.transpose()) * (2.0 / nn)
    }
}

impl OrientedGeodesic {
    /// Canonicalizes a (point, unit tangent) pair; both inputs must already satisfy the model equations.
    pub(crate) fn canonical(form: SpaceForm, p: Vector, u: Vector) -> Self {
        let (p, u) = canonicalize(&form, p, u);
        OrientedGeodesic { form, p, u }
    }

    pub fn form(&self) -> &SpaceForm {
        &self.form
    }

    pub fn base(&self) -> &Vector {
        &self.p
    }

    pub fn direction(&self) -> &Vector {
        &self.u
    }

    pub fn base_point(&self) -> SurfacePoint {
        SurfacePoint(self.p.clone())
    }

    /// Point at arclength `t` from the base point.
    pub fn point_at(&self, t: f64) -> SurfacePoint {
        SurfacePoint(self.ambient_at(t))
    }

    pub(crate) fn ambient_at(&self, t: f64) -> Vector {
        match self.form.kind {
            ModelKind::Euclidean => &self.p + &self.u * t,
            ModelKind::Spherical => &self.p * t.cos() + &self.u * t.sin(),
            ModelKind::Hyperbolic => &self.p * t.cosh() + &self.u * t.sinh(),
        }
    }

    /// Unit velocity at arclength `t`.
    pub fn velocity_at(&self, t: f64) -> TangentVector {
        let v = match self.form.kind {
            ModelKind::Euclidean => self.u.clone(),
            ModelKind::Spherical => &self.p * (-t.sin()) + &self.u * t.cos(),
            ModelKind::Hyperbolic => &self.p * t.sinh() + &self.u * t.cosh(),
        };
        TangentVector {
            base: self.point_at(t),
            v,
        }
    }

    /// Same geodesic with the opposite orientation.
    pub fn reverse(&self) -> OrientedGeodesic {
        OrientedGeodesic {
            form: self.form,
            p: self.p.clone(),
            u: -&self.u,
        }
    }

    /// Re-runs canonicalization; a no-op on values produced by this crate.
    pub fn canonicalized(&self) -> OrientedGeodesic {
        OrientedGeodesic::canonical(self.form, self.p.clone(), self.u.clone())
    }

    /// Oriented unit bivector of the spanning 2-plane, as an antisymmetric matrix
    /// of Frobenius norm 1.
    pub fn unit_bivector(&self) -> Matrix {
        let e1 = self.p.normalize();
        let mut e2 = &self.u - &e1 * e1.dot(&self.u);
        e2.normalize_mut();
        (&e1 * e2.transpose() - &e2 * e1.transpose()) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Squared Frobenius norm of `p ∧ u = p u^T - u p^T`.
    pub fn wedge_norm_sq(&self) -> f64 {
        let pp = self.p.norm_squared();
        let uu = self.u.norm_squared();
        let pu = self.p.dot(&self.u);
        2.0 * (pp * uu - pu * pu).max(0.0)
    }

    /// Same geodesic, represented through two other points of it.
    ///
    /// The result is mathematically equal to `self` but carries independent
    /// rounding, which is how noise floors are measured.
    pub fn rebased(&self, t1: f64, t2: f64) -> GeometryResult<OrientedGeodesic> {
        let (a, b) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        self.form.geodesic_through(&self.point_at(a), &self.point_at(b))
    }
}

/// Frobenius distance of the oriented unit bivectors.
pub fn geodesic_distance(a: &OrientedGeodesic, b: &OrientedGeodesic) -> f64 {
    (a.unit_bivector() - b.unit_bivector()).norm()
}

fn canonicalize(form: &SpaceForm, p: Vector, u: Vector) -> (Vector, Vector) {
    match form.kind {
        ModelKind::Euclidean => {
            let mut u = u;
            u[0] = 0.0;
            let n = u.norm();
            u /= n;
            let s = p.dot(&u);
            let mut p = if s.abs() <= CANONICAL_SHIFT_EPS * (1.0 + p.norm()) {
                p
            } else {
                &p - &u * s
            };
            p[0] = 1.0;
            (p, u)
        }
        ModelKind::Spherical => {
            let j = (0..p.len())
                .find(|&j| p[j].hypot(u[j]) > SPHERICAL_TIE_EPS)
                .unwrap_or(0);
            let t = u[j].atan2(p[j]);
            if t.abs() <= CANONICAL_SHIFT_EPS {
                return (p, u);
            }
            let (s, c) = t.sin_cos();
            let mut p2 = &p * c + &u * s;
            let mut u2 = &u * c - &p * s;
            p2.normalize_mut();
            let k = u2.dot(&p2);
            u2 -= &p2 * k;
            u2.normalize_mut();
            (p2, u2)
        }
        ModelKind::Hyperbolic => {
            let t = (-u[0] / p[0]).atanh();
            if t.abs() <= CANONICAL_SHIFT_EPS {
                return (p, u);
            }
            let (s, c) = (t.sinh(), t.cosh());
            let mut p2 = &p * c + &u * s;
            let mut u2 = &p * s + &u * c;
            p2 /= (-form.g_dot(&p2, &p2)).sqrt();
            let k = form.g_dot(&p2, &u2);
            u2 += &p2 * k;
            u2 /= form.g_dot(&u2, &u2).sqrt();
            (p2, u2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn random_point(form: &SpaceForm, rng: &mut ChaCha8Rng) -> SurfacePoint {
        let mut x = Vector::from_fn(form.ambient_dim(), |_, _| rng.random_range(-1.0..1.0));
        match form.kind() {
            ModelKind::Euclidean => x[0] = 1.0,
            ModelKind::Hyperbolic => x[0] = 1.0 + x.rows(1, form.dim()).norm(),
            ModelKind::Spherical => {}
        }
        form.project_point(&x).unwrap()
    }

    fn random_tangent(form: &SpaceForm, base: &SurfacePoint, rng: &mut ChaCha8Rng) -> TangentVector {
        let x = Vector::from_fn(form.ambient_dim(), |_, _| rng.random_range(-1.0..1.0));
        form.project_to_tangent(base, &x)
    }

    #[test]
    fn geodesic_point_examples() {
        let e = SpaceForm::euclidean(3).unwrap();
        let l = e
            .geodesic(&e.origin(), &e.tangent(&e.origin(), v(&[0., 1., 0., 0.])).unwrap())
            .unwrap();
        assert_eq!(l.point_at(2.0).coords(), &v(&[1., 2., 0., 0.]));

        let s = SpaceForm::spherical(3).unwrap();
        let l = s
            .geodesic(&s.origin(), &s.tangent(&s.origin(), v(&[0., 1., 0., 0.])).unwrap())
            .unwrap();
        let q = l.point_at(PI / 2.0);
        assert_abs_diff_eq!(q.coords(), &v(&[0., 1., 0., 0.]), epsilon = 1e-15);

        let h = SpaceForm::hyperbolic(3).unwrap();
        let l = h
            .geodesic(&h.origin(), &h.tangent(&h.origin(), v(&[0., 1., 0., 0.])).unwrap())
            .unwrap();
        let q = l.point_at(1.0);
        assert_abs_diff_eq!(q.coords(), &v(&[1f64.cosh(), 1f64.sinh(), 0., 0.]), epsilon = 1e-15);
        assert_abs_diff_eq!(h.g_dot(q.coords(), q.coords()), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn geodesic_through_examples() {
        let e = SpaceForm::euclidean(3).unwrap();
        let p = e.point(v(&[1., 0., 0., 0.])).unwrap();
        let q = e.point(v(&[1., 3., 0., 0.])).unwrap();
        let l = e.geodesic_through(&p, &q).unwrap();
        assert_eq!(l.direction(), &v(&[0., 1., 0., 0.]));

        let s = SpaceForm::spherical(3).unwrap();
        let q = s.point(v(&[0., 0., 1., 0.])).unwrap();
        let l = s.geodesic_through(&s.origin(), &q).unwrap();
        assert_abs_diff_eq!(l.direction(), &v(&[0., 0., 1., 0.]), epsilon = 1e-15);
        assert_abs_diff_eq!(l.base(), &v(&[1., 0., 0., 0.]), epsilon = 1e-15);

        let anti = s.point(v(&[-1., 0., 0., 0.])).unwrap();
        assert_eq!(s.geodesic_through(&s.origin(), &anti), Err(GeometryError::DegenerateChord));
        assert_eq!(s.geodesic_through(&s.origin(), &s.origin()), Err(GeometryError::DegenerateChord));
    }

    #[test]
    fn geodesic_through_orients_towards_second_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for form in ModelKind::ALL.map(|k| SpaceForm::new(k, 3).unwrap()) {
            for _ in 0..200 {
                let p = random_point(&form, &mut rng);
                let q = random_point(&form, &mut rng);
                let l = form.geodesic_through(&p, &q).unwrap();
                // locate both points on the canonical geodesic by their distance from the base
                let tp = signed_param(&l, &p);
                let tq = signed_param(&l, &q);
                assert_abs_diff_eq!(l.point_at(tp).coords(), p.coords(), epsilon = 1e-9);
                assert_abs_diff_eq!(l.point_at(tq).coords(), q.coords(), epsilon = 1e-9);
                let mut gap = tq - tp;
                if form.kind() == ModelKind::Spherical {
                    gap = gap.rem_euclid(2.0 * PI);
                    assert!(gap < PI);
                }
                assert!(gap > 0.0, "{form:?} gap {gap}");
            }
        }
    }

    fn signed_param(l: &OrientedGeodesic, x: &SurfacePoint) -> f64 {
        let f = l.form();
        let a = f.g_dot(x.coords(), l.base());
        let b = f.g_dot(x.coords(), l.direction());
        match f.kind() {
            ModelKind::Euclidean => (x.coords() - l.base()).dot(l.direction()),
            ModelKind::Spherical => b.atan2(a),
            ModelKind::Hyperbolic => b.asinh(),
        }
    }

    #[test]
    fn reflect_tangent_examples() {
        let s = SpaceForm::spherical(3).unwrap();
        let o = s.origin();
        let n = s.tangent(&o, v(&[0., 0.3, -0.2, 0.5])).unwrap();
        let r = s.reflect_tangent(&n, &n).unwrap();
        assert_abs_diff_eq!(r.vector(), &(-n.vector()), epsilon = 1e-15);

        let grazing = s.tangent(&o, v(&[0., 0.2, 0.3, 0.0])).unwrap();
        let n2 = s.tangent(&o, v(&[0., 0.3, -0.2, 0.7])).unwrap();
        assert_abs_diff_eq!(s.g_dot(grazing.vector(), n2.vector()), 0.0, epsilon = 1e-15);
        let r = s.reflect_tangent(&grazing, &n2).unwrap();
        assert_abs_diff_eq!(r.vector(), grazing.vector(), epsilon = 1e-15);

        let zero = s.tangent(&o, Vector::zeros(4)).unwrap();
        assert!(matches!(s.reflect_tangent(&n, &zero), Err(GeometryError::ZeroNormal(_))));
    }

    #[test]
    fn reflections_preserve_metric_and_are_involutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for form in ModelKind::ALL.map(|k| SpaceForm::new(k, 3).unwrap()) {
            for _ in 0..10_000 {
                let x = random_point(&form, &mut rng);
                let a = random_tangent(&form, &x, &mut rng);
                let n = random_tangent(&form, &x, &mut rng);
                if form.g_dot(n.vector(), n.vector()) < 1e-3 {
                    continue;
                }
                let b = form.reflect_tangent(&a, &n).unwrap();
                let scale = form.g_dot(a.vector(), a.vector()).max(1.0);
                let drift = (form.g_dot(b.vector(), b.vector()) - form.g_dot(a.vector(), a.vector())).abs();
                assert!(drift <= 1e-12 * scale, "{form:?} drift {drift:e}");
                let back = form.reflect_tangent(&b, &n).unwrap();
                assert_abs_diff_eq!(back.vector(), a.vector(), epsilon = 1e-12 * scale);
            }
        }
    }

    #[test]
    fn exponential_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for form in ModelKind::ALL.map(|k| SpaceForm::new(k, 4).unwrap()) {
            for _ in 0..100 {
                let x = random_point(&form, &mut rng);
                let w = random_tangent(&form, &x, &mut rng);
                let l = form.geodesic(&x, &w).unwrap();
                let h = 1e-6;
                let t0 = 0.3;
                let fd = (l.ambient_at(t0 + h) - l.ambient_at(t0 - h)) / (2.0 * h);
                assert_abs_diff_eq!(&fd, l.velocity_at(t0).vector(), epsilon = 1e-6);
                for t in [-2.0, -0.5, 0.0, 0.7, 3.0] {
                    assert!(form.model_residual(l.point_at(t).coords()) <= 1e-10);
                }
                assert_eq!(l.point_at(0.0).coords(), l.base());
                assert_abs_diff_eq!(form.g_dot(l.direction(), l.direction()), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn canonical_form_is_idempotent_and_reverse_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for form in ModelKind::ALL.map(|k| SpaceForm::new(k, 3).unwrap()) {
            for _ in 0..500 {
                let x = random_point(&form, &mut rng);
                let w = random_tangent(&form, &x, &mut rng);
                let l = form.geodesic(&x, &w).unwrap();
                let again = l.canonicalized();
                assert_abs_diff_eq!(again.base(), l.base(), epsilon = 1e-14);
                assert_abs_diff_eq!(again.direction(), l.direction(), epsilon = 1e-14);
                assert_eq!(l.reverse().reverse(), l);
                let r = l.reverse();
                assert_abs_diff_eq!(r.unit_bivector(), -l.unit_bivector(), epsilon = 1e-15);
                assert_abs_diff_eq!(geodesic_distance(&l, &r), 2.0, epsilon = 1e-12);
                // span has rank 2
                assert!(l.wedge_norm_sq() > 1e-6);
            }
        }
    }

    #[test]
    fn spherical_tie_breaks_lexicographically() {
        let s = SpaceForm::spherical(3).unwrap();
        // great circle in the plane x0 = x1 = 0
        let p = s.point(v(&[0., 0., 1., 0.])).unwrap();
        let w = s.tangent(&p, v(&[0., 0., 0., 1.])).unwrap();
        let l = s.geodesic(&p, &w).unwrap();
        assert_abs_diff_eq!(l.base(), &v(&[0., 0., 1., 0.]), epsilon = 1e-15);
        let q = s.point(v(&[0., 0., -0.6, 0.8])).unwrap();
        let wq = s.tangent(&q, v(&[0., 0., -0.8, -0.6])).unwrap();
        let l2 = s.geodesic(&q, &wq).unwrap();
        assert_abs_diff_eq!(l2.base(), &v(&[0., 0., 1., 0.]), epsilon = 1e-15);
        assert_abs_diff_eq!(geodesic_distance(&l, &l2), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn distance_examples() {
        let e = SpaceForm::euclidean(3).unwrap();
        let o = e.origin();
        let l1 = e.geodesic(&o, &e.tangent(&o, v(&[0., 1., 0., 0.])).unwrap()).unwrap();
        let l2 = e.geodesic(&o, &e.tangent(&o, v(&[0., 0., 1., 0.])).unwrap()).unwrap();
        assert_eq!(geodesic_distance(&l1, &l1), 0.0);
        // B1 - B2 has four entries of magnitude 1/sqrt(2)
        assert_abs_diff_eq!(geodesic_distance(&l1, &l2), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(geodesic_distance(&l1, &l1.reverse()), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn point_constructor_reprojects_or_rejects() {
        let s = SpaceForm::spherical(2).unwrap();
        let p = s.point(v(&[1.0 + 1e-9, 0., 0.])).unwrap();
        assert!(s.model_residual(p.coords()) <= 1e-12);
        assert!(matches!(s.point(v(&[1.1, 0., 0.])), Err(GeometryError::ModelViolation { .. })));
        let h = SpaceForm::hyperbolic(2).unwrap();
        assert!(h.point(v(&[-1., 0., 0.])).is_err());
        assert!(matches!(SpaceForm::euclidean(1), Err(GeometryError::InvalidDimension(1))));
        assert!(matches!(
            s.point(v(&[1., 0.])),
            Err(GeometryError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn reflection_matrix_fixes_base_and_flips_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for form in ModelKind::ALL.map(|k| SpaceForm::new(k, 3).unwrap()) {
            for _ in 0..50 {
                let y = random_point(&form, &mut rng);
                let n = random_tangent(&form, &y, &mut rng);
                let t = random_tangent(&form, &y, &mut rng);
                let r = form.reflection_matrix(&y, &n);
                assert_abs_diff_eq!(&r * y.coords(), y.coords().clone(), epsilon = 1e-12);
                assert_abs_diff_eq!(&r * n.vector(), -n.vector(), epsilon = 1e-12);
                let reflected = form.reflect_tangent(&t, &n).unwrap();
                assert_abs_diff_eq!(&r * t.vector(), reflected.vector().clone(), epsilon = 1e-12);
                assert_abs_diff_eq!(&r * &r, Matrix::identity(4, 4), epsilon = 1e-12);
            }
        }
    }
}
