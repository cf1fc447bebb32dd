//! Convex bodies on `Σ` and the billiard map on oriented geodesics.
//!
//! `σ_g` reflects a geodesic at its exit point from the body bounded by `g`
//! and leaves geodesics that miss (or only touch) `g` alone.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, GeometryResult};
use crate::linalg::{orthogonal_complement, orthonormal_columns, sorted_symmetric_eigen};
use crate::quadric::Quadric;
use crate::spaceform::{Matrix, ModelKind, OrientedGeodesic, SpaceForm, SurfacePoint, TangentVector, Vector};

/// Scalar field on the Euclidean chart `{x_0 = 1}`, negative inside the body.
pub trait ImplicitField: Send + Sync + fmt::Debug {
    /// Value at ambient coordinates `x` (with `x_0 = 1`).
    fn value(&self, x: &Vector) -> f64;

    /// Ambient gradient with zero `x_0` component. Central differences by default.
    fn gradient(&self, x: &Vector) -> Vector {
        let h = 1e-6 * (1.0 + x.norm());
        let mut g = Vector::zeros(x.len());
        for i in 1..x.len() {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            g[i] = (self.value(&a) - self.value(&b)) / (2.0 * h);
        }
        g
    }
}

/// `Σ (x_j/a_j)² - 1 + ε (x_1/a_1)³`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicBumpField {
    pub semiaxes: Vec<f64>,
    pub epsilon: f64,
}

impl ImplicitField for CubicBumpField {
    fn value(&self, x: &Vector) -> f64 {
        let mut s = -1.0;
        for (j, a) in self.semiaxes.iter().enumerate() {
            let xi = x[j + 1] / a;
            s += xi * xi;
        }
        let x1 = x[1] / self.semiaxes[0];
        s + self.epsilon * x1 * x1 * x1
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(x.len());
        for (j, a) in self.semiaxes.iter().enumerate() {
            g[j + 1] = 2.0 * x[j + 1] / (a * a);
        }
        let a1 = self.semiaxes[0];
        let x1 = x[1] / a1;
        g[1] += 3.0 * self.epsilon * x1 * x1 / a1;
        g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    /// First semiaxis scaled by `1 + ε`; the surface stays a quadric.
    AxisBump,
    /// Cubic term `ε (x_1/a_1)³` added to the ellipsoid equation.
    CubicBump,
}

impl PerturbationMode {
    pub fn name(self) -> &'static str {
        match self {
            PerturbationMode::AxisBump => "axis_bump",
            PerturbationMode::CubicBump => "cubic_bump",
        }
    }
}

#[derive(Clone, Debug)]
enum Body {
    /// Interior `<Mx,x> > 0` on the nappe around the chart center.
    Quadric { quadric: Quadric, m: Matrix },
    Implicit(Arc<dyn ImplicitField>),
}

/// Projective chart `y ↦ [center + axes·y]`; the unit ball maps onto the body for quadrics.
#[derive(Clone, Debug)]
struct Chart {
    center: Vector,
    axes: Matrix,
}

/// A closed strictly convex hypersurface bounding a compact body.
#[derive(Clone, Debug)]
pub struct ConvexHypersurface {
    form: SpaceForm,
    body: Body,
    chart: Chart,
    radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Intersection {
    /// Arclength parameter along the geodesic (spherical: in `[0, 2π)`).
    pub t: f64,
    pub point: SurfacePoint,
    velocity: Vector,
}

impl Intersection {
    /// Unit velocity of the geodesic at this point.
    pub fn velocity(&self) -> TangentVector {
        TangentVector {
            base: self.point.clone(),
            v: self.velocity.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExitPoint {
    pub t: f64,
    pub point: SurfacePoint,
    pub velocity: TangentVector,
    pub outward: TangentVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionKind {
    Reflected,
    FixedDisjoint,
    FixedTangent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionOutcome {
    pub result: OrientedGeodesic,
    pub kind: ReflectionKind,
    pub impact: Option<SurfacePoint>,
}

impl ConvexHypersurface {
    /// Body bounded by a quadric whose cone `<Qx,x> = 0` has a convex nappe
    /// meeting `Σ` in a compact set (inside an open hemisphere on the sphere).
    pub fn from_quadric(quadric: &Quadric) -> GeometryResult<Self> {
        let form = *quadric.form();
        let q = quadric.matrix();
        let (values, _) = sorted_symmetric_eigen(q);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let eps = 1e-12 * scale;
        let pos = values.iter().filter(|v| **v > eps).count();
        let neg = values.iter().filter(|v| **v < -eps).count();
        let n = form.ambient_dim();
        let m = if pos == 1 && neg == n - 1 {
            q.clone()
        } else if neg == 1 && pos == n - 1 {
            -q
        } else {
            return Err(GeometryError::NotConvexBody(format!(
                "cone signature ({pos},{neg}) is not (1,{})",
                n - 1
            )));
        };
        let (chart, radius) = match form.kind() {
            ModelKind::Euclidean => euclidean_chart(&m)?,
            ModelKind::Spherical => spherical_chart(&m)?,
            ModelKind::Hyperbolic => hyperbolic_chart(&form, &m)?,
        };
        Ok(ConvexHypersurface {
            form,
            body: Body::Quadric {
                quadric: quadric.clone(),
                m,
            },
            chart,
            radius,
        })
    }

    /// Euclidean body `{F < 0}` inside the ball of the given center and radius.
    ///
    /// The field must be negative at the center, positive on the bounding
    /// sphere, and its zero set strictly convex; the latter is checked by a
    /// finite-difference second fundamental form at `checks` boundary points.
    pub fn implicit(
        form: SpaceForm,
        field: Arc<dyn ImplicitField>,
        center: Vector,
        radius: f64,
        checks: usize,
    ) -> GeometryResult<Self> {
        if form.kind() != ModelKind::Euclidean {
            return Err(GeometryError::UnsupportedModel(form.kind().name()));
        }
        let center = form.point(center)?.into_inner();
        if !(field.value(&center) < 0.0) {
            return Err(GeometryError::NotConvexBody("field is not negative at the center".into()));
        }
        let d = form.dim();
        let mut axes = Matrix::zeros(d + 1, d);
        for i in 0..d {
            axes[(i + 1, i)] = radius;
        }
        let surface = ConvexHypersurface {
            form,
            body: Body::Implicit(field),
            chart: Chart { center, axes },
            radius,
        };
        surface.check_convexity(checks)?;
        Ok(surface)
    }

    /// Ellipsoid `Σ x_j²/a_j² = 1` with a perturbation of size `ε`.
    pub fn perturbed_ellipsoid(semiaxes: &[f64], epsilon: f64, mode: PerturbationMode) -> GeometryResult<Self> {
        if semiaxes.len() < 2 || !semiaxes.iter().all(|a| a.is_finite() && *a > 0.0) || !epsilon.is_finite() {
            return Err(GeometryError::InvalidAxes);
        }
        let form = SpaceForm::euclidean(semiaxes.len())?;
        if epsilon == 0.0 || mode == PerturbationMode::AxisBump {
            let mut axes = semiaxes.to_vec();
            axes[0] *= 1.0 + epsilon;
            if !(axes[0] > 0.0) {
                return Err(GeometryError::InvalidAxes);
            }
            let mut diag = vec![-1.0];
            diag.extend(axes.iter().map(|a| 1.0 / (a * a)));
            let q = Quadric::new(form, Matrix::from_diagonal(&Vector::from_vec(diag)))?;
            return Self::from_quadric(&q);
        }
        // radial profile along -x_1: ρ² - |ε|ρ³ = 1 has its first root ρ_near
        // (near component) and a second root ρ_far (far branch of the cubic).
        let e = epsilon.abs();
        let g = |r: f64| r * r - e * r * r * r - 1.0;
        let peak = 2.0 / (3.0 * e);
        if !(g(peak) > 0.0) {
            return Err(GeometryError::ConvexityLost(format!("cubic bump ε = {epsilon} opens the surface")));
        }
        let near = bisect(g, 1.0, peak, 200);
        let far = bisect(g, peak, peak * 2.0 + 2.0, 200);
        let amax = semiaxes.iter().cloned().fold(0.0, f64::max);
        let amin = semiaxes.iter().cloned().fold(f64::INFINITY, f64::min);
        let radius = amax * near * 1.05;
        if !(radius / amin < far) {
            return Err(GeometryError::ConvexityLost(format!(
                "cubic bump ε = {epsilon} too large to isolate the body"
            )));
        }
        let field = CubicBumpField {
            semiaxes: semiaxes.to_vec(),
            epsilon,
        };
        let mut center = Vector::zeros(semiaxes.len() + 1);
        center[0] = 1.0;
        Self::implicit(form, Arc::new(field), center, radius, 1000)
    }

    pub fn form(&self) -> &SpaceForm {
        &self.form
    }

    /// The defining quadric, when the surface is one.
    pub fn quadric(&self) -> Option<&Quadric> {
        match &self.body {
            Body::Quadric { quadric, .. } => Some(quadric),
            Body::Implicit(_) => None,
        }
    }

    /// Center of the bounding ball.
    pub fn center(&self) -> SurfacePoint {
        SurfacePoint(self.chart.center.clone())
    }

    /// Radius of a geodesic ball around [`ConvexHypersurface::center`] containing the body.
    pub fn bounding_radius(&self) -> f64 {
        self.radius
    }

    /// Implicit function: negative inside, zero on the surface, positive outside.
    pub fn value(&self, x: &SurfacePoint) -> f64 {
        match &self.body {
            Body::Quadric { m, .. } => {
                let x = x.coords();
                let v = -x.dot(&(m * x));
                if self.form.kind() == ModelKind::Spherical && x.dot(&self.chart.center) <= 0.0 {
                    v.abs().max(f64::MIN_POSITIVE)
                } else {
                    v
                }
            }
            Body::Implicit(f) => f.value(x.coords()),
        }
    }

    pub fn contains(&self, x: &SurfacePoint) -> bool {
        self.value(x) < 0.0
    }

    /// Outward unit normal at a point of (or near) the surface.
    pub fn outward_normal(&self, x: &SurfacePoint) -> GeometryResult<TangentVector> {
        let grad = match &self.body {
            Body::Quadric { m, .. } => -(m * x.coords()) * 2.0,
            Body::Implicit(f) => f.gradient(x.coords()),
        };
        let n = self.form.gradient_to_tangent(x, &grad);
        self.form.normalize_tangent(&n).map_err(|_| {
            GeometryError::ZeroNormal(self.form.g_dot(n.vector(), n.vector()))
        })
    }

    fn chart_point(&self, y: &Vector) -> SurfacePoint {
        let x = &self.chart.center + &self.chart.axes * y;
        self.form.project_point(&x).expect("chart points lie inside the model")
    }

    /// Point strictly inside the body, `r ≤ 0.999` of the way to the boundary.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> SurfacePoint {
        let d = self.form.dim();
        let w = random_unit(rng, d);
        let r = 0.999 * rng.random::<f64>().powf(1.0 / d as f64);
        match &self.body {
            Body::Quadric { .. } => self.chart_point(&(w * r)),
            Body::Implicit(_) => {
                let b = self.ray_boundary(&w);
                let c = &self.chart.center;
                SurfacePoint(c + (b.coords() - c) * r)
            }
        }
    }

    /// Point on the surface.
    pub fn sample_boundary<R: Rng + ?Sized>(&self, rng: &mut R) -> SurfacePoint {
        let w = random_unit(rng, self.form.dim());
        match &self.body {
            Body::Quadric { .. } => self.chart_point(&w),
            Body::Implicit(_) => self.ray_boundary(&w),
        }
    }

    /// Boundary point in chart direction `w` (unit), by bisection along the ray.
    fn ray_boundary(&self, w: &Vector) -> SurfacePoint {
        let c = self.chart.center.clone();
        let dir = &self.chart.axes * w;
        let f = |s: f64| {
            let x = &c + &dir * s;
            self.value(&SurfacePoint(x))
        };
        let s = bisect(f, 0.0, 1.0, 200);
        let s = newton_polish(f, s, 1e-9);
        SurfacePoint(&c + &dir * s)
    }

    /// True when every sampled boundary point of `self` lies strictly inside `other`.
    pub fn nested_inside(&self, other: &ConvexHypersurface, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).all(|_| {
            let x = self.sample_boundary(&mut rng);
            other.contains(&x)
        })
    }

    /// Intersection points in increasing parameter order: 0, 1 (tangent) or 2.
    pub fn intersect(&self, l: &OrientedGeodesic) -> Vec<Intersection> {
        match self.intersections(l) {
            Crossing::Disjoint => vec![],
            Crossing::Tangent(x) => vec![x],
            Crossing::Transversal(mut pts) => {
                pts.sort_by(|a, b| a.t.total_cmp(&b.t));
                pts.to_vec()
            }
        }
    }

    fn intersections(&self, l: &OrientedGeodesic) -> Crossing {
        match &self.body {
            Body::Quadric { m, .. } => self.quadric_intersections(m, l),
            Body::Implicit(f) => self.implicit_intersections(f.as_ref(), l),
        }
    }

    fn quadric_intersections(&self, m: &Matrix, l: &OrientedGeodesic) -> Crossing {
        let p = l.base();
        let u = l.direction();
        let mp = m * p;
        let mu = m * u;
        let (a, b, c) = (mp.dot(p), mp.dot(u), mu.dot(u));
        let delta = b * b - a * c;
        let normalized = delta / (m.norm_squared() * l.wedge_norm_sq());
        let guard = self.form.tolerances().tangency_guard;
        if normalized.abs() < guard {
            let dir = if c.abs() >= a.abs() { (c, -b) } else { (-b, a) };
            return match self.plane_point(l, dir) {
                Some(x) => Crossing::Tangent(x),
                None => Crossing::Disjoint,
            };
        }
        if delta < 0.0 {
            return Crossing::Disjoint;
        }
        let root = delta.sqrt();
        let q = -(b + root.copysign(b));
        // null directions of a s² + 2b st + c t²
        let dirs = if c.abs() >= a.abs() {
            [(c, q), (q, a)]
        } else {
            [(q, a), (c, q)]
        };
        let pts: Vec<Intersection> = dirs.iter().filter_map(|&d| self.plane_point(l, d)).collect();
        match pts.len() {
            2 => Crossing::Transversal([pts[0].clone(), pts[1].clone()]),
            _ => Crossing::Disjoint,
        }
    }

    /// Surface point `[s p + t u]` on the geodesic, with its parameter and velocity.
    fn plane_point(&self, l: &OrientedGeodesic, (s, t): (f64, f64)) -> Option<Intersection> {
        let p = l.base();
        let u = l.direction();
        let len = s.hypot(t);
        if !(len > 0.0) {
            return None;
        }
        let (s, t) = (s / len, t / len);
        match self.form.kind() {
            ModelKind::Euclidean => {
                if s.abs() < 1e-300 {
                    return None;
                }
                let w = t / s;
                let mut x = p + u * w;
                x[0] = 1.0;
                Some(Intersection {
                    t: w,
                    point: SurfacePoint(x),
                    velocity: u.clone(),
                })
            }
            ModelKind::Spherical => {
                let x = p * s + u * t;
                let (s, t) = if x.dot(&self.chart.center) > 0.0 { (s, t) } else { (-s, -t) };
                let x = p * s + u * t;
                let vel = u * s - p * t;
                Some(Intersection {
                    t: t.atan2(s).rem_euclid(std::f64::consts::TAU),
                    point: SurfacePoint(x),
                    velocity: vel,
                })
            }
            ModelKind::Hyperbolic => {
                let w = t / s;
                if !(w.abs() < 1.0) {
                    return None;
                }
                let k = 1.0 / ((1.0 - w) * (1.0 + w)).sqrt();
                Some(Intersection {
                    t: w.atanh(),
                    point: SurfacePoint((p + u * w) * k),
                    velocity: (p * w + u) * k,
                })
            }
        }
    }

    fn implicit_intersections(&self, f: &dyn ImplicitField, l: &OrientedGeodesic) -> Crossing {
        let p = l.base();
        let u = l.direction();
        let c = &self.chart.center;
        // clip to the bounding ball |p + t u - c| ≤ R
        let off = p - c;
        let bq = off.dot(u);
        let cq = off.norm_squared() - self.radius * self.radius;
        let disc = bq * bq - cq;
        if disc <= 0.0 {
            return Crossing::Disjoint;
        }
        let (t0, t1) = (-bq - disc.sqrt(), -bq + disc.sqrt());
        let at = |t: f64| {
            let mut x = p + u * t;
            x[0] = 1.0;
            x
        };
        let g = |t: f64| f.value(&at(t));
        let n = 64;
        let mut best = (t0, g(t0));
        for i in 1..n {
            let t = t0 + (t1 - t0) * i as f64 / n as f64;
            let v = g(t);
            if v < best.1 {
                best = (t, v);
            }
        }
        let h = (t1 - t0) / n as f64;
        let tmin = golden_min(g, (best.0 - h).max(t0), (best.0 + h).min(t1));
        let fmin = g(tmin);
        if fmin >= 0.0 {
            return Crossing::Disjoint;
        }
        let ra = newton_polish(g, bisect(g, tmin, t0, 200), 1e-9);
        let rb = newton_polish(g, bisect(g, tmin, t1, 200), 1e-9);
        let mk = |t: f64| Intersection {
            t,
            point: SurfacePoint(at(t)),
            velocity: u.clone(),
        };
        Crossing::Transversal([mk(ra.min(rb)), mk(ra.max(rb))])
    }

    /// How far the geodesic is from being tangent: the normalized discriminant
    /// for quadrics, or `|min F| / |∇F|` along the geodesic for implicit surfaces.
    pub fn tangency_defect(&self, l: &OrientedGeodesic) -> f64 {
        match &self.body {
            Body::Quadric { quadric, .. } => quadric.normalized_discriminant(l).abs(),
            Body::Implicit(f) => {
                let p = l.base();
                let u = l.direction();
                let c = &self.chart.center;
                let t0 = -(p - c).dot(u);
                let at = |t: f64| {
                    let mut x = p + u * t;
                    x[0] = 1.0;
                    x
                };
                let g = |t: f64| f.value(&at(t));
                let r = self.radius;
                let n = 64;
                let mut best = (t0 - r, g(t0 - r));
                for i in 1..=n {
                    let t = t0 - r + 2.0 * r * i as f64 / n as f64;
                    let v = g(t);
                    if v < best.1 {
                        best = (t, v);
                    }
                }
                let h = 2.0 * r / n as f64;
                let t = golden_min(g, best.0 - h, best.0 + h);
                let x = at(t);
                f.value(&x).abs() / f.gradient(&x).norm()
            }
        }
    }

    /// Exit point: the intersection where the geodesic points outward.
    pub fn last_intersection(&self, l: &OrientedGeodesic) -> GeometryResult<ExitPoint> {
        let pts = match self.intersections(l) {
            Crossing::Disjoint => return Err(GeometryError::NoIntersection),
            Crossing::Tangent(_) => return Err(GeometryError::TangentGeodesic),
            Crossing::Transversal(pts) => pts,
        };
        let mut best: Option<(f64, ExitPoint)> = None;
        for x in pts {
            let n = self.outward_normal(&x.point)?;
            let s = self.form.g_dot(&x.velocity, n.vector());
            if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
                best = Some((
                    s,
                    ExitPoint {
                        t: x.t,
                        velocity: x.velocity(),
                        point: x.point,
                        outward: n,
                    },
                ));
            }
        }
        let (s, exit) = best.ok_or(GeometryError::NoIntersection)?;
        if !(s > self.form.tolerances().tangency_guard) {
            return Err(GeometryError::TangentGeodesic);
        }
        Ok(exit)
    }

    /// The billiard map `σ`.
    pub fn billiard_reflect(&self, l: &OrientedGeodesic) -> GeometryResult<ReflectionOutcome> {
        let exit = match self.last_intersection(l) {
            Ok(e) => e,
            Err(GeometryError::NoIntersection) => {
                return Ok(ReflectionOutcome {
                    result: l.clone(),
                    kind: ReflectionKind::FixedDisjoint,
                    impact: None,
                })
            }
            Err(GeometryError::TangentGeodesic) => {
                log::trace!("tangent geodesic left fixed");
                return Ok(ReflectionOutcome {
                    result: l.clone(),
                    kind: ReflectionKind::FixedTangent,
                    impact: None,
                });
            }
            Err(e) => return Err(e),
        };
        let reflected = self.form.reflect_tangent(&exit.velocity, &exit.outward)?;
        if !(self.form.g_dot(reflected.vector(), exit.outward.vector()) < 0.0) {
            return Err(GeometryError::TangentGeodesic);
        }
        let result = self.form.geodesic(&exit.point, &reflected)?;
        Ok(ReflectionOutcome {
            result,
            kind: ReflectionKind::Reflected,
            impact: Some(exit.point),
        })
    }

    /// Finite-difference second fundamental form at `samples` boundary points.
    fn check_convexity(&self, samples: usize) -> GeometryResult<()> {
        let Body::Implicit(f) = &self.body else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let d = self.form.dim();
        for _ in 0..samples {
            let x = self.sample_boundary(&mut rng);
            let x = x.coords();
            let g = f.gradient(x);
            let gn = g.norm();
            if !(gn > 0.0) {
                return Err(GeometryError::ConvexityLost("vanishing gradient on the surface".into()));
            }
            let h = 1e-5 * (1.0 + x.norm());
            let mut hess = Matrix::zeros(d, d);
            for i in 0..d {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i + 1] += h;
                b[i + 1] -= h;
                let col = (f.gradient(&a) - f.gradient(&b)) / (2.0 * h);
                for j in 0..d {
                    hess[(j, i)] = col[j + 1];
                }
            }
            let hess = (&hess + hess.transpose()) * 0.5;
            let normal = Matrix::from_column_slice(d, 1, &g.as_slice()[1..]);
            let nb = orthonormal_columns(&normal, 0.0).expect("nonzero gradient");
            let t = orthogonal_complement(&nb);
            let form2 = t.transpose() * hess * &t / gn;
            let (ev, _) = sorted_symmetric_eigen(&form2);
            if !(ev[0] > 1e-8 * form2.amax().max(1.0)) {
                return Err(GeometryError::ConvexityLost(format!(
                    "second fundamental form eigenvalue {:e} at {:?}",
                    ev[0],
                    x.as_slice()
                )));
            }
        }
        Ok(())
    }
}

enum Crossing {
    Disjoint,
    Tangent(Intersection),
    Transversal([Intersection; 2]),
}

pub(crate) fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let len = v.norm();
        if len > 1e-6 {
            return v / len;
        }
    }
}

/// Bisection on `[a, b]` (in either order) for a sign change of `f`.
fn bisect(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let flo = f(lo);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One secant-derivative Newton step, kept only if it moves less than `max_step`.
fn newton_polish(f: impl Fn(f64) -> f64, x: f64, max_step: f64) -> f64 {
    let h = 1e-7 * (1.0 + x.abs());
    let fx = f(x);
    let df = (f(x + h) - f(x - h)) / (2.0 * h);
    if !(df.abs() > 0.0) {
        return x;
    }
    let step = fx / df;
    if step.abs() <= max_step && f(x - step).abs() <= fx.abs() {
        x - step
    } else {
        x
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn euclidean_chart(m: &Matrix) -> GeometryResult<(Chart, f64)> {
    let n = m.nrows();
    let d = n - 1;
    let p = -m.view((1, 1), (d, d)).into_owned();
    let (ev, vecs) = sorted_symmetric_eigen(&p);
    if !(ev[0] > 1e-12 * ev[d - 1].abs()) {
        return Err(GeometryError::NotConvexBody("spatial block is not definite".into()));
    }
    let mv = m.view((1, 0), (d, 1)).into_owned();
    let pinv = p.clone().try_inverse().ok_or(GeometryError::InvalidMatrix)?;
    let center = &pinv * &mv;
    let r = m[(0, 0)] + mv.dot(&center);
    if !(r > 0.0) {
        return Err(GeometryError::NotConvexBody("empty quadric".into()));
    }
    let mut c = Vector::zeros(n);
    c[0] = 1.0;
    c.rows_mut(1, d).copy_from(&center.column(0));
    let mut axes = Matrix::zeros(n, d);
    let mut radius = 0.0f64;
    for i in 0..d {
        let alpha = (r / ev[i]).sqrt();
        radius = radius.max(alpha);
        for j in 0..d {
            axes[(j + 1, i)] = alpha * vecs[(j, i)];
        }
    }
    Ok((Chart { center: c, axes }, radius))
}

fn orient_center(c: &mut Vector) {
    let flip = match c.iter().find(|x| x.abs() > 1e-12) {
        Some(&x) => x < 0.0,
        None => false,
    };
    if flip {
        c.neg_mut();
    }
}

fn spherical_chart(m: &Matrix) -> GeometryResult<(Chart, f64)> {
    let n = m.nrows();
    let (ev, vecs) = sorted_symmetric_eigen(m);
    let k0 = ev[n - 1];
    let mut c: Vector = vecs.column(n - 1).into_owned();
    orient_center(&mut c);
    let mut axes = Matrix::zeros(n, n - 1);
    let mut amax = 0.0f64;
    for i in 0..n - 1 {
        let alpha = (k0 / -ev[i]).sqrt();
        amax = amax.max(alpha);
        axes.set_column(i, &(vecs.column(i) * alpha));
    }
    Ok((Chart { center: c, axes }, amax.atan()))
}

fn hyperbolic_chart(form: &SpaceForm, m: &Matrix) -> GeometryResult<(Chart, f64)> {
    let n = m.nrows();
    let g = form.g_matrix();
    // S-lemma: compact iff -G - τM ≻ 0 for some τ ≥ 0
    let lmin = |tau: f64| sorted_symmetric_eigen(&(-&g - m * tau)).0[0];
    let mut hi = 1.0;
    while lmin(hi) > lmin(hi * 0.5) && hi < 1e12 {
        hi *= 2.0;
    }
    let tau = golden_min(|t| -lmin(t), 0.0, hi);
    if !(lmin(tau) > 1e-12) {
        return Err(GeometryError::NotConvexBody("quadric is not compact in the hyperbolic model".into()));
    }
    let b = -&g - m * tau;
    let chol = nalgebra::Cholesky::new(b).ok_or(GeometryError::InvalidMatrix)?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(GeometryError::InvalidMatrix)?;
    let cm = &linv * m * linv.transpose();
    let (_, z) = sorted_symmetric_eigen(&cm);
    let w = linv.transpose() * z;
    let mut center = None;
    let mut spatial = Vec::new();
    for j in 0..n {
        let col: Vector = w.column(j).into_owned();
        let gamma = form.g_dot(&col, &col);
        let kappa = col.dot(&(m * &col));
        if gamma < 0.0 {
            let scale = (-gamma).sqrt();
            center = Some((col / scale, kappa / -gamma));
        } else {
            let scale = gamma.sqrt();
            spatial.push((col / scale, kappa / gamma));
        }
    }
    let (mut c, k0) = center.ok_or(GeometryError::NotConvexBody("no timelike axis".into()))?;
    if c[0] < 0.0 {
        c.neg_mut();
    }
    if spatial.len() != n - 1 || !(k0 > 0.0) {
        return Err(GeometryError::NotConvexBody("cone is not timelike".into()));
    }
    let mut axes = Matrix::zeros(n, n - 1);
    let mut amax = 0.0f64;
    for (i, (f, k)) in spatial.iter().enumerate() {
        if !(*k < 0.0) {
            return Err(GeometryError::NotConvexBody("cone is not timelike".into()));
        }
        let alpha = (k0 / -k).sqrt();
        amax = amax.max(alpha);
        axes.set_column(i, &(f * alpha));
    }
    if !(amax < 1.0) {
        return Err(GeometryError::NotConvexBody("quadric is not compact in the hyperbolic model".into()));
    }
    Ok((Chart { center: c, axes }, amax.atanh()))
}
