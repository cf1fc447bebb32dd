use rand::Rng;
use serde::Serialize;

use crate::billiard::{random_unit, ConvexHypersurface};
use crate::linalg::normalize_max_abs;
use crate::quadric::ConfocalPencil;
use crate::rng::{salt, sample_rng};
use crate::spaceform::{Matrix, ModelKind, SpaceForm, SurfacePoint, Vector};
use crate::subspace::{orthogonal_polarity, principal_angle_distance, pseudo_symmetry, SubspaceBasis};

/// Outcome of a seeded property check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub model: ModelKind,
    /// Samples on which the property was evaluated.
    pub evaluated: usize,
    /// Samples excluded by the property's hypotheses.
    pub excluded: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub failures: usize,
}

impl CheckSummary {
    fn new(name: &str, model: ModelKind, tolerance: f64) -> Self {
        CheckSummary {
            name: name.to_string(),
            model,
            evaluated: 0,
            excluded: 0,
            max_error: 0.0,
            tolerance,
            failures: 0,
        }
    }

    fn record(&mut self, err: f64) {
        self.evaluated += 1;
        if err.is_nan() || err > self.tolerance {
            self.failures += 1;
        }
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
        }
    }
}

/// Smallest admissible Gram determinant when drawing random subspaces.
const SAMPLING_ISOTROPY: f64 = 1e-2;

/// Polarity conjugates pseudo-symmetries: `(I_V L)^⊥ = I_{V^⊥} L^⊥`.
///
/// Draws `n` subspaces `V`; those without a pseudo-symmetry (or with
/// `|det Gram| < 1e-2`) are counted as excluded.
pub fn pseudo_symmetry_check(form: &SpaceForm, n: usize, seed: u64, tolerance: f64) -> CheckSummary {
    let mut summary = CheckSummary::new("pseudo_symmetry_conjugation", form.kind(), tolerance);
    let dim = form.ambient_dim();
    for i in 0..n {
        let mut rng = sample_rng(seed, salt::CHECK, i as u64);
        let k = rng.random_range(1..dim);
        let m = rng.random_range(1..dim);
        let random_basis = |rng: &mut rand_chacha::ChaCha8Rng, k: usize| {
            SubspaceBasis::new(Matrix::from_fn(dim, k, |_, _| rng.random_range(-1.0..1.0)))
        };
        let (Ok(v), Ok(l)) = (random_basis(&mut rng, k), random_basis(&mut rng, m)) else {
            summary.excluded += 1;
            continue;
        };
        let vp = orthogonal_polarity(&v);
        let (Ok(iv), Ok(ivp)) = (pseudo_symmetry(&v, form), pseudo_symmetry(&vp, form)) else {
            summary.excluded += 1;
            continue;
        };
        if v.gram_determinant(form) < SAMPLING_ISOTROPY || vp.gram_determinant(form) < SAMPLING_ISOTROPY {
            summary.excluded += 1;
            continue;
        }
        let lhs = l.transformed(&iv).map(|x| orthogonal_polarity(&x));
        let rhs = orthogonal_polarity(&l).transformed(&ivp);
        let err = match (lhs, rhs) {
            (Ok(a), Ok(b)) => principal_angle_distance(&a, &b),
            _ => f64::NAN,
        };
        summary.record(err);
    }
    summary
}

/// The cone from `y ∈ S_{λ_s}` circumscribed about `U = S_{λ_u}` is symmetric
/// under the reflection in `T_y S`: `RᵀCR = ±C` after normalization.
pub fn cone_symmetry_check(
    pencil: &ConfocalPencil,
    lambda_u: f64,
    lambda_s: f64,
    n: usize,
    seed: u64,
    tolerance: f64,
) -> crate::error::GeometryResult<CheckSummary> {
    let form = *pencil.form();
    let u = pencil.member(lambda_u)?;
    let s = ConvexHypersurface::from_quadric(&pencil.member(lambda_s)?)?;
    let mut summary = CheckSummary::new("cone_symmetry", form.kind(), tolerance);
    for i in 0..n {
        let mut rng = sample_rng(seed, salt::CHECK, i as u64);
        let y = s.sample_boundary(&mut rng);
        let (Ok(cone), Ok(normal)) = (u.circumscribed_cone(&y), s.outward_normal(&y)) else {
            summary.excluded += 1;
            continue;
        };
        let r = form.reflection_matrix(&y, &normal);
        let c = cone.matrix();
        let err = match normalize_max_abs(&(r.transpose() * c * &r)) {
            Some(image) => (&image - c).amax().min((&image + c).amax()),
            None => f64::NAN,
        };
        summary.record(err);
    }
    Ok(summary)
}

fn random_probe<R: Rng>(form: &SpaceForm, rng: &mut R) -> Option<SurfacePoint> {
    let d = form.dim();
    match form.kind() {
        ModelKind::Euclidean => {
            let mut x = Vector::zeros(d + 1);
            x[0] = 1.0;
            for j in 1..=d {
                let mag = rng.random_range(0.05..2.0);
                x[j] = if rng.random::<bool>() { mag } else { -mag };
            }
            Some(crate::spaceform::SurfacePoint(x))
        }
        ModelKind::Spherical => form.project_point(&random_unit(rng, d + 1)).ok(),
        ModelKind::Hyperbolic => {
            let mut x = random_unit(rng, d + 1) * rng.random_range(0.1..1.5);
            x[0] = (1.0 + x.rows(1, d).norm_squared()).sqrt();
            form.project_point(&x).ok()
        }
    }
}

/// Through a generic point pass exactly `d` members, pairwise `G`-orthogonal.
pub fn orthogonality_check(pencil: &ConfocalPencil, n: usize, seed: u64, tolerance: f64) -> CheckSummary {
    let form = *pencil.form();
    let d = form.dim();
    let mut summary = CheckSummary::new("confocal_orthogonality", form.kind(), tolerance);
    for i in 0..n {
        let mut rng = sample_rng(seed, salt::CHECK, i as u64);
        let Some(y) = random_probe(&form, &mut rng) else {
            summary.excluded += 1;
            continue;
        };
        let roots = match pencil.confocal_parameters_through(&y) {
            Ok(r) => r,
            Err(_) => {
                summary.record(f64::NAN);
                continue;
            }
        };
        if roots.len() != d {
            summary.record(f64::INFINITY);
            continue;
        }
        let normals: Option<Vec<Vector>> = roots
            .iter()
            .map(|&l| {
                let q = pencil.member(l).ok()?;
                q.normal_at(&y).ok().map(|n| n.vector().clone())
            })
            .collect();
        let Some(normals) = normals else {
            summary.record(f64::NAN);
            continue;
        };
        let mut err = 0.0f64;
        for a in 0..d {
            for b in a + 1..d {
                err = err.max(form.g_dot(&normals[a], &normals[b]).abs());
            }
        }
        summary.record(err);
    }
    summary
}
