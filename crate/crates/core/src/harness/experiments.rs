use std::time::Instant;

use rand::Rng;

use crate::billiard::{random_unit, ConvexHypersurface, PerturbationMode, ReflectionKind};
use crate::parallel::{map_indexed, Workers};
use crate::quadric::{ConfocalPencil, Quadric};
use crate::rng::{salt, sample_rng};
use crate::spaceform::{geodesic_distance, OrientedGeodesic, TangentVector};

use super::report::{DefectReport, RejectReason};
use super::sampling::{check_nested, sample_chords, sample_tangent_lines, tangent_line_at};
use super::{HarnessError, HarnessResult};

/// Parameters at which a geodesic is re-represented to measure rounding noise.
const REBASE: (f64, f64) = (-0.25, 0.5);
const NESTING_SEED: u64 = 0x6e65_7374;

/// Two nested members of a confocal pencil, optionally with the inner one replaced.
#[derive(Clone, Debug)]
pub struct PairSetup {
    pub pencil: ConfocalPencil,
    pub inner_lambda: f64,
    pub outer_lambda: f64,
    pub inner: ConvexHypersurface,
    pub outer: ConvexHypersurface,
}

impl PairSetup {
    /// Members `λ_inner`, `λ_outer` (pencil parameters, not the Euclidean `μ`).
    pub fn confocal(pencil: ConfocalPencil, inner_lambda: f64, outer_lambda: f64) -> HarnessResult<Self> {
        let inner = ConvexHypersurface::from_quadric(&pencil.member(inner_lambda)?)?;
        let outer = ConvexHypersurface::from_quadric(&pencil.member(outer_lambda)?)?;
        check_nested(&inner, &outer, NESTING_SEED)?;
        Ok(PairSetup {
            pencil,
            inner_lambda,
            outer_lambda,
            inner,
            outer,
        })
    }

    /// Same outer member, different inner surface.
    pub fn with_inner(&self, inner: ConvexHypersurface) -> HarnessResult<Self> {
        check_nested(&inner, &self.outer, NESTING_SEED)?;
        Ok(PairSetup {
            inner,
            ..self.clone()
        })
    }

    /// The unperturbed inner member.
    pub fn inner_member(&self) -> Quadric {
        self.pencil.member(self.inner_lambda).expect("validated at construction")
    }
}

fn reflect(g: &ConvexHypersurface, l: &OrientedGeodesic) -> Result<OrientedGeodesic, RejectReason> {
    match g.billiard_reflect(l) {
        Ok(o) if o.kind == ReflectionKind::FixedTangent => Err(RejectReason::TangencyGuard),
        Ok(o) => Ok(o.result),
        Err(_) => Err(RejectReason::CompositionUndefined),
    }
}

/// `dist(σ_a σ_b L, σ_b σ_a L)`.
pub fn commutation_defect(
    a: &ConvexHypersurface,
    b: &ConvexHypersurface,
    l: &OrientedGeodesic,
) -> Result<f64, RejectReason> {
    let ab = reflect(a, &reflect(b, l)?)?;
    let ba = reflect(b, &reflect(a, l)?)?;
    Ok(geodesic_distance(&ab, &ba))
}

/// Rounding noise of `σ_g σ_g` between two representations of the same geodesic.
fn self_noise(g: &ConvexHypersurface, l: &OrientedGeodesic) -> f64 {
    let Ok(alt) = l.rebased(REBASE.0, REBASE.1) else { return 0.0 };
    let twice = |x: &OrientedGeodesic| reflect(g, &reflect(g, x)?);
    match (twice(l), twice(&alt)) {
        (Ok(x), Ok(y)) => geodesic_distance(&x, &y),
        _ => 0.0,
    }
}

/// Commutation defects on `n` chords through the inner body.
pub fn commutation_test(
    a: &ConvexHypersurface,
    b: &ConvexHypersurface,
    n: usize,
    seed: u64,
    workers: Workers,
) -> HarnessResult<DefectReport> {
    let start = Instant::now();
    let chords = sample_chords(a, b, n, seed, workers)?;
    let rows = map_indexed(chords.len(), workers, |i| {
        let l = &chords[i];
        let defect = commutation_defect(a, b, l);
        let floor = if defect.is_ok() { self_noise(a, l).max(self_noise(b, l)) } else { 0.0 };
        (defect, floor)
    });
    let floor = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let form = a.form();
    let mut report = DefectReport::from_samples(
        "commute",
        form.kind(),
        form.dim(),
        seed,
        rows.into_iter().map(|r| r.0).collect(),
        floor,
    );
    report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Normalized tangency discriminant of `σ_b L` against the pencil member `λ_c`.
pub fn caustic_defect(
    b: &ConvexHypersurface,
    pencil: &ConfocalPencil,
    lambda_c: f64,
    l: &OrientedGeodesic,
) -> Result<f64, RejectReason> {
    let member = pencil.member(lambda_c).map_err(|_| RejectReason::CompositionUndefined)?;
    let out = b.billiard_reflect(l).map_err(|_| RejectReason::CompositionUndefined)?;
    match out.kind {
        ReflectionKind::Reflected => Ok(member.normalized_discriminant(&out.result).abs()),
        ReflectionKind::FixedTangent => Err(RejectReason::TangencyGuard),
        ReflectionKind::FixedDisjoint => Err(RejectReason::NoIntersection),
    }
}

/// Lines tangent to the inner member reflected off the outer one: tangency
/// defects plus the largest change of the tangent-parameter set.
pub fn caustic_test(setup: &PairSetup, n: usize, seed: u64, workers: Workers) -> HarnessResult<DefectReport> {
    let start = Instant::now();
    let member = setup.inner_member();
    let inner = ConvexHypersurface::from_quadric(&member)?;
    let lines = sample_tangent_lines(&inner, &setup.outer, n, seed, workers)?;
    let pencil = &setup.pencil;
    let rows = map_indexed(lines.len(), workers, |i| {
        let l = &lines[i];
        let input = member.normalized_discriminant(l).abs();
        let defect = caustic_defect(&setup.outer, pencil, setup.inner_lambda, l).and_then(|d| {
            let image = setup.outer.billiard_reflect(l).map_err(|_| RejectReason::CompositionUndefined)?.result;
            let before = pencil.tangent_confocal_parameters(l).map_err(|_| RejectReason::CompositionUndefined)?;
            let after = pencil.tangent_confocal_parameters(&image).map_err(|_| RejectReason::CompositionUndefined)?;
            if before.len() != after.len() {
                return Err(RejectReason::ParameterMismatch);
            }
            let shift = before.iter().zip(&after).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            Ok((d, shift, before.len()))
        });
        (defect, input)
    });
    let floor = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let shift = rows.iter().filter_map(|r| r.0.ok()).map(|r| r.1).fold(0.0, f64::max);
    let min_count = rows.iter().filter_map(|r| r.0.ok()).map(|r| r.2).min().unwrap_or(0);
    let form = setup.inner.form();
    let mut report = DefectReport::from_samples(
        "caustic",
        form.kind(),
        form.dim(),
        seed,
        rows.into_iter().map(|r| r.0.map(|x| x.0)).collect(),
        floor,
    );
    report.extra.insert("parameter_max_shift".into(), shift);
    report.extra.insert("parameter_min_count".into(), min_count as f64);
    report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Tangency defect of a geodesic against a surface.
pub fn tangency_defect(a: &ConvexHypersurface, l: &OrientedGeodesic) -> f64 {
    a.tangency_defect(l)
}

/// Is `a` a caustic of `b`? Lines tangent to `a`, their `σ_b` images measured against `a`.
///
/// Images left fixed by `σ_b` are measured as they are, so `a = b` gives zero.
pub fn commuting_implies_caustic_check(
    a: &ConvexHypersurface,
    b: &ConvexHypersurface,
    n: usize,
    seed: u64,
    workers: Workers,
) -> HarnessResult<DefectReport> {
    let start = Instant::now();
    let rows = map_indexed(n, workers, |i| {
        let mut rng = sample_rng(seed, salt::TANGENT, i as u64);
        let x = a.sample_boundary(&mut rng);
        let Ok(l) = tangent_line_at(a, &x, &mut rng) else {
            return (Err(RejectReason::CompositionUndefined), 0.0);
        };
        let input = a.tangency_defect(&l);
        let defect = match b.billiard_reflect(&l) {
            Ok(out) => Ok(a.tangency_defect(&out.result)),
            Err(_) => Err(RejectReason::CompositionUndefined),
        };
        (defect, input)
    });
    let floor = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let form = a.form();
    let mut report = DefectReport::from_samples(
        "caustic_check",
        form.kind(),
        form.dim(),
        seed,
        rows.into_iter().map(|r| r.0).collect(),
        floor,
    );
    report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Germs `U`, `S`, `V` and the neighbourhood radius around the reference geodesic `L₀`.
#[derive(Clone, Debug)]
pub struct GermSetup {
    pub u: ConvexHypersurface,
    pub s: ConvexHypersurface,
    pub v: ConvexHypersurface,
    pub radius: f64,
}

impl GermSetup {
    /// `L₀`: tangent to `U` at a seeded point `A`, crossing `S` transversally.
    pub fn reference_geodesic(&self, seed: u64) -> HarnessResult<OrientedGeodesic> {
        for k in 0..100u64 {
            let mut rng = sample_rng(seed, salt::GERM, u64::MAX - k);
            let a = self.u.sample_boundary(&mut rng);
            let l = tangent_line_at(&self.u, &a, &mut rng)?;
            if self.s.last_intersection(&l).is_ok() {
                return Ok(l);
            }
        }
        Err(HarnessError::SamplingExhausted { requested: 1, rejections: 100 })
    }
}

/// `dist(σ_S σ_U L, σ_V σ_S L)` on geodesics within `radius` of `L₀`.
pub fn local_germ_test(setup: &GermSetup, n: usize, seed: u64, workers: Workers) -> HarnessResult<DefectReport> {
    let start = Instant::now();
    let l0 = setup.reference_geodesic(seed)?;
    let form = *setup.u.form();
    let r = setup.radius;
    let rows = map_indexed(n, workers, |i| {
        let mut rng = sample_rng(seed, salt::GERM, i as u64);
        let mut sample = None;
        for _ in 0..100 {
            let t = rng.random_range(-r..r);
            let base = l0.point_at(t);
            let shift = form.project_to_tangent(&base, &(random_unit(&mut rng, form.ambient_dim()) * r * rng.random::<f64>()));
            let x = form.exp(&shift);
            let dir = l0.velocity_at(t).vector() + random_unit(&mut rng, form.ambient_dim()) * (r * rng.random::<f64>());
            let w = form.project_to_tangent(&x, &dir);
            let w = TangentVector { base: x.clone(), v: w.vector().clone() };
            if let Ok(l) = form.geodesic(&x, &w) {
                if geodesic_distance(&l, &l0) <= r {
                    sample = Some(l);
                    break;
                }
            }
        }
        let Some(l) = sample else {
            return (Err(RejectReason::CompositionUndefined), 0.0);
        };
        if setup.u.last_intersection(&l).is_err() {
            return (Err(RejectReason::OutsidePiW), 0.0);
        }
        let lhs = reflect(&setup.u, &l).and_then(|x| reflect(&setup.s, &x));
        let rhs = reflect(&setup.s, &l).and_then(|x| reflect(&setup.v, &x));
        match (lhs, rhs) {
            (Ok(a), Ok(b)) => (
                Ok(geodesic_distance(&a, &b)),
                self_noise(&setup.u, &l).max(self_noise(&setup.s, &l)),
            ),
            (Err(e), _) | (_, Err(e)) => (Err(e), 0.0),
        }
    });
    let floor = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut report = DefectReport::from_samples(
        "germ",
        form.kind(),
        form.dim(),
        seed,
        rows.into_iter().map(|r| r.0).collect(),
        floor,
    );
    let defined = report.accepted as f64 / n.max(1) as f64;
    report.extra.insert("defined_fraction".into(), defined);
    report.extra.insert("radius".into(), r);
    report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub mode: PerturbationMode,
    pub epsilon: f64,
    pub report: DefectReport,
}

/// Commutation defects with the inner ellipsoid (semiaxes `inner_semiaxes`) perturbed.
pub fn perturbation_scan(
    setup: &PairSetup,
    inner_semiaxes: &[f64],
    modes: &[PerturbationMode],
    epsilons: &[f64],
    n: usize,
    seed: u64,
    workers: Workers,
) -> HarnessResult<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for &mode in modes {
        for &epsilon in epsilons {
            let inner = ConvexHypersurface::perturbed_ellipsoid(inner_semiaxes, epsilon, mode)?;
            let pair = setup.with_inner(inner)?;
            let report = commutation_test(&pair.inner, &pair.outer, n, seed, workers)?;
            rows.push(ScanRow { mode, epsilon, report });
        }
    }
    Ok(rows)
}

impl DefectReport {
    /// Errors when more than 5% of the samples were rejected.
    pub fn check_rejection_budget(&self) -> HarnessResult<()> {
        if self.rejected_fraction() > 0.05 {
            return Err(HarnessError::TooManyRejections {
                rejected: self.rejection_count(),
                total: self.requested,
            });
        }
        Ok(())
    }
}
