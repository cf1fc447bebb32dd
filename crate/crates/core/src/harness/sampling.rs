use rand::Rng;

use crate::billiard::{random_unit, ConvexHypersurface};
use crate::error::GeometryResult;
use crate::parallel::{map_indexed, Workers};
use crate::rng::{salt, sample_rng};
use crate::spaceform::{OrientedGeodesic, SurfacePoint, TangentVector};

use super::{HarnessError, HarnessResult};

const ATTEMPTS_PER_SAMPLE: usize = 100;
const NESTING_CHECKS: usize = 2000;

pub(crate) fn check_nested(a: &ConvexHypersurface, b: &ConvexHypersurface, seed: u64) -> HarnessResult<()> {
    if a.nested_inside(b, NESTING_CHECKS, seed) {
        Ok(())
    } else {
        Err(HarnessError::Nesting("inner surface is not strictly inside the outer one".into()))
    }
}

/// Draws with up to 100 attempts per sample; each attempt reuses the sample's own stream.
fn draw<T, F>(n: usize, seed: u64, stream_salt: u64, workers: Workers, attempt: F) -> HarnessResult<Vec<T>>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Option<T> + Sync + Send,
{
    let results = map_indexed(n, workers, |i| {
        let mut rng = sample_rng(seed, stream_salt, i as u64);
        for tries in 0..ATTEMPTS_PER_SAMPLE {
            if let Some(x) = attempt(&mut rng) {
                return (Some(x), tries);
            }
        }
        (None, ATTEMPTS_PER_SAMPLE)
    });
    let rejections: usize = results.iter().map(|r| r.1).sum();
    if results.iter().any(|r| r.0.is_none()) {
        return Err(HarnessError::SamplingExhausted { requested: n, rejections });
    }
    if rejections > 0 {
        log::debug!("{rejections} proposals redrawn while sampling {n} geodesics");
    }
    Ok(results.into_iter().map(|r| r.0.expect("checked")).collect())
}

/// Geodesics through a random interior point of `a` that cross both surfaces transversally.
pub fn sample_chords(
    a: &ConvexHypersurface,
    b: &ConvexHypersurface,
    n: usize,
    seed: u64,
    workers: Workers,
) -> HarnessResult<Vec<OrientedGeodesic>> {
    if n == 0 {
        return Ok(vec![]);
    }
    check_nested(a, b, seed)?;
    let form = *a.form();
    draw(n, seed, salt::CHORD, workers, |rng| {
        let x = a.sample_interior(rng);
        let w = form.project_to_tangent(&x, &random_unit(rng, form.ambient_dim()));
        let l = form.geodesic(&x, &w).ok()?;
        (a.last_intersection(&l).is_ok() && b.last_intersection(&l).is_ok()).then_some(l)
    })
}

/// Geodesic through `x` on `surface` with a random direction in `T_x surface`.
pub fn tangent_line_at<R: Rng + ?Sized>(
    surface: &ConvexHypersurface,
    x: &SurfacePoint,
    rng: &mut R,
) -> GeometryResult<OrientedGeodesic> {
    let form = surface.form();
    let n = surface.outward_normal(x)?;
    let w = form.project_to_tangent(x, &random_unit(rng, form.ambient_dim()));
    let k = form.g_dot(w.vector(), n.vector());
    let w = TangentVector {
        base: x.clone(),
        v: w.vector() - n.vector() * k,
    };
    form.geodesic(x, &w)
}

/// Geodesics tangent to `a` that cross `b` transversally.
pub fn sample_tangent_lines(
    a: &ConvexHypersurface,
    b: &ConvexHypersurface,
    n: usize,
    seed: u64,
    workers: Workers,
) -> HarnessResult<Vec<OrientedGeodesic>> {
    if n == 0 {
        return Ok(vec![]);
    }
    check_nested(a, b, seed)?;
    draw(n, seed, salt::TANGENT, workers, |rng| {
        let x = a.sample_boundary(rng);
        let l = tangent_line_at(a, &x, rng).ok()?;
        b.last_intersection(&l).is_ok().then_some(l)
    })
}
