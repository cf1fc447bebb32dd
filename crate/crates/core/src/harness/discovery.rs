use serde::Serialize;

use crate::billiard::ConvexHypersurface;
use crate::quadric::ConfocalPencil;

use super::{HarnessError, HarnessResult};

const GRID: usize = 200;
const NESTING_SAMPLES: usize = 2000;
const NESTING_SEED: u64 = 0xd15c;

/// Pencil parameters of two nested members, `inner ⋐ outer`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NestedPair {
    pub inner: f64,
    pub outer: f64,
}

fn candidate_gaps(pencil: &ConfocalPencil) -> Vec<(f64, f64)> {
    let ev = pencil.global_eigenvalues();
    let (lo, hi) = match (ev.first(), ev.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (-1.0, 1.0),
    };
    let span = (hi - lo).max(1.0);
    let mut gaps = vec![(lo - 10.0 * span, lo)];
    gaps.extend(ev.windows(2).map(|w| (w[0], w[1])));
    gaps.push((hi, hi + 10.0 * span));
    gaps
}

fn is_valid(pencil: &ConfocalPencil, lambda: f64) -> bool {
    pencil
        .member(lambda)
        .ok()
        .and_then(|q| ConvexHypersurface::from_quadric(&q).ok())
        .is_some()
}

/// Runs of parameters (sampled on a grid per pole gap) whose members bound
/// compact strictly convex bodies.
pub fn valid_member_intervals(pencil: &ConfocalPencil) -> Vec<(f64, f64)> {
    let mut runs = Vec::new();
    for (a, b) in candidate_gaps(pencil) {
        let margin = 1e-6 * (b - a);
        let grid: Vec<f64> = (0..=GRID)
            .map(|i| a + margin + (b - a - 2.0 * margin) * i as f64 / GRID as f64)
            .collect();
        let mut start: Option<f64> = None;
        let mut last = 0.0;
        for &l in &grid {
            if is_valid(pencil, l) {
                start.get_or_insert(l);
                last = l;
            } else if let Some(s) = start.take() {
                runs.push((s, last));
            }
        }
        if let Some(s) = start {
            runs.push((s, last));
        }
    }
    runs
}

/// First valid run containing two nested members, tried at 1/3 and 2/3 of the run.
pub fn discover_nested_pair(pencil: &ConfocalPencil) -> HarnessResult<NestedPair> {
    for (s, e) in valid_member_intervals(pencil) {
        if !(e > s) {
            continue;
        }
        let l1 = s + (e - s) / 3.0;
        let l2 = s + 2.0 * (e - s) / 3.0;
        let (Ok(q1), Ok(q2)) = (pencil.member(l1), pencil.member(l2)) else { continue };
        let (Ok(b1), Ok(b2)) = (ConvexHypersurface::from_quadric(&q1), ConvexHypersurface::from_quadric(&q2)) else {
            continue;
        };
        if b1.nested_inside(&b2, NESTING_SAMPLES, NESTING_SEED) {
            return Ok(NestedPair { inner: l1, outer: l2 });
        }
        if b2.nested_inside(&b1, NESTING_SAMPLES, NESTING_SEED) {
            return Ok(NestedPair { inner: l2, outer: l1 });
        }
    }
    Err(HarnessError::Nesting("no nested pair of convex members found in the pencil".into()))
}
