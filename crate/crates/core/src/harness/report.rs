use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spaceform::ModelKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// An intermediate geodesic fell into a tangency guard band.
    TangencyGuard,
    /// A required intersection was missing.
    NoIntersection,
    /// A reflection or parameter solve failed.
    CompositionUndefined,
    /// Tangent-parameter sets of different sizes before and after reflection.
    ParameterMismatch,
    /// Germ sample does not meet the inner germ, so it lies outside `Π_W`.
    OutsidePiW,
}

impl RejectReason {
    pub fn name(self) -> &'static str {
        match self {
            RejectReason::TangencyGuard => "tangency_guard",
            RejectReason::NoIntersection => "no_intersection",
            RejectReason::CompositionUndefined => "composition_undefined",
            RejectReason::ParameterMismatch => "parameter_mismatch",
            RejectReason::OutsidePiW => "outside_pi_w",
        }
    }

    /// Whether the reason counts against the rejection budget.
    pub fn counts_as_rejection(self) -> bool {
        self != RejectReason::OutsidePiW
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub index: usize,
    pub raw: Option<f64>,
    pub normalized: Option<f64>,
    pub rejected: Option<RejectReason>,
}

/// Per-sample defects and their summary statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    pub experiment: String,
    pub model: ModelKind,
    pub dim: usize,
    pub seed: u64,
    pub requested: usize,
    pub accepted: usize,
    pub noise_floor: f64,
    pub max_raw: f64,
    pub mean_raw: f64,
    pub median_raw: f64,
    pub max_normalized: f64,
    pub mean_normalized: f64,
    pub median_normalized: f64,
    pub rejected: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    #[serde(skip)]
    pub samples: Vec<SampleRecord>,
}

impl DefectReport {
    /// Builds the report from raw per-sample outcomes, normalizing by `noise_floor`.
    pub fn from_samples(
        experiment: &str,
        model: ModelKind,
        dim: usize,
        seed: u64,
        outcomes: Vec<Result<f64, RejectReason>>,
        noise_floor: f64,
    ) -> Self {
        let floor = noise_floor.max(f64::EPSILON);
        let samples: Vec<SampleRecord> = outcomes
            .into_iter()
            .enumerate()
            .map(|(index, o)| match o {
                Ok(raw) => SampleRecord {
                    index,
                    raw: Some(raw),
                    normalized: Some(raw / floor),
                    rejected: None,
                },
                Err(r) => SampleRecord {
                    index,
                    raw: None,
                    normalized: None,
                    rejected: Some(r),
                },
            })
            .collect();
        let mut report = DefectReport {
            experiment: experiment.to_string(),
            model,
            dim,
            seed,
            requested: samples.len(),
            accepted: 0,
            noise_floor: floor,
            max_raw: 0.0,
            mean_raw: 0.0,
            median_raw: 0.0,
            max_normalized: 0.0,
            mean_normalized: 0.0,
            median_normalized: 0.0,
            rejected: BTreeMap::new(),
            extra: BTreeMap::new(),
            wall_clock_seconds: None,
            samples,
        };
        report.recompute();
        report
    }

    /// Recomputes every statistic from the per-sample list.
    pub fn recompute(&mut self) {
        let raw: Vec<f64> = self.samples.iter().filter_map(|s| s.raw).collect();
        let norm: Vec<f64> = self.samples.iter().filter_map(|s| s.normalized).collect();
        self.accepted = raw.len();
        self.requested = self.samples.len();
        (self.max_raw, self.mean_raw, self.median_raw) = stats(&raw);
        (self.max_normalized, self.mean_normalized, self.median_normalized) = stats(&norm);
        self.rejected.clear();
        for r in self.samples.iter().filter_map(|s| s.rejected) {
            *self.rejected.entry(r.name().to_string()).or_default() += 1;
        }
    }

    /// Samples rejected for reasons that count against the budget.
    pub fn rejection_count(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.rejected.is_some_and(|r| r.counts_as_rejection()))
            .count()
    }

    pub fn rejected_fraction(&self) -> f64 {
        if self.requested == 0 {
            0.0
        } else {
            self.rejection_count() as f64 / self.requested as f64
        }
    }
}

fn stats(xs: &[f64]) -> (f64, f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    (max, mean, median)
}
