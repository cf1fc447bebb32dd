use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::billiard::{ConvexHypersurface, PerturbationMode};
use crate::quadric::ConfocalPencil;
use crate::spaceform::{Matrix, ModelKind, SpaceForm, SurfacePoint, Vector};
use crate::tolerances::Tolerances;

use super::discovery::discover_nested_pair;
use super::experiments::{GermSetup, PairSetup};
use super::{HarnessError, HarnessResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub kind: ModelKind,
    pub dim: usize,
}

/// Exactly one of the fields must be given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilSpec {
    /// Euclidean only: `a_1, ..., a_d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semiaxes: Option<Vec<f64>>,
    /// Euclidean only: `a_1², ..., a_d²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semiaxes_squared: Option<Vec<f64>>,
    /// `Q = diag(q_0, ..., q_d)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<f64>>,
    /// Full symmetric `Q`, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

/// Member parameters: `μ` (classical convention) in the Euclidean model, `λ` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub inner: f64,
    pub outer: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub mode: PerturbationMode,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub epsilons: Vec<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<PerturbationMode>,
}

fn default_modes() -> Vec<PerturbationMode> {
    vec![PerturbationMode::AxisBump, PerturbationMode::CubicBump]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermSpec {
    /// Neighbourhood radius around `L₀` in geodesic distance.
    #[serde(default = "default_germ_radius")]
    pub radius: f64,
    /// Replace `V` by a perturbed copy of `U` (Euclidean only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_perturbation: Option<PerturbationSpec>,
}

fn default_germ_radius() -> f64 {
    0.05
}

impl Default for GermSpec {
    fn default() -> Self {
        GermSpec {
            radius: default_germ_radius(),
            v_perturbation: None,
        }
    }
}

/// Pass/fail bounds applied by the command-line runner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub max_raw: f64,
    /// Bound on `max raw / noise floor`.
    pub max_normalized: f64,
    /// Perturbation scans: lower bound on the median normalized defect at `ε = 1e-2`.
    pub min_median_normalized: f64,
    /// Caustic runs: bound on the tangent-parameter drift.
    pub max_parameter_shift: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            max_raw: 1e-9,
            max_normalized: 10.0,
            min_median_normalized: 100.0,
            max_parameter_shift: 1e-8,
        }
    }
}

fn default_samples() -> usize {
    1000
}

/// One experiment, as read from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub form: FormSpec,
    pub pencil: PencilSpec,
    /// Omitted: a nested pair is discovered by scanning the pencil.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<MemberSpec>,
    /// Replaces the inner member (commute-test, caustic-test).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub germ: GermSpec,
    /// Point for `pencil-info`, ambient coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Output directory; the command line and environment take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Structural checks that need no geometry.
    pub fn validate(&self) -> HarnessResult<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_err(format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        if self.samples == 0 {
            return Err(config_err("samples must be at least 1"));
        }
        let p = &self.pencil;
        let given = [p.semiaxes.is_some(), p.semiaxes_squared.is_some(), p.diagonal.is_some(), p.matrix.is_some()]
            .iter()
            .filter(|x| **x)
            .count();
        if given != 1 {
            return Err(config_err(
                "pencil needs exactly one of semiaxes, semiaxes_squared, diagonal, matrix",
            ));
        }
        let euclidean = self.form.kind == ModelKind::Euclidean;
        if (p.semiaxes.is_some() || p.semiaxes_squared.is_some()) && !euclidean {
            return Err(config_err("semiaxes pencils are Euclidean only"));
        }
        if let Some(m) = self.members {
            if euclidean && m.inner >= m.outer {
                return Err(HarnessError::Nesting(format!(
                    "inner member μ = {} must be smaller than outer member μ = {}",
                    m.inner, m.outer
                )));
            }
            if m.inner == m.outer {
                return Err(HarnessError::Nesting("inner and outer members coincide".into()));
            }
        }
        let needs_axes = self.perturbation.is_some() || self.scan.is_some() || self.germ.v_perturbation.is_some();
        if needs_axes && !euclidean {
            return Err(config_err("perturbations are implemented for Euclidean ellipsoids only"));
        }
        if !(self.germ.radius > 0.0) {
            return Err(config_err("germ radius must be positive"));
        }
        Ok(())
    }

    pub fn space_form(&self) -> HarnessResult<SpaceForm> {
        Ok(SpaceForm::new(self.form.kind, self.form.dim)?.with_tolerances(self.tolerances))
    }

    pub fn build_pencil(&self) -> HarnessResult<ConfocalPencil> {
        let form = self.space_form()?;
        let p = &self.pencil;
        let pencil = if let Some(a) = &p.semiaxes {
            ConfocalPencil::euclidean_ellipsoid(a)?
        } else if let Some(a2) = &p.semiaxes_squared {
            ConfocalPencil::euclidean_ellipsoid_squared(a2)?
        } else if let Some(d) = &p.diagonal {
            ConfocalPencil::diagonal(form, d)?
        } else if let Some(rows) = &p.matrix {
            let n = form.ambient_dim();
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(config_err(format!("pencil matrix must be {n}×{n}")));
            }
            ConfocalPencil::new(form, Matrix::from_fn(n, n, |i, j| rows[i][j]))?
        } else {
            return Err(config_err("missing pencil"));
        };
        if pencil.form().dim() != form.dim() {
            return Err(config_err(format!(
                "pencil has dimension {}, form declares {}",
                pencil.form().dim(),
                form.dim()
            )));
        }
        Ok(pencil.with_form(form))
    }

    /// Pencil parameters `λ` of the configured (or discovered) pair.
    pub fn member_lambdas(&self, pencil: &ConfocalPencil) -> HarnessResult<(f64, f64)> {
        match (self.members, self.form.kind) {
            (Some(m), ModelKind::Euclidean) => Ok((-m.inner, -m.outer)),
            (Some(m), _) => Ok((m.inner, m.outer)),
            (None, _) => {
                let pair = discover_nested_pair(pencil)?;
                Ok((pair.inner, pair.outer))
            }
        }
    }

    pub fn build_pair(&self) -> HarnessResult<PairSetup> {
        let pencil = self.build_pencil()?;
        let (li, lo) = self.member_lambdas(&pencil)?;
        PairSetup::confocal(pencil, li, lo)
    }

    /// Semiaxes of the inner Euclidean member.
    pub fn inner_semiaxes(&self, setup: &PairSetup) -> HarnessResult<Vec<f64>> {
        setup
            .pencil
            .member_semiaxes(-setup.inner_lambda)
            .ok_or_else(|| config_err("perturbations need a semiaxes pencil with an ellipsoidal inner member"))
    }

    /// The pair with the configured perturbation applied to the inner member.
    pub fn build_experiment_pair(&self) -> HarnessResult<PairSetup> {
        let setup = self.build_pair()?;
        match self.perturbation {
            None => Ok(setup),
            Some(p) => {
                let axes = self.inner_semiaxes(&setup)?;
                setup.with_inner(ConvexHypersurface::perturbed_ellipsoid(&axes, p.epsilon, p.mode)?)
            }
        }
    }

    /// `U` = inner member, `S` = outer member, `V` = `U` or its perturbation.
    pub fn build_germ(&self) -> HarnessResult<GermSetup> {
        let setup = self.build_pair()?;
        let v = match self.germ.v_perturbation {
            None => setup.inner.clone(),
            Some(p) => ConvexHypersurface::perturbed_ellipsoid(&self.inner_semiaxes(&setup)?, p.epsilon, p.mode)?,
        };
        Ok(GermSetup {
            u: setup.inner,
            s: setup.outer,
            v,
            radius: self.germ.radius,
        })
    }

    pub fn probe_point(&self) -> HarnessResult<Option<SurfacePoint>> {
        let Some(p) = &self.probe else { return Ok(None) };
        let form = self.space_form()?;
        if p.len() != form.ambient_dim() {
            return Err(config_err(format!("probe needs {} coordinates", form.ambient_dim())));
        }
        Ok(Some(form.point(Vector::from_column_slice(p))?))
    }
}
