//! Experiment layer: deterministic sampling, defect statistics and I/O.

mod checks;
mod config;
mod discovery;
mod experiments;
mod io;
mod report;
mod sampling;

pub use checks::{cone_symmetry_check, orthogonality_check, pseudo_symmetry_check, CheckSummary};
pub use config::{
    ExperimentConfig, FormSpec, GermSpec, MemberSpec, PencilSpec, PerturbationSpec, ScanSpec, Thresholds,
    SCHEMA_VERSION,
};
pub use discovery::{discover_nested_pair, valid_member_intervals, NestedPair};
pub use experiments::{
    caustic_defect, caustic_test, commutation_defect, commutation_test, commuting_implies_caustic_check,
    local_germ_test, perturbation_scan, tangency_defect, GermSetup, PairSetup, ScanRow,
};
pub use io::{csv_bytes, write_atomic, write_csv, write_summary_json};
pub use report::{DefectReport, RejectReason, SampleRecord};
pub use sampling::{sample_chords, sample_tangent_lines, tangent_line_at};

use crate::error::GeometryError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("sampling exhausted: {rejections} rejections while drawing {requested} samples")]
    SamplingExhausted { requested: usize, rejections: usize },
    #[error("{rejected} of {total} samples rejected ({:.1}%), above the 5% limit", 100.0 * *rejected as f64 / *total as f64)]
    TooManyRejections { rejected: usize, total: usize },
    #[error("members are not nested: {0}")]
    Nesting(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type HarnessResult<T> = Result<T, HarnessError>;
