//! Synthetic designs, response models and replicated screening studies.

mod design;
mod models;
mod study;

pub use design::{generate_design, DesignSpec};
pub use models::{generate_response, response_value, ModelId, ModelSpec, NoiseKind};
pub use study::{
    aggregate, run_outcomes, run_replication, run_study, write_replication_csv, MmsQuantiles,
    ReplicationOutcome, RuleOutcome, RuleSummary, SimulationReport, StudyConfig,
};
