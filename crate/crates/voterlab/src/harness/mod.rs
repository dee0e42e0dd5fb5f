//! Experiment orchestration: configs with stable hashes, statistical
//! checks (Kolmogorov-Smirnov, trend-to-target), report emission, and the
//! verification suite used by both the CLI and the acceptance tests.

mod config;
mod ks;
mod report;
mod run;
mod suite;
mod trend;

pub use config::{config_hash, ExperimentConfig, ExperimentKind};
pub use ks::{ks_p_value, ks_statistic, ks_test_normal};
pub use report::{Report, ReportItem};
pub use run::run_experiment;
pub use suite::{run_criteria, run_suite, CriterionResult};
pub use trend::{trend_check, TrendOutcome, TrendPoint};
