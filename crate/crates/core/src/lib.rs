//! Model-free feature screening with the sliced independence statistic.
//!
//! The crate is organised bottom-up:
//!
//! - [`estimator`]: the per-pair statistic, its z-score and p-value, and the
//!   variance calibration constants.
//! - [`screening`]: column-wise screening of a whole dataset, ranking and the
//!   hard-threshold rules.
//! - [`fdr`]: the data-adaptive threshold controlling the false discovery
//!   rate (BY adjustment, with BH as a variant).
//! - [`selection`]: a single enum over all threshold rules.
//! - [`simlab`]: synthetic designs, response models and replicated studies.
//! - [`oracle`]: slow literal reference implementations used by the tests.

pub mod error;
pub mod estimator;
pub mod fdr;
pub mod oracle;
pub mod screening;
pub mod seed;
pub mod selection;
pub mod simlab;

pub use error::{Error, Result};
pub use estimator::{
    naive_estimate, normal_sf, plugin_calibration, sliced_estimate, sliced_estimate_with,
    z_statistic, CalibrationMode, DependenceEstimate, PairedSample, RemainderPolicy, SigmaMode,
    SliceConfig, VarianceCalibration,
};
pub use fdr::{
    by_threshold, evaluate_selection, fdp_hat, harmonic_number, Adjustment, FdrConfig,
    ThresholdDecision,
};
pub use screening::{
    augment_with_noise, hard_threshold_select, level_threshold_select, minimum_model_size,
    screen_all, screen_all_with, ActiveSet, Dataset, RuleKind, ScreeningResult,
};
pub use selection::{apply_rule, ThresholdRule};
