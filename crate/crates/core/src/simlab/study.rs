use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::{generate_design, DesignSpec};
use super::models::{generate_response, ModelSpec};
use crate::error::{Error, Result};
use crate::estimator::{SigmaMode, SliceConfig};
use crate::fdr::evaluate_selection;
use crate::screening::{minimum_model_size, screen_all_with, Dataset};
use crate::seed::derive_seed;
use crate::selection::{apply_rule, ThresholdRule};

const DESIGN_STREAM: u64 = u64::MAX;
const RESPONSE_STREAM: u64 = u64::MAX - 1;

/// Everything needed to replay a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub model: ModelSpec,
    pub c: usize,
    pub rules: Vec<ThresholdRule>,
    pub reps: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub sigma: SigmaMode,
}

impl StudyConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::IncompatibleDimensions(
                "at least one replication is required".into(),
            ));
        }
        if self.p < self.model.min_p() {
            return Err(Error::IncompatibleDimensions(format!(
                "model {} needs p >= {}, got {}",
                self.model.id,
                self.model.min_p(),
                self.p
            )));
        }
        if self.rho.is_nan() || self.rho.abs() >= 1.0 {
            return Err(Error::InvalidRho(self.rho));
        }
        SliceConfig::new(self.c, 0)?;
        for rule in &self.rules {
            match *rule {
                ThresholdRule::HardSize { d } if d == 0 || d > self.p => {
                    return Err(Error::InvalidSize { d, p: self.p });
                }
                _ => {
                    if let Some(cfg) = rule.fdr_config() {
                        cfg?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: ThresholdRule,
    pub selected: Vec<usize>,
    /// `None` stands for an infinite threshold (empty selection).
    pub threshold: Option<f64>,
    pub model_size: usize,
    pub fdp: f64,
    pub true_positives: usize,
    pub all_active_selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub seed: u64,
    pub mms: usize,
    pub min_active_omega: f64,
    /// `None` when every covariate is active.
    pub max_inactive_omega: Option<f64>,
    pub rules: Vec<RuleOutcome>,
}

impl ReplicationOutcome {
    pub fn rank_consistent(&self) -> bool {
        self.max_inactive_omega
            .is_none_or(|m| self.min_active_omega > m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmsQuantiles {
    pub q25: usize,
    pub q50: usize,
    pub q75: usize,
    pub q95: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: ThresholdRule,
    /// `(covariate index, proportion of replications selecting it)` for each
    /// active covariate.
    pub selection_proportions: Vec<(usize, f64)>,
    /// Proportion of replications selecting every active covariate.
    pub p_a: f64,
    /// Average model size.
    pub ams: f64,
    pub mean_fdp: f64,
    pub mean_true_positives: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: StudyConfig,
    pub replications: usize,
    pub active_set: Vec<usize>,
    pub mms_quantiles: MmsQuantiles,
    /// Proportion of replications where every active statistic exceeds every
    /// inactive one.
    pub rank_consistency: f64,
    pub rules: Vec<RuleSummary>,
}

/// Runs one replication: draw design and response, screen, apply each rule.
pub fn run_replication(config: &StudyConfig, replication: usize) -> Result<ReplicationOutcome> {
    let seed = derive_seed(config.master_seed, replication as u64);
    let x = generate_design(&DesignSpec {
        n: config.n,
        p: config.p,
        rho: config.rho,
        seed: derive_seed(seed, DESIGN_STREAM),
    })?;
    let y = generate_response(&x, &config.model, derive_seed(seed, RESPONSE_STREAM))?;
    let data = Dataset::new(x, y, None)?;
    let result = screen_all_with(&data, &SliceConfig::new(config.c, seed)?, config.sigma)?;

    let active = config.model.active_set();
    let mms = minimum_model_size(&result, &active)?;
    let min_active_omega = active
        .iter()
        .map(|&k| result.omega[k])
        .fold(f64::INFINITY, f64::min);
    let max_inactive_omega = (0..result.p())
        .filter(|k| !active.contains(k))
        .map(|k| result.omega[k])
        .reduce(f64::max);

    let rules = config
        .rules
        .iter()
        .map(|rule| {
            let set = apply_rule(&result, rule)?;
            let (fdp, true_positives) = evaluate_selection(&set.indices, &active);
            Ok(RuleOutcome {
                rule: *rule,
                model_size: set.len(),
                threshold: set
                    .realized_threshold
                    .is_finite()
                    .then_some(set.realized_threshold),
                fdp,
                true_positives,
                all_active_selected: true_positives == active.len(),
                selected: set.indices,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ReplicationOutcome {
        replication,
        seed,
        mms,
        min_active_omega,
        max_inactive_omega,
        rules,
    })
}

/// Runs `config.reps` replications (concurrently when a thread pool is
/// available) and aggregates them. The report depends only on the
/// configuration.
pub fn run_study(config: &StudyConfig) -> Result<SimulationReport> {
    let outcomes = run_outcomes(config)?;
    Ok(aggregate(config, &outcomes))
}

pub fn run_outcomes(config: &StudyConfig) -> Result<Vec<ReplicationOutcome>> {
    config.validate()?;
    (0..config.reps)
        .into_par_iter()
        .map(|i| {
            run_replication(config, i).map_err(|e| Error::Replication {
                replication: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Smallest value whose empirical CDF reaches `prob`.
fn quantile(sorted: &[usize], prob: f64) -> usize {
    let m = sorted.len();
    let idx = ((prob * m as f64).ceil() as usize).clamp(1, m) - 1;
    sorted[idx]
}

/// Folds replication outcomes into a report. The result does not depend on
/// the order of `outcomes`.
pub fn aggregate(config: &StudyConfig, outcomes: &[ReplicationOutcome]) -> SimulationReport {
    let mut outcomes: Vec<&ReplicationOutcome> = outcomes.iter().collect();
    outcomes.sort_by_key(|o| o.replication);
    let reps = outcomes.len();
    let m = reps.max(1) as f64;
    let active = config.model.active_set();

    let mut mms: Vec<usize> = outcomes.iter().map(|o| o.mms).collect();
    mms.sort_unstable();
    let mms_quantiles = if mms.is_empty() {
        MmsQuantiles {
            q25: 0,
            q50: 0,
            q75: 0,
            q95: 0,
        }
    } else {
        MmsQuantiles {
            q25: quantile(&mms, 0.25),
            q50: quantile(&mms, 0.50),
            q75: quantile(&mms, 0.75),
            q95: quantile(&mms, 0.95),
        }
    };
    let rank_consistency = outcomes.iter().filter(|o| o.rank_consistent()).count() as f64 / m;

    let rules = config
        .rules
        .iter()
        .enumerate()
        .map(|(r, rule)| {
            let per_rep: Vec<&RuleOutcome> = outcomes.iter().map(|o| &o.rules[r]).collect();
            let selection_proportions = active
                .iter()
                .map(|&k| {
                    let hits = per_rep
                        .iter()
                        .filter(|ro| ro.selected.binary_search(&k).is_ok())
                        .count();
                    (k, hits as f64 / m)
                })
                .collect();
            RuleSummary {
                rule: *rule,
                selection_proportions,
                p_a: per_rep.iter().filter(|ro| ro.all_active_selected).count() as f64 / m,
                ams: per_rep.iter().map(|ro| ro.model_size as f64).sum::<f64>() / m,
                mean_fdp: per_rep.iter().map(|ro| ro.fdp).sum::<f64>() / m,
                mean_true_positives: per_rep
                    .iter()
                    .map(|ro| ro.true_positives as f64)
                    .sum::<f64>()
                    / m,
            }
        })
        .collect();

    SimulationReport {
        config: config.clone(),
        replications: reps,
        active_set: active,
        mms_quantiles,
        rank_consistency,
        rules,
    }
}

/// One CSV row per (replication, rule).
pub fn write_replication_csv<W: Write>(
    mut out: W,
    outcomes: &[ReplicationOutcome],
) -> io::Result<()> {
    writeln!(
        out,
        "replication,seed,mms,rule,model_size,threshold,fdp,true_positives,all_active_selected"
    )?;
    for o in outcomes {
        for ro in &o.rules {
            let threshold = ro.threshold.map_or("inf".to_string(), |t| t.to_string());
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                o.replication,
                o.seed,
                o.mms,
                ro.rule.label(),
                ro.model_size,
                threshold,
                ro.fdp,
                ro.true_positives,
                ro.all_active_selected
            )?;
        }
    }
    Ok(())
}
