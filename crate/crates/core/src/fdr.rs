//! Data-adaptive threshold controlling the false discovery rate.
//!
//! The threshold is the smallest positive `t` at which the estimated false
//! discovery proportion
//!
//! ```text
//! FDP(t) = S(p) * p * {1 - Phi(sqrt(n'(c-1)) t / sigma)} / max(#{k : w_k >= t}, 1)
//! ```
//!
//! drops to the nominal level `q`. `S(p)` is the harmonic number under the BY
//! adjustment and 1 under BH. The estimate only jumps at observed statistics,
//! so the infimum is found by a step-up pass over covariates in descending
//! order of their statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{normal_sf, scaled};
use crate::screening::ScreeningResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjustment {
    /// Harmonic-number correction, valid under arbitrary dependence.
    By,
    /// No correction.
    Bh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdrConfig {
    pub q: f64,
    pub adjustment: Adjustment,
}

impl FdrConfig {
    pub fn new(q: f64, adjustment: Adjustment) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidLevel(q));
        }
        Ok(Self { q, adjustment })
    }

    pub fn by(q: f64) -> Result<Self> {
        Self::new(q, Adjustment::By)
    }

    pub fn bh(q: f64) -> Result<Self> {
        Self::new(q, Adjustment::Bh)
    }

    pub fn constant(&self, p: usize) -> f64 {
        match self.adjustment {
            Adjustment::By => harmonic_number(p),
            Adjustment::Bh => 1.0,
        }
    }
}

/// `sum_{l=1}^p 1/l`.
pub fn harmonic_number(p: usize) -> f64 {
    (1..=p).map(|l| 1.0 / l as f64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDecision {
    /// `+inf` when nothing qualifies.
    pub realized_threshold: f64,
    pub num_selected: usize,
    /// Ascending covariate indices.
    pub selected: Vec<usize>,
    pub per_k_pvalues: Vec<f64>,
    pub harmonic_constant: f64,
}

/// The FDP criterion, written once so every caller evaluates it with the same
/// floating-point operations.
#[inline]
pub(crate) fn fdp_value(constant: f64, p: usize, p_value: f64, count: usize) -> f64 {
    constant * p as f64 * p_value / count.max(1) as f64
}

/// Selects covariates with the data-adaptive threshold.
///
/// Walks the covariates in descending order of their statistic and keeps the
/// deepest position whose estimated FDP is at most `q`; only positive
/// statistics are candidates. Ties in the statistic are selected together.
pub fn by_threshold(result: &ScreeningResult, config: &FdrConfig) -> ThresholdDecision {
    let p = result.p();
    let constant = config.constant(p);
    let mut cut = 0;
    for (pos, &k) in result.order.iter().enumerate() {
        if result.omega[k] <= 0.0 {
            break;
        }
        if fdp_value(constant, p, result.p_values[k], pos + 1) <= config.q {
            cut = pos + 1;
        }
    }
    let realized_threshold = if cut == 0 {
        f64::INFINITY
    } else {
        result.omega[result.order[cut - 1]]
    };
    let selected: Vec<usize> = (0..p)
        .filter(|&k| result.omega[k] >= realized_threshold)
        .collect();
    ThresholdDecision {
        realized_threshold,
        num_selected: selected.len(),
        selected,
        per_k_pvalues: result.p_values.clone(),
        harmonic_constant: constant,
    }
}

/// Estimated false discovery proportion when selecting `{k : w_k >= t}`.
pub fn fdp_hat(t: f64, result: &ScreeningResult, config: &FdrConfig) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveThreshold(t));
    }
    let p = result.p();
    let tail = normal_sf(scaled(
        t,
        result.n_effective,
        result.config.c,
        &result.calibration,
    ));
    let count = result.omega.iter().filter(|&&w| w >= t).count();
    Ok(fdp_value(config.constant(p), p, tail, count))
}

/// Realized false discovery proportion and true-positive count.
pub fn evaluate_selection(selected: &[usize], active: &[usize]) -> (f64, usize) {
    let true_positives = selected.iter().filter(|k| active.contains(k)).count();
    let false_positives = selected.len() - true_positives;
    (
        false_positives as f64 / selected.len().max(1) as f64,
        true_positives,
    )
}
