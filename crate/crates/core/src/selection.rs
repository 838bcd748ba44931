//! One enum over every threshold rule, so callers can carry "the rule" as
//! data (CLI flags, study configurations, reports).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fdr::{by_threshold, Adjustment, FdrConfig};
use crate::screening::{
    hard_threshold_select, level_threshold_select, ActiveSet, RuleKind, ScreeningResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// Keep the top `d` covariates.
    HardSize { d: usize },
    /// Keep covariates whose statistic reaches `threshold`.
    HardLevel { threshold: f64 },
    /// Data-adaptive threshold with the harmonic (BY) adjustment.
    By { q: f64 },
    /// Data-adaptive threshold without adjustment (BH).
    Bh { q: f64 },
}

impl ThresholdRule {
    pub fn kind(&self) -> RuleKind {
        match self {
            Self::HardSize { .. } => RuleKind::HardSize,
            Self::HardLevel { .. } => RuleKind::HardLevel,
            Self::By { .. } => RuleKind::By,
            Self::Bh { .. } => RuleKind::Bh,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::HardSize { d } => format!("hard-size(d={d})"),
            Self::HardLevel { threshold } => format!("hard-level(t={threshold})"),
            Self::By { q } => format!("by(q={q})"),
            Self::Bh { q } => format!("bh(q={q})"),
        }
    }

    pub fn fdr_config(&self) -> Option<Result<FdrConfig>> {
        match *self {
            Self::By { q } => Some(FdrConfig::new(q, Adjustment::By)),
            Self::Bh { q } => Some(FdrConfig::new(q, Adjustment::Bh)),
            _ => None,
        }
    }
}

/// Applies `rule` to a screening result.
pub fn apply_rule(result: &ScreeningResult, rule: &ThresholdRule) -> Result<ActiveSet> {
    match *rule {
        ThresholdRule::HardSize { d } => hard_threshold_select(result, d),
        ThresholdRule::HardLevel { threshold } => Ok(level_threshold_select(result, threshold)),
        ThresholdRule::By { .. } | ThresholdRule::Bh { .. } => {
            let cfg = rule.fdr_config().expect("fdr rule")?;
            let d = by_threshold(result, &cfg);
            Ok(ActiveSet {
                indices: d.selected,
                rule: rule.kind(),
                realized_threshold: d.realized_threshold,
            })
        }
    }
}
