//! Command-line arguments and their resolution into fully specified run
//! configurations.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize, Serializer};
use sitscreen::simlab::{ModelId, ModelSpec, StudyConfig};
use sitscreen::{SigmaMode, ThresholdRule};

use crate::error::{CliError, Result};
use crate::ingest::ResponseSelector;

/// Master seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_Q: f64 = 0.1;
/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SIT_SCREEN_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "sit-screen",
    version,
    about = "Sliced independence screening with FDR-controlled thresholds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Screen every covariate of a CSV file against a response column.
    Screen(ScreenArgs),
    /// Run a replicated simulation study.
    Simulate(SimulateArgs),
    /// Screen, replace unselected covariates by noise, screen again.
    AugmentCheck(AugmentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    HardSize,
    HardLevel,
    By,
    Bh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SigmaArg {
    Fixed,
    Plugin,
    #[default]
    Auto,
}

impl From<SigmaArg> for SigmaMode {
    fn from(s: SigmaArg) -> Self {
        match s {
            SigmaArg::Fixed => SigmaMode::Fixed,
            SigmaArg::Plugin => SigmaMode::Plugin,
            SigmaArg::Auto => SigmaMode::Auto,
        }
    }
}

/// Requested slice size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceChoice {
    Auto,
    Fixed(usize),
}

impl SliceChoice {
    /// `auto` picks the largest power of two not exceeding `sqrt(n)`.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Self::Fixed(c) => c,
            Self::Auto => {
                let mut c = 2;
                while (2 * c) * (2 * c) <= n {
                    c *= 2;
                }
                c
            }
        }
    }
}

impl FromStr for SliceChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        s.parse()
            .map(Self::Fixed)
            .map_err(|_| format!("expected an integer or \"auto\", got {s:?}"))
    }
}

impl fmt::Display for SliceChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(c) => write!(f, "{c}"),
        }
    }
}

impl Serialize for SliceChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Fixed(c) => s.serialize_u64(*c as u64),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScreenArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Response column: a header name or `#<0-based index>`.
    #[arg(long)]
    pub response: ResponseSelector,
    /// Slice size, or `auto`.
    #[arg(long, default_value = "auto")]
    pub c: SliceChoice,
    #[arg(long, value_enum, default_value_t = RuleArg::By)]
    pub rule: RuleArg,
    /// Model size for `hard-size` [default: floor(n / ln n)].
    #[arg(long)]
    pub d: Option<usize>,
    /// Statistic cut-off for `hard-level`.
    #[arg(long, allow_negative_numbers = true)]
    pub level: Option<f64>,
    /// Nominal FDR level for `by` and `bh` [default: 0.1].
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value_t = SigmaArg::Auto)]
    pub sigma: SigmaArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Writes `index,name,omega,selected` rows plus a threshold row.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// Center and scale every covariate before screening.
    #[arg(long)]
    pub standardize: bool,
    /// Leave the timing field out of the report.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KeepArg {
    Selected,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub screen: ScreenArgs,
    /// Number of noise columns [default: p minus the number kept].
    #[arg(long)]
    pub num_aux: Option<usize>,
    #[arg(long, value_enum, default_value_t = KeepArg::Selected)]
    pub keep: KeepArg,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Study preset (1, 2 or 3); inferred from the model when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub study: Option<u8>,
    /// Response model, `a1` to `c4`.
    #[arg(long)]
    pub model: Option<ModelId>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub level: Option<f64>,
    /// Threshold rule; repeat to evaluate several.
    #[arg(long, value_enum)]
    pub rule: Vec<RuleArg>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SigmaArg::Auto)]
    pub sigma: SigmaArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-replication CSV rows.
    #[arg(long)]
    pub replications_csv: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

/// Effective screening configuration, echoed in every report. Output paths
/// are left out since they do not affect results.
#[derive(Debug, Clone, Serialize)]
pub struct ScreenConfig {
    pub input: PathBuf,
    pub response: ResponseSelector,
    pub standardize: bool,
    pub slice_size_requested: SliceChoice,
    pub slice_size: usize,
    pub rule: ThresholdRule,
    pub sigma: SigmaMode,
    pub seed: u64,
}

/// `floor(n / ln n)`, at least 1.
pub fn default_model_size(n: usize) -> usize {
    ((n as f64 / (n as f64).ln()).floor() as usize).max(1)
}

fn flag_mismatch(flag: &str, rule: RuleArg) -> CliError {
    let name = rule
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    CliError::Config(format!("--{flag} does not apply to rule {name}"))
}

impl ScreenArgs {
    /// Builds the single threshold rule from the flags, filling in defaults
    /// that depend on the data size.
    pub fn threshold_rule(&self, n: usize, p: usize) -> Result<ThresholdRule> {
        let rule = self.rule;
        if self.d.is_some() && rule != RuleArg::HardSize {
            return Err(flag_mismatch("d", rule));
        }
        if self.level.is_some() && rule != RuleArg::HardLevel {
            return Err(flag_mismatch("level", rule));
        }
        if self.q.is_some() && !matches!(rule, RuleArg::By | RuleArg::Bh) {
            return Err(flag_mismatch("q", rule));
        }
        let q = self.q.unwrap_or(DEFAULT_Q);
        let out = match rule {
            RuleArg::HardSize => {
                let d = match self.d {
                    Some(d) if d == 0 || d > p => {
                        return Err(CliError::Config(format!(
                            "--d must lie in [1, {p}], got {d}"
                        )))
                    }
                    Some(d) => d,
                    None => default_model_size(n).min(p),
                };
                ThresholdRule::HardSize { d }
            }
            RuleArg::HardLevel => {
                let threshold = self
                    .level
                    .ok_or_else(|| CliError::Config("rule hard-level needs --level".into()))?;
                if threshold.is_nan() {
                    return Err(CliError::Config("--level must be a number".into()));
                }
                ThresholdRule::HardLevel { threshold }
            }
            RuleArg::By => ThresholdRule::By { q },
            RuleArg::Bh => ThresholdRule::Bh { q },
        };
        if let Some(cfg) = out.fdr_config() {
            cfg.map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(out)
    }

    pub fn resolve(&self, n: usize, p: usize) -> Result<ScreenConfig> {
        let slice_size = self.c.resolve(n);
        if slice_size < 2 {
            return Err(CliError::Config(format!(
                "--c must be at least 2, got {slice_size}"
            )));
        }
        Ok(ScreenConfig {
            input: self.input.clone(),
            response: self.response.clone(),
            standardize: self.standardize,
            slice_size_requested: self.c,
            slice_size,
            rule: self.threshold_rule(n, p)?,
            sigma: self.sigma.into(),
            seed: self.seed,
        })
    }
}

struct Preset {
    model: ModelId,
    n: usize,
    p: usize,
    s: usize,
    rho: f64,
    c: usize,
    /// Pinned model size; `None` means `floor(n / ln n)`.
    d: Option<usize>,
    rules: &'static [RuleArg],
}

fn preset(study: u8) -> Preset {
    match study {
        1 => Preset {
            model: ModelId::A1,
            n: 256,
            p: 1000,
            s: 4,
            rho: 0.5,
            c: 32,
            d: Some(32),
            rules: &[RuleArg::HardSize],
        },
        2 => Preset {
            model: ModelId::B1,
            n: 256,
            p: 1000,
            s: 4,
            rho: 0.8,
            c: 32,
            d: Some(32),
            rules: &[RuleArg::HardSize],
        },
        _ => Preset {
            model: ModelId::C1,
            n: 1024,
            p: 5000,
            s: 20,
            rho: 0.5,
            c: 32,
            d: None,
            rules: &[RuleArg::By],
        },
    }
}

impl SimulateArgs {
    pub fn resolve(&self) -> Result<StudyConfig> {
        let study = self.study.or(self.model.map(ModelId::study)).unwrap_or(1);
        let base = preset(study);
        let model = self.model.unwrap_or(base.model);
        let n = self.n.unwrap_or(base.n);
        let p = self.p.unwrap_or(base.p);
        let s = self.s.unwrap_or(base.s);
        let rule_args: Vec<RuleArg> = if self.rule.is_empty() {
            base.rules.to_vec()
        } else {
            self.rule.clone()
        };
        let q = self.q.unwrap_or(DEFAULT_Q);
        let mut rules = Vec::with_capacity(rule_args.len());
        for r in rule_args {
            let rule = match r {
                RuleArg::HardSize => ThresholdRule::HardSize {
                    d: self
                        .d
                        .or(base.d)
                        .unwrap_or_else(|| default_model_size(n).min(p)),
                },
                RuleArg::HardLevel => ThresholdRule::HardLevel {
                    threshold: self
                        .level
                        .ok_or_else(|| CliError::Config("rule hard-level needs --level".into()))?,
                },
                RuleArg::By => ThresholdRule::By { q },
                RuleArg::Bh => ThresholdRule::Bh { q },
            };
            if !rules.contains(&rule) {
                rules.push(rule);
            }
        }
        let config = StudyConfig {
            n,
            p,
            rho: self.rho.unwrap_or(base.rho),
            model: ModelSpec::new(model, s).map_err(|e| CliError::Config(e.to_string()))?,
            c: self.c.unwrap_or(base.c),
            rules,
            reps: self.reps,
            master_seed: self.seed,
            sigma: self.sigma.into(),
        };
        check_study(&config)?;
        Ok(config)
    }
}

/// Up-front validation so bad flags surface as configuration errors rather
/// than failures inside a replication.
fn check_study(cfg: &StudyConfig) -> Result<()> {
    let fail = |m: String| Err(CliError::Config(m));
    if cfg.reps == 0 {
        return fail("--reps must be at least 1".into());
    }
    if cfg.n < 4 {
        return fail(format!("--n must be at least 4, got {}", cfg.n));
    }
    if cfg.p < cfg.model.min_p() {
        return fail(format!(
            "model {} needs --p >= {}",
            cfg.model.id,
            cfg.model.min_p()
        ));
    }
    if cfg.rho.is_nan() || cfg.rho.abs() >= 1.0 {
        return fail(format!("--rho must satisfy |rho| < 1, got {}", cfg.rho));
    }
    if cfg.c < 2 || cfg.n / cfg.c < 2 {
        return fail(format!(
            "--c = {} does not give two slices at n = {}",
            cfg.c, cfg.n
        ));
    }
    for rule in &cfg.rules {
        match *rule {
            ThresholdRule::HardSize { d } if d == 0 || d > cfg.p => {
                return fail(format!("--d must lie in [1, {}], got {d}", cfg.p));
            }
            ThresholdRule::HardLevel { threshold } if threshold.is_nan() => {
                return fail("--level must be a number".into());
            }
            _ => {
                if let Some(Err(e)) = rule.fdr_config() {
                    return fail(e.to_string());
                }
            }
        }
    }
    Ok(())
}
