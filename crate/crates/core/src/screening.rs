//! Marginal screening of every covariate against a shared response.

use ndarray::{Array2, ShapeBuilder};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    normal_sf, scaled, ColumnKernel, SigmaMode, SliceConfig, VarianceCalibration,
};
use crate::seed::derive_seed;

/// An `n x p` covariate matrix with its response.
///
/// Columns are stored contiguously (column-major) since every computation
/// works one covariate at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    y: Vec<f64>,
    names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<f64>, names: Option<Vec<String>>) -> Result<Self> {
        let (n, p) = x.dim();
        if n < 4 {
            return Err(Error::TooFewObservations { min: 4, got: n });
        }
        if p == 0 {
            return Err(Error::InvalidDataset("no covariates".into()));
        }
        if y.len() != n {
            return Err(Error::LengthMismatch { x: n, y: y.len() });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("covariates"));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        if let Some(names) = &names {
            if names.len() != p {
                return Err(Error::InvalidDataset(format!(
                    "{} names for {} covariates",
                    names.len(),
                    p
                )));
            }
            let mut seen = std::collections::HashSet::new();
            if let Some(dup) = names.iter().find(|s| !seen.insert(s.as_str())) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate covariate name {dup:?}"
                )));
            }
        }
        let x = if x.t().is_standard_layout() {
            x
        } else {
            to_column_major(&x)
        };
        Ok(Self { x, y, names })
    }

    /// Builds a dataset from columns.
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        y: Vec<f64>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        let p = columns.len();
        let n = y.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch { x: bad.len(), y: n });
        }
        let flat: Vec<f64> = columns.into_iter().flatten().collect();
        let x = Array2::from_shape_vec((n, p).f(), flat)
            .map_err(|e| Error::IncompatibleDimensions(e.to_string()))?;
        Self::new(x, y, names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Name of covariate `k`, falling back to `X{k+1}`.
    pub fn name(&self, k: usize) -> String {
        match &self.names {
            Some(n) => n[k].clone(),
            None => format!("X{}", k + 1),
        }
    }

    pub fn column(&self, k: usize) -> &[f64] {
        self.x.column(k).to_slice().expect("column-major storage")
    }

    /// Applies `f` to every covariate entry.
    pub fn map_covariates(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.x.mapv(f), self.y.clone(), self.names.clone())
    }
}

fn to_column_major(x: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(x.dim().f());
    out.assign(x);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResult {
    pub omega: Vec<f64>,
    pub z: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Covariate indices by descending statistic, ties by ascending index.
    pub order: Vec<usize>,
    pub n_effective: usize,
    pub config: SliceConfig,
    pub calibration: VarianceCalibration,
}

impl ScreeningResult {
    /// Assembles a result from precomputed statistics, deriving z-scores,
    /// p-values and the ranking.
    pub fn from_omega(
        omega: Vec<f64>,
        n_effective: usize,
        config: SliceConfig,
        calibration: VarianceCalibration,
    ) -> Self {
        let z: Vec<f64> = omega
            .iter()
            .map(|&w| scaled(w, n_effective, config.c, &calibration))
            .collect();
        let p_values = z.iter().map(|&v| normal_sf(v)).collect();
        let order = descending_order(&omega);
        Self {
            omega,
            z,
            p_values,
            order,
            n_effective,
            config,
            calibration,
        }
    }

    pub fn p(&self) -> usize {
        self.omega.len()
    }

    /// 1-based rank of every covariate.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.order.len()];
        for (pos, &k) in self.order.iter().enumerate() {
            ranks[k] = pos + 1;
        }
        ranks
    }
}

pub(crate) fn descending_order(omega: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.sort_by(|&a, &b| omega[b].partial_cmp(&omega[a]).unwrap().then(a.cmp(&b)));
    order
}

/// Screens every covariate with the default calibration.
pub fn screen_all(data: &Dataset, config: &SliceConfig) -> Result<ScreeningResult> {
    screen_all_with(data, config, SigmaMode::Auto)
}

/// Screens every covariate. Covariate `k` uses tie seed
/// `derive_seed(config.tie_seed, k)`, so the output does not depend on how the
/// work is scheduled across threads.
pub fn screen_all_with(
    data: &Dataset,
    config: &SliceConfig,
    sigma: SigmaMode,
) -> Result<ScreeningResult> {
    let y = data.y();
    let kernel = ColumnKernel::new(y, config.c)?;
    let calibration = VarianceCalibration::for_response(y, sigma)?;
    let all_constant = (0..data.p()).all(|k| {
        let col = data.column(k);
        col.iter().all(|&v| v == col[0])
    });
    if all_constant {
        return Err(Error::AllColumnsConstant);
    }
    let master = config.tie_seed;
    let omega = (0..data.p())
        .into_par_iter()
        .map(|k| kernel.omega(data.column(k), derive_seed(master, k as u64)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScreeningResult::from_omega(
        omega,
        config.effective_size(data.n()),
        *config,
        calibration,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    HardSize,
    HardLevel,
    By,
    Bh,
}

/// A selected covariate set together with the rule and threshold that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    /// Ascending covariate indices.
    pub indices: Vec<usize>,
    pub rule: RuleKind,
    pub realized_threshold: f64,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }
}

/// Keeps the `d` covariates with the largest statistic.
pub fn hard_threshold_select(result: &ScreeningResult, d: usize) -> Result<ActiveSet> {
    let p = result.p();
    if d == 0 || d > p {
        return Err(Error::InvalidSize { d, p });
    }
    let mut indices = result.order[..d].to_vec();
    indices.sort_unstable();
    Ok(ActiveSet {
        indices,
        rule: RuleKind::HardSize,
        realized_threshold: result.omega[result.order[d - 1]],
    })
}

/// Keeps every covariate whose statistic reaches `threshold`.
pub fn level_threshold_select(result: &ScreeningResult, threshold: f64) -> ActiveSet {
    let indices = (0..result.p())
        .filter(|&k| result.omega[k] >= threshold)
        .collect();
    ActiveSet {
        indices,
        rule: RuleKind::HardLevel,
        realized_threshold: threshold,
    }
}

/// Smallest number of top-ranked covariates covering all of `active`.
pub fn minimum_model_size(result: &ScreeningResult, active: &[usize]) -> Result<usize> {
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let p = result.p();
    let ranks = result.ranks();
    active
        .iter()
        .map(|&k| {
            ranks
                .get(k)
                .copied()
                .ok_or(Error::IndexOutOfRange { index: k, p })
        })
        .try_fold(0, |acc, r| r.map(|r| acc.max(r)))
}

/// Keeps the columns in `keep` (in the given order) and appends `num_aux`
/// independent standard-normal columns named `aux_1`, `aux_2`, ...
pub fn augment_with_noise(
    data: &Dataset,
    keep: &[usize],
    num_aux: usize,
    seed: u64,
) -> Result<Dataset> {
    let p = data.p();
    let n = data.n();
    if let Some(&bad) = keep.iter().find(|&&k| k >= p) {
        return Err(Error::IndexOutOfRange { index: bad, p });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = keep.iter().map(|&k| data.column(k).to_vec()).collect();
    for _ in 0..num_aux {
        columns.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }
    let names = if data.names.is_none() && num_aux == 0 {
        None
    } else {
        let mut names: Vec<String> = keep.iter().map(|&k| data.name(k)).collect();
        names.extend((1..=num_aux).map(|j| format!("aux_{j}")));
        Some(names)
    };
    Dataset::from_columns(columns, data.y.clone(), names)
}
