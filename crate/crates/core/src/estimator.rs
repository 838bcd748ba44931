//! The sliced independence statistic for one covariate/response pair.
//!
//! Observations are ordered by the covariate, cut into `H` contiguous slices
//! of `c` observations each, and the within-slice dispersion of the response
//! ranks is compared against its total dispersion. The reference sample `T`
//! is the response sample itself, so the statistic depends on ranks only.
//!
//! With `r_m = #{i : y_m >= y_i}` and `R_i = #{j : y_j >= y_i}` over the `n'`
//! retained observations,
//!
//! ```text
//! S = 1 - (n' - 1) / (c - 1) * sum_h sum_{j<l} |r_(h,j) - r_(h,l)| / sum_i R_i (n' - R_i)
//! ```
//!
//! Both sums are integers, so any two evaluation strategies that agree on the
//! slice ordering produce bit-identical values.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paired covariate/response observations.
#[derive(Debug, Clone, Copy)]
pub struct PairedSample<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl<'a> PairedSample<'a> {
    pub const MIN_LEN: usize = 4;

    pub fn new(x: &'a [f64], y: &'a [f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        if x.len() < Self::MIN_LEN {
            return Err(Error::TooFewObservations {
                min: Self::MIN_LEN,
                got: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("covariate"));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &'a [f64] {
        self.x
    }

    pub fn y(&self) -> &'a [f64] {
        self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// How observations beyond the last full slice are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemainderPolicy {
    /// Drop `n mod c` observations chosen uniformly at random from the seed.
    #[default]
    TrimRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceConfig {
    /// Observations per slice.
    pub c: usize,
    pub remainder_policy: RemainderPolicy,
    /// Seed for remainder trimming and for breaking ties in the covariate.
    pub tie_seed: u64,
}

impl SliceConfig {
    pub fn new(c: usize, tie_seed: u64) -> Result<Self> {
        if c < 2 {
            return Err(Error::InvalidSliceSize(c));
        }
        Ok(Self {
            c,
            remainder_policy: RemainderPolicy::TrimRandom,
            tie_seed,
        })
    }

    pub fn with_seed(self, tie_seed: u64) -> Self {
        Self { tie_seed, ..self }
    }

    /// Number of observations retained after remainder handling.
    pub fn effective_size(&self, n: usize) -> usize {
        n - n % self.c
    }

    pub fn slice_count(&self, n: usize) -> usize {
        n / self.c
    }

    fn check(&self, n: usize) -> Result<usize> {
        if self.c < 2 {
            return Err(Error::InvalidSliceSize(self.c));
        }
        let n_eff = self.effective_size(n);
        if n_eff < 2 * self.c {
            return Err(Error::SampleTooSmall {
                n_effective: n_eff,
                c: self.c,
            });
        }
        Ok(n_eff)
    }
}

/// Retained observations in slice order: `order[h * c + j]` is the original
/// index of the `j`-th observation of slice `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceOrder {
    pub order: Vec<usize>,
    pub c: usize,
}

impl SliceOrder {
    pub fn n_effective(&self) -> usize {
        self.order.len()
    }

    pub fn slices(&self) -> std::slice::Chunks<'_, usize> {
        self.order.chunks(self.c)
    }
}

/// Original indices kept after remainder trimming, ascending.
fn retained_indices(n: usize, c: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let drop = n % c;
    if drop == 0 {
        return (0..n).collect();
    }
    let mut dropped = vec![false; n];
    for i in index::sample(rng, n, drop).iter() {
        dropped[i] = true;
    }
    (0..n).filter(|&i| !dropped[i]).collect()
}

/// Sorts `kept` by covariate value. Tied runs are reordered by random keys
/// drawn in ascending index order, so the outcome is a pure function of the
/// rng state.
fn order_by_covariate(x: &[f64], kept: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pairs: Vec<(f64, u32)> = kept.iter().map(|&i| (x[i], i as u32)).collect();
    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let has_ties = pairs.windows(2).any(|w| w[0].0 == w[1].0);
    if has_ties {
        let mut keys = vec![0u64; x.len()];
        for &i in kept {
            keys[i] = rng.random();
        }
        let mut start = 0;
        while start < pairs.len() {
            let mut end = start + 1;
            while end < pairs.len() && pairs[end].0 == pairs[start].0 {
                end += 1;
            }
            if end - start > 1 {
                pairs[start..end].sort_unstable_by_key(|&(_, i)| (keys[i as usize], i));
            }
            start = end;
        }
    }
    pairs.into_iter().map(|(_, i)| i as usize).collect()
}

/// Trims, orders and slices the sample. Shared by every estimator path so
/// that all of them see the same tie-broken ordering.
pub fn slice_order(sample: &PairedSample<'_>, config: &SliceConfig) -> Result<SliceOrder> {
    config.check(sample.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.tie_seed);
    let kept = retained_indices(sample.len(), config.c, &mut rng);
    let order = order_by_covariate(sample.x, &kept, &mut rng);
    Ok(SliceOrder { order, c: config.c })
}

/// Response rank counts over a retained subsample.
#[derive(Debug, Clone)]
pub(crate) struct ResponseRanks {
    /// `r[i] = #{kept j : y_i >= y_j}`, indexed by original position.
    r: Vec<u32>,
    /// `sum_i R_i (n' - R_i)`.
    denominator: u64,
}

impl ResponseRanks {
    fn new(y: &[f64], kept: &[usize]) -> Self {
        let n_eff = kept.len() as u64;
        let mut sorted: Vec<(f64, u32)> = kept.iter().map(|&i| (y[i], i as u32)).collect();
        sorted.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut r = vec![0u32; y.len()];
        let mut denominator = 0u64;
        let mut start = 0;
        while start < sorted.len() {
            let mut end = start + 1;
            while end < sorted.len() && sorted[end].0 == sorted[start].0 {
                end += 1;
            }
            // Within a tied run: #{<= y} = end, #{>= y} = n' - start.
            let big_r = n_eff - start as u64;
            denominator += (end - start) as u64 * big_r * (n_eff - big_r);
            for &(_, i) in &sorted[start..end] {
                r[i as usize] = end as u32;
            }
            start = end;
        }
        Self { r, denominator }
    }

    fn dispersion_sum(&self, order: &[usize], c: usize) -> u64 {
        let mut buf = Vec::with_capacity(c);
        let mut total = 0i64;
        for slice in order.chunks_exact(c) {
            buf.clear();
            buf.extend(slice.iter().map(|&i| self.r[i]));
            buf.sort_unstable();
            // sum_{j<l} |a_j - a_l| over sorted a
            for (k, &v) in buf.iter().enumerate() {
                total += (2 * k as i64 + 1 - c as i64) * v as i64;
            }
        }
        total as u64
    }
}

/// Final assembly from the two integer sums. The difference is formed in
/// integers so the result carries a single division rounding.
#[inline]
pub(crate) fn combine(numerator: u64, denominator: u64, n_eff: usize, c: usize) -> f64 {
    let scale = (c - 1) as i128 * denominator as i128;
    let diff = scale - (n_eff - 1) as i128 * numerator as i128;
    diff as f64 / scale as f64
}

/// Precomputed state for evaluating many covariates against one response.
///
/// When no trimming is needed the response ranks are shared across columns;
/// otherwise each column recomputes them on its own retained subsample.
pub(crate) struct ColumnKernel<'a> {
    y: &'a [f64],
    c: usize,
    shared: Option<ResponseRanks>,
}

impl<'a> ColumnKernel<'a> {
    pub(crate) fn new(y: &'a [f64], c: usize) -> Result<Self> {
        let n = y.len();
        let probe = SliceConfig::new(c, 0)?;
        probe.check(n)?;
        let shared = if n.is_multiple_of(c) {
            let all: Vec<usize> = (0..n).collect();
            let ranks = ResponseRanks::new(y, &all);
            if ranks.denominator == 0 {
                return Err(Error::DegenerateResponse);
            }
            Some(ranks)
        } else {
            None
        };
        Ok(Self { y, c, shared })
    }

    pub(crate) fn omega(&self, x: &[f64], tie_seed: u64) -> Result<f64> {
        let n = self.y.len();
        let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
        let kept = retained_indices(n, self.c, &mut rng);
        let order = order_by_covariate(x, &kept, &mut rng);
        let local;
        let ranks = match &self.shared {
            Some(r) => r,
            None => {
                local = ResponseRanks::new(self.y, &kept);
                &local
            }
        };
        if ranks.denominator == 0 {
            return Err(Error::DegenerateResponse);
        }
        let num = ranks.dispersion_sum(&order, self.c);
        Ok(combine(num, ranks.denominator, kept.len(), self.c))
    }
}

/// Computes the statistic alone in `O(n log n)`.
pub fn sliced_statistic(sample: &PairedSample<'_>, config: &SliceConfig) -> Result<f64> {
    config.check(sample.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.tie_seed);
    let kept = retained_indices(sample.len(), config.c, &mut rng);
    let ranks = ResponseRanks::new(sample.y, &kept);
    if ranks.denominator == 0 {
        return Err(Error::DegenerateResponse);
    }
    let order = order_by_covariate(sample.x, &kept, &mut rng);
    let num = ranks.dispersion_sum(&order, config.c);
    Ok(combine(num, ranks.denominator, kept.len(), config.c))
}

/// Quadratic-time transcription of the statistic. Agrees with
/// [`sliced_statistic`] exactly.
pub fn naive_estimate(sample: &PairedSample<'_>, config: &SliceConfig) -> Result<f64> {
    let so = slice_order(sample, config)?;
    let y = sample.y;
    let kept = &so.order;
    let n_eff = kept.len() as u64;

    let mut denominator = 0u64;
    for &i in kept {
        let big_r = kept.iter().filter(|&&j| y[j] >= y[i]).count() as u64;
        denominator += big_r * (n_eff - big_r);
    }
    if denominator == 0 {
        return Err(Error::DegenerateResponse);
    }

    let rank = |m: usize| kept.iter().filter(|&&i| y[m] >= y[i]).count() as i64;
    let mut numerator = 0u64;
    for slice in so.slices() {
        let r: Vec<i64> = slice.iter().map(|&m| rank(m)).collect();
        for j in 0..r.len() {
            for l in (j + 1)..r.len() {
                numerator += (r[j] - r[l]).unsigned_abs();
            }
        }
    }
    Ok(combine(numerator, denominator, kept.len(), config.c))
}

/// Whether the null variance is the continuous-response constant or a
/// plug-in estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationMode {
    Fixed,
    Plugin,
}

/// Requested calibration; `Auto` uses the fixed constant unless the response
/// has repeated values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    Fixed,
    Plugin,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceCalibration {
    pub mode: CalibrationMode,
    pub sigma_sq: f64,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
}

impl VarianceCalibration {
    /// Null variance of the scaled statistic for a continuous response.
    pub const CONTINUOUS_SIGMA_SQ: f64 = 4.0 / 5.0;

    pub fn fixed() -> Self {
        Self {
            mode: CalibrationMode::Fixed,
            sigma_sq: Self::CONTINUOUS_SIGMA_SQ,
            theta1: None,
            theta2: None,
        }
    }

    pub fn for_response(y: &[f64], mode: SigmaMode) -> Result<Self> {
        match mode {
            SigmaMode::Fixed => Ok(Self::fixed()),
            SigmaMode::Plugin => plugin_calibration(y),
            SigmaMode::Auto => {
                if has_repeats(y) {
                    plugin_calibration(y)
                } else {
                    Ok(Self::fixed())
                }
            }
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma_sq.is_finite() && self.sigma_sq > 0.0) {
            return Err(Error::InvalidCalibration(self.sigma_sq));
        }
        Ok(())
    }
}

fn has_repeats(y: &[f64]) -> bool {
    let mut v = y.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    v.windows(2).any(|w| w[0] == w[1])
}

/// Plug-in estimates of the two moments driving the null variance, with the
/// response as the reference sample.
///
/// `theta2 = n^-1 sum_i G(y_i)(1 - G(y_i))` with `G(t) = n^-1 #{y_j >= t}`;
/// `theta1 = {n(n-1)}^-1 sum_{j != l} {F(min(y_j, y_l)) - F(y_j) F(y_l)}^2` with
/// `F(t) = n^-1 #{y_i <= t}`. Runs in `O(n log n)`.
pub fn plugin_calibration(y: &[f64]) -> Result<VarianceCalibration> {
    let n = y.len();
    if n < 2 {
        return Err(Error::TooFewObservations { min: 2, got: n });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    let mut sorted = y.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;

    // F at each sorted position (ties share the run end), G from the run start.
    let mut cdf = vec![0.0; n];
    let mut theta2 = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sorted[end] == sorted[start] {
            end += 1;
        }
        let g = (n - start) as f64 / nf;
        theta2 += (end - start) as f64 * g * (1.0 - g);
        let f = end as f64 / nf;
        cdf[start..end].fill(f);
        start = end;
    }
    theta2 /= nf;
    if theta2 <= 0.0 {
        return Err(Error::DegenerateResponse);
    }

    // For sorted F values a <= b the summand is a^2 (1 - b)^2.
    let mut prefix_sq = 0.0;
    let mut pair_sum = 0.0;
    for &f in &cdf {
        pair_sum += prefix_sq * (1.0 - f) * (1.0 - f);
        prefix_sq += f * f;
    }
    let theta1 = 2.0 * pair_sum / (nf * (nf - 1.0));
    let sigma_sq = 2.0 * theta1 / (theta2 * theta2);
    Ok(VarianceCalibration {
        mode: CalibrationMode::Plugin,
        sigma_sq,
        theta1: Some(theta1),
        theta2: Some(theta2),
    })
}

/// Scaled statistic `sqrt(n'(c-1)) * value / sigma`.
pub fn z_statistic(
    value: f64,
    n_effective: usize,
    c: usize,
    cal: &VarianceCalibration,
) -> Result<f64> {
    cal.validate()?;
    if c < 2 {
        return Err(Error::InvalidSliceSize(c));
    }
    Ok(scaled(value, n_effective, c, cal))
}

/// The one place the z-score arithmetic lives, so stored and recomputed
/// p-values agree bit for bit.
#[inline]
pub(crate) fn scaled(value: f64, n_effective: usize, c: usize, cal: &VarianceCalibration) -> f64 {
    ((n_effective * (c - 1)) as f64).sqrt() * value / cal.sigma()
}

/// Upper tail `1 - Phi(z)` of the standard normal, accurate far into the tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceEstimate {
    pub omega_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub c: usize,
}

/// Statistic, z-score and upper-tail p-value under the default calibration
/// for this response.
pub fn sliced_estimate(
    sample: &PairedSample<'_>,
    config: &SliceConfig,
) -> Result<DependenceEstimate> {
    config.check(sample.len())?;
    let cal = VarianceCalibration::for_response(sample.y, SigmaMode::Auto)?;
    sliced_estimate_with(sample, config, &cal)
}

pub fn sliced_estimate_with(
    sample: &PairedSample<'_>,
    config: &SliceConfig,
    cal: &VarianceCalibration,
) -> Result<DependenceEstimate> {
    let omega_hat = sliced_statistic(sample, config)?;
    let n_effective = config.effective_size(sample.len());
    let z = z_statistic(omega_hat, n_effective, config.c, cal)?;
    Ok(DependenceEstimate {
        omega_hat,
        z,
        p_value: normal_sf(z),
        n_effective,
        c: config.c,
    })
}
