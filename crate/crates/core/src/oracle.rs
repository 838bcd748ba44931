//! Literal reference implementations. Slow by construction; the test suites
//! compare them against the optimised paths and expect exact agreement.

use crate::error::{Error, Result};
use crate::estimator::{slice_order, sliced_statistic, PairedSample, SliceConfig};
use crate::fdr::{by_threshold, harmonic_number, Adjustment, FdrConfig};
use crate::screening::ScreeningResult;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<T> {
    pub instance: String,
    pub optimized: T,
    pub oracle: T,
    pub agrees: bool,
}

/// The statistic evaluated term by term: every pairwise rank difference
/// inside every slice, each rank counted by a full pass over the reference
/// sample. `O(n^2 c)`.
pub fn oracle_estimate(sample: &PairedSample<'_>, config: &SliceConfig) -> Result<f64> {
    let so = slice_order(sample, config)?;
    let y = sample.y();
    let t: Vec<f64> = so.order.iter().map(|&i| y[i]).collect();
    let n = t.len();
    let c = config.c;

    let mut denominator = 0u64;
    for &ti in &t {
        let big_r = t.iter().filter(|&&yj| yj >= ti).count() as u64;
        denominator += big_r * (n as u64 - big_r);
    }
    if denominator == 0 {
        return Err(Error::DegenerateResponse);
    }

    let mut numerator = 0u64;
    for slice in so.slices() {
        for j in 0..c {
            for l in (j + 1)..c {
                let r_j = t.iter().filter(|&&ti| y[slice[j]] >= ti).count() as i64;
                let r_l = t.iter().filter(|&&ti| y[slice[l]] >= ti).count() as i64;
                numerator += (r_j - r_l).unsigned_abs();
            }
        }
    }
    // 1 - (n-1) N / ((c-1) D), over a common integer denominator
    let scale = (c - 1) as i128 * denominator as i128;
    Ok((scale - (n - 1) as i128 * numerator as i128) as f64 / scale as f64)
}

/// Selected set of the infimum definition, found by scanning every positive
/// observed statistic as a candidate threshold.
///
/// `p_values[k]` must be the upper-tail p-value evaluated at `omega[k]`.
pub fn oracle_threshold(
    omega: &[f64],
    p_values: &[f64],
    q: f64,
    adjustment: Adjustment,
) -> Vec<usize> {
    let p = omega.len();
    let constant = match adjustment {
        Adjustment::By => harmonic_number(p),
        Adjustment::Bh => 1.0,
    };
    let mut best: Option<f64> = None;
    for (k, &t) in omega.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let count = omega.iter().filter(|&&w| w >= t).count();
        let estimate = constant * p as f64 * p_values[k] / count.max(1) as f64;
        if estimate <= q && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    }
    match best {
        Some(t) => (0..p).filter(|&k| omega[k] >= t).collect(),
        None => Vec::new(),
    }
}

pub fn compare_estimate(
    sample: &PairedSample<'_>,
    config: &SliceConfig,
) -> Result<OracleReport<f64>> {
    let optimized = sliced_statistic(sample, config)?;
    let oracle = oracle_estimate(sample, config)?;
    Ok(OracleReport {
        instance: format!("n={} c={} seed={}", sample.len(), config.c, config.tie_seed),
        optimized,
        oracle,
        agrees: optimized.to_bits() == oracle.to_bits(),
    })
}

pub fn compare_threshold(result: &ScreeningResult, config: &FdrConfig) -> OracleReport<Vec<usize>> {
    let optimized = by_threshold(result, config).selected;
    let oracle = oracle_threshold(&result.omega, &result.p_values, config.q, config.adjustment);
    OracleReport {
        instance: format!("p={} q={} {:?}", result.p(), config.q, config.adjustment),
        agrees: optimized == oracle,
        optimized,
        oracle,
    }
}
