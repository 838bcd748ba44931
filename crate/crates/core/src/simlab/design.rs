use ndarray::{Array2, ShapeBuilder};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian design with AR(1) covariance `rho^|k-l|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
}

/// Draws an `n x p` design (column-major) row by row via the AR(1)
/// recursion `X_1 = e_1`, `X_k = rho X_{k-1} + sqrt(1 - rho^2) e_k`, which has
/// exactly the target covariance at `O(np)` cost.
pub fn generate_design(spec: &DesignSpec) -> Result<Array2<f64>> {
    if spec.rho.is_nan() || spec.rho.abs() >= 1.0 {
        return Err(Error::InvalidRho(spec.rho));
    }
    if spec.n < 4 || spec.p == 0 {
        return Err(Error::IncompatibleDimensions(format!(
            "n = {}, p = {}",
            spec.n, spec.p
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let innovation = (1.0 - spec.rho * spec.rho).sqrt();
    let mut x = Array2::<f64>::zeros((spec.n, spec.p).f());
    for i in 0..spec.n {
        let mut prev: f64 = StandardNormal.sample(&mut rng);
        x[[i, 0]] = prev;
        for k in 1..spec.p {
            let e: f64 = StandardNormal.sample(&mut rng);
            prev = spec.rho * prev + innovation * e;
            x[[i, k]] = prev;
        }
    }
    Ok(x)
}
