use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    A1,
    A2,
    A3,
    A4,
    B1,
    B2,
    B3,
    B4,
    C1,
    C2,
    C3,
    C4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Normal,
    /// Student t with 3 degrees of freedom.
    StudentT3,
}

impl ModelId {
    pub const ALL: [ModelId; 12] = [
        Self::A1,
        Self::A2,
        Self::A3,
        Self::A4,
        Self::B1,
        Self::B2,
        Self::B3,
        Self::B4,
        Self::C1,
        Self::C2,
        Self::C3,
        Self::C4,
    ];

    pub fn noise(self) -> NoiseKind {
        match self {
            Self::A2 | Self::A4 | Self::C2 | Self::C4 => NoiseKind::StudentT3,
            _ => NoiseKind::Normal,
        }
    }

    /// Whether the active set is `{1..s}` (linear-index models).
    pub fn uses_sparsity(self) -> bool {
        !matches!(self, Self::B1 | Self::B2 | Self::B3 | Self::B4)
    }

    /// Study the model belongs to (1, 2 or 3).
    pub fn study(self) -> u8 {
        match self {
            Self::A1 | Self::A2 | Self::A3 | Self::A4 => 1,
            Self::B1 | Self::B2 | Self::B3 | Self::B4 => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{self:?}").to_lowercase();
        f.write_str(&s)
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_lowercase().replace(['.', '(', ')'], "");
        Self::ALL
            .into_iter()
            .find(|m| m.to_string() == norm)
            .ok_or_else(|| format!("unknown model {s:?} (expected a1..a4, b1..b4, c1..c4)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: ModelId,
    /// Number of leading covariates with unit coefficient; fixed at 4 for the
    /// interaction models.
    pub s: usize,
}

impl ModelSpec {
    pub fn new(id: ModelId, s: usize) -> Result<Self> {
        if id.uses_sparsity() {
            if s == 0 {
                return Err(Error::IncompatibleDimensions(
                    "sparsity s must be at least 1".into(),
                ));
            }
            Ok(Self { id, s })
        } else {
            Ok(Self { id, s: 4 })
        }
    }

    /// 0-based indices of the covariates appearing in the model formula.
    pub fn active_set(&self) -> Vec<usize> {
        match self.id {
            ModelId::B1 => vec![0, 1, 19, 20],
            ModelId::B2 | ModelId::B3 => vec![0, 1, 2, 19],
            ModelId::B4 => vec![0, 1, 10, 11],
            _ => (0..self.s).collect(),
        }
    }

    /// Smallest number of covariates the formula needs.
    pub fn min_p(&self) -> usize {
        self.active_set().into_iter().max().map_or(1, |m| m + 1)
    }
}

/// Response for one design row and one noise draw.
pub fn response_value(model: &ModelSpec, row: ArrayView1<'_, f64>, eps: f64) -> f64 {
    let x = |k: usize| row[k - 1];
    let lin = || row.iter().take(model.s).sum::<f64>();
    let gate = |v: f64, cap: f64| if v <= cap { 5.0 * v } else { 0.0 };
    match model.id {
        ModelId::A1 | ModelId::A2 => lin() + 2.0 * eps,
        ModelId::A3 | ModelId::A4 => lin().exp() + 4.0 * eps,
        ModelId::B1 => {
            let u = x(20) + x(21);
            4.0 * x(1) * x(2) + gate(u, 3.0).exp() * eps
        }
        ModelId::B2 => 4.0 * x(1) * x(2) + 3.0 * x(3).powi(2) + gate(x(20), 3.0).exp() * eps,
        ModelId::B3 => 4.0 * x(1) + 5.0 * x(2) + 3.0 * x(3).powi(2) + gate(x(20), 4.0).exp() * eps,
        ModelId::B4 => 2.0 * x(1) * x(2) + 3.0 * x(11) * x(12) + eps,
        ModelId::C1 | ModelId::C2 => 2.0 * lin() + eps,
        ModelId::C3 | ModelId::C4 => (lin() / 5.0).exp() + eps,
    }
}

/// Draws the response for every row of `x`.
pub fn generate_response(x: &Array2<f64>, model: &ModelSpec, seed: u64) -> Result<Vec<f64>> {
    let p = x.ncols();
    if p < model.min_p() {
        return Err(Error::IncompatibleDimensions(format!(
            "model {} needs at least {} covariates, design has {}",
            model.id,
            model.min_p(),
            p
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t3 = StudentT::new(3.0).expect("valid degrees of freedom");
    let noise = model.id.noise();
    Ok(x.rows()
        .into_iter()
        .map(|row| {
            let eps = match noise {
                NoiseKind::Normal => StandardNormal.sample(&mut rng),
                NoiseKind::StudentT3 => t3.sample(&mut rng),
            };
            response_value(model, row, eps)
        })
        .collect())
}
