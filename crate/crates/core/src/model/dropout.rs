//! Multiplicative masks over the transformed representations `H` (t x n).

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    t: usize,
    n: usize,
    scale: Vec<f64>,
}

impl DropoutMask {
    pub fn keep_all(t: usize, n: usize) -> Self {
        DropoutMask { t, n, scale: vec![1.0; t * n] }
    }

    pub fn from_scales(t: usize, n: usize, scale: Vec<f64>) -> Result<Self> {
        if scale.len() != t * n {
            return Err(Error::DimensionMismatch { expected: t * n, actual: scale.len() });
        }
        Ok(DropoutMask { t, n, scale })
    }

    /// Training-time dropout: each entry is zeroed with probability `rate`
    /// and survivors are scaled by `1 / (1 - rate)`, so evaluation needs no
    /// rescaling.
    pub fn inverted(rng: &mut impl Rng, t: usize, n: usize, rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::DropoutRate(rate));
        }
        let keep = 1.0 / (1.0 - rate);
        let scale = (0..t * n).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }).collect();
        Ok(DropoutMask { t, n, scale })
    }

    /// Prediction-time ablation that zeroes whole transformations (rows of
    /// `H`). The number of rows dropped is `rate * t` with randomized
    /// rounding, so its expectation is exactly `rate * t`. No rescaling.
    pub fn drop_transformations(rng: &mut impl Rng, t: usize, n: usize, rate: f64) -> Result<Self> {
        check_ablation_rate(rate)?;
        let rows = randomized_round(rng, rate * t as f64).min(t);
        let mut scale = vec![1.0; t * n];
        for j in index::sample(rng, t, rows) {
            scale[j * n..(j + 1) * n].fill(0.0);
        }
        Ok(DropoutMask { t, n, scale })
    }

    /// Reference ablation that zeroes individual entries of `H`, chosen
    /// uniformly, in the same expected number as [`Self::drop_transformations`].
    pub fn drop_parameters(rng: &mut impl Rng, t: usize, n: usize, rate: f64) -> Result<Self> {
        check_ablation_rate(rate)?;
        let entries = randomized_round(rng, rate * (t * n) as f64).min(t * n);
        let mut scale = vec![1.0; t * n];
        for k in index::sample(rng, t * n, entries) {
            scale[k] = 0.0;
        }
        Ok(DropoutMask { t, n, scale })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.t, self.n)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scale
    }

    /// Number of zeroed entries.
    pub fn dropped(&self) -> usize {
        self.scale.iter().filter(|&&s| s == 0.0).count()
    }
}

/// Largest prediction-time ablation rate.
pub const MAX_ABLATION_RATE: f64 = 0.9;

fn check_ablation_rate(rate: f64) -> Result<()> {
    if (0.0..=MAX_ABLATION_RATE).contains(&rate) {
        Ok(())
    } else {
        Err(Error::DropoutRate(rate))
    }
}

fn randomized_round(rng: &mut impl Rng, x: f64) -> usize {
    let floor = x.floor();
    let up = rng.random::<f64>() < x - floor;
    floor as usize + usize::from(up)
}
