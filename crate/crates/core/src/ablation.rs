//! Prediction-time ablation of TransWeight's transformed representations.
//!
//! Whole transformations (rows of `H`) are dropped and compared with a
//! reference that drops the same expected number of individual entries. If
//! single transformations specialized on particular inputs, losing whole
//! rows would hurt more than losing scattered entries.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::eval::{evaluate_prepared, RankMethod};
use crate::model::dropout::{DropoutMask, MAX_ABLATION_RATE};
use crate::model::ModelParams;
use crate::phrase::PhraseDataset;
use crate::prepared::prepare;
use crate::rng::{derive_indexed, rng_from};

/// Default number of mask draws per rate.
pub const DEFAULT_REPEATS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    FullTransformation,
    PerParameter,
}

impl AblationMode {
    pub const BOTH: [AblationMode; 2] = [AblationMode::FullTransformation, AblationMode::PerParameter];

    /// Draws a mask for a `t x n` representation.
    pub fn draw(self, seed: u64, t: usize, n: usize, rate: f64) -> Result<DropoutMask> {
        let mut rng = rng_from(seed);
        match self {
            AblationMode::FullTransformation => DropoutMask::drop_transformations(&mut rng, t, n, rate),
            AblationMode::PerParameter => DropoutMask::drop_parameters(&mut rng, t, n, rate),
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AblationMode::FullTransformation => "full_transformation",
            AblationMode::PerParameter => "per_parameter",
        })
    }
}

impl FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "full_transformation" | "full" | "transformation" => Ok(AblationMode::FullTransformation),
            "per_parameter" | "parameter" => Ok(AblationMode::PerParameter),
            _ => Err(Error::Config(format!("unknown ablation mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rate: f64,
    pub mode: AblationMode,
    pub mean_pct_le_5: f64,
}

fn mask_seed(seed: u64, mode: AblationMode, rate_index: usize, repeat: usize) -> u64 {
    let label = format!("ablation/{mode}/{rate_index}");
    derive_indexed(seed, &label, repeat as u64)
}

/// Mean `pct_le_5` over `repeats` mask draws for every rate and mode.
///
/// Each draw applies one mask to every test item. Masks are not rescaled.
pub fn dropout_experiment(
    model: &ModelParams,
    test: &PhraseDataset,
    space: &EmbeddingSpace,
    rates: &[f64],
    modes: &[AblationMode],
    seed: u64,
    repeats: usize,
) -> Result<Vec<CurvePoint>> {
    if !model.kind().is_transweight() {
        return Err(Error::UnsupportedKind(model.kind().name()));
    }
    if repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    if let Some(&bad) = rates.iter().find(|r| !(0.0..=MAX_ABLATION_RATE).contains(*r)) {
        return Err(Error::DropoutRate(bad));
    }
    let items = prepare(test, space, model.kind(), None)?;
    let (t, n) = (model.dims().t, model.n());

    let mut curve = Vec::with_capacity(rates.len() * modes.len());
    for &mode in modes {
        for (rate_index, &rate) in rates.iter().enumerate() {
            let mut total = 0.0;
            for repeat in 0..repeats {
                let mask = mode.draw(mask_seed(seed, mode, rate_index, repeat), t, n, rate)?;
                let report = evaluate_prepared(model, &items, space, RankMethod::Corrected, Some(&mask))?;
                total += report.pct_le_5;
            }
            curve.push(CurvePoint { rate, mode, mean_pct_le_5: total / repeats as f64 });
        }
    }
    Ok(curve)
}

/// Average number of zeroed entries of `H` over `draws` masks.
pub fn mean_dropped(mode: AblationMode, t: usize, n: usize, rate: f64, draws: usize, seed: u64) -> Result<f64> {
    let mut total = 0usize;
    for d in 0..draws {
        total += mode.draw(mask_seed(seed, mode, 0, d), t, n, rate)?.dropped();
    }
    Ok(total as f64 / draws as f64)
}

/// `rate<TAB>mode<TAB>mean_pct_le_5` rows, four decimals.
pub fn write_curve<W: Write>(mut w: W, curve: &[CurvePoint]) -> Result<()> {
    writeln!(w, "rate\tmode\tmean_pct_le_5")?;
    for p in curve {
        writeln!(w, "{:.2}\t{}\t{:.4}", p.rate, p.mode, p.mean_pct_le_5)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_drop_same_expected_count() {
        let (t, n) = (10, 5);
        for rate in [0.0, 0.1, 0.3, 0.5, 0.9] {
            let full = mean_dropped(AblationMode::FullTransformation, t, n, rate, 1000, 3).unwrap();
            let param = mean_dropped(AblationMode::PerParameter, t, n, rate, 1000, 3).unwrap();
            assert!((full - param).abs() <= 0.01 * full.max(1.0), "rate {rate}: {full} vs {param}");
        }
    }

    #[test]
    fn fractional_row_counts_are_unbiased() {
        // 0.25 * 7 rows is not an integer; randomized rounding keeps the mean.
        let (t, n, rate) = (7, 5, 0.25);
        let expected = rate * (t * n) as f64;
        for mode in AblationMode::BOTH {
            let mean = mean_dropped(mode, t, n, rate, 4000, 11).unwrap();
            assert!((mean - expected).abs() < 0.05 * expected, "{mode}: {mean} vs {expected}");
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("full".parse::<AblationMode>().unwrap(), AblationMode::FullTransformation);
        assert_eq!("per-parameter".parse::<AblationMode>().unwrap(), AblationMode::PerParameter);
        assert!("x".parse::<AblationMode>().is_err());
    }

    #[test]
    fn curve_tsv() {
        let mut buf = Vec::new();
        write_curve(&mut buf, &[CurvePoint { rate: 0.5, mode: AblationMode::PerParameter, mean_pct_le_5: 42.0 }])
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "rate\tmode\tmean_pct_le_5\n0.50\tper_parameter\t42.0000\n");
    }
}
