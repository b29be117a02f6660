//! Rank evaluation of composed phrase vectors against the full vocabulary.
//!
//! The corrected method measures every vocabulary vector's similarity to the
//! target `p~` and asks how many beat the composed vector. The original
//! method uses the composed vector as the reference point instead, so the
//! yardstick moves from model to model; it is kept for comparison.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::loss::cosine_distance_loss;
use crate::model::dropout::DropoutMask;
use crate::model::lexical::LexicalResolver;
use crate::model::ModelParams;
use crate::phrase::PhraseDataset;
use crate::prepared::{prepare, PreparedPhrase};

/// Ranks at or below this count as well composed.
pub const GOOD_RANK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    Corrected,
    Original,
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankMethod::Corrected => "corrected",
            RankMethod::Original => "original",
        })
    }
}

impl FromStr for RankMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "corrected" => Ok(RankMethod::Corrected),
            "original" | "baroni" => Ok(RankMethod::Original),
            _ => Err(Error::Config(format!("unknown rank method {s:?}"))),
        }
    }
}

fn unit(x: &[f64]) -> Result<Vec<f64>> {
    let length = norm(x);
    if length == 0.0 || !length.is_finite() {
        return Err(Error::ZeroNorm(None));
    }
    Ok(x.iter().map(|c| c / length).collect())
}

fn target_row(space: &EmbeddingSpace, composed: &[f64], phrase: &str) -> Result<usize> {
    space.check_dim(composed)?;
    space.row(phrase).ok_or_else(|| Error::UnknownToken(phrase.to_owned()))
}

/// `1 + #{w != phrase : sim(p~, w) > sim(p~, composed)}`.
pub fn corrected_rank(space: &EmbeddingSpace, composed: &[f64], phrase: &str) -> Result<usize> {
    let target = target_row(space, composed, phrase)?;
    Ok(corrected_rank_row(space, &unit(composed)?, target))
}

/// `1 + #{w != phrase : sim(composed, w) > sim(composed, p~)}`.
pub fn original_rank(space: &EmbeddingSpace, composed: &[f64], phrase: &str) -> Result<usize> {
    let target = target_row(space, composed, phrase)?;
    Ok(original_rank_row(space, &unit(composed)?, target))
}

pub fn rank(space: &EmbeddingSpace, composed: &[f64], phrase: &str, method: RankMethod) -> Result<usize> {
    match method {
        RankMethod::Corrected => corrected_rank(space, composed, phrase),
        RankMethod::Original => original_rank(space, composed, phrase),
    }
}

fn corrected_rank_row(space: &EmbeddingSpace, composed_unit: &[f64], target: usize) -> usize {
    let reference = space.unit(target);
    let threshold = dot(reference, composed_unit);
    1 + (0..space.len()).filter(|&row| row != target && dot(reference, space.unit(row)) > threshold).count()
}

fn original_rank_row(space: &EmbeddingSpace, composed_unit: &[f64], target: usize) -> usize {
    let threshold = dot(composed_unit, space.unit(target));
    1 + (0..space.len()).filter(|&row| row != target && dot(composed_unit, space.unit(row)) > threshold).count()
}

/// First, second and third quartile of a rank list.
///
/// Q2 is the median; Q1 and Q3 are the medians of the lower and upper
/// halves, with the middle element of an odd-length list in neither half.
pub fn quartiles(ranks: &[usize]) -> Result<(f64, f64, f64)> {
    if ranks.is_empty() {
        return Err(Error::EmptyRanks);
    }
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let len = sorted.len();
    if len == 1 {
        let x = sorted[0] as f64;
        return Ok((x, x, x));
    }
    let half = len / 2;
    let lower = &sorted[..half];
    let upper = &sorted[len - half..];
    Ok((median(lower), median(&sorted), median(upper)))
}

fn median(sorted: &[usize]) -> f64 {
    let len = sorted.len();
    if len % 2 == 1 {
        sorted[len / 2] as f64
    } else {
        (sorted[len / 2 - 1] + sorted[len / 2]) as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub phrase: String,
    pub rank: usize,
    pub cosine_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: RankMethod,
    pub cos_d: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub pct_le_5: f64,
    pub per_item: Vec<ItemResult>,
}

impl EvalReport {
    /// Aggregates per-item results.
    pub fn from_items(method: RankMethod, per_item: Vec<ItemResult>) -> Result<Self> {
        if per_item.is_empty() {
            return Err(Error::InvalidReport("no evaluated items".into()));
        }
        let ranks: Vec<usize> = per_item.iter().map(|r| r.rank).collect();
        let (q1, q2, q3) = quartiles(&ranks)?;
        let count = per_item.len() as f64;
        let cos_d = per_item.iter().map(|r| r.cosine_distance).sum::<f64>() / count;
        let good = ranks.iter().filter(|&&r| r <= GOOD_RANK).count();
        Ok(EvalReport { method, cos_d, q1, q2, q3, pct_le_5: 100.0 * good as f64 / count, per_item })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidReport(m.to_owned()));
        if self.per_item.is_empty() {
            return fail("empty per-item list");
        }
        if !(self.q1 <= self.q2 && self.q2 <= self.q3) {
            return fail("quartiles out of order");
        }
        if !(0.0..=100.0).contains(&self.pct_le_5) {
            return fail("percentage outside [0, 100]");
        }
        if !self.cos_d.is_finite() {
            return fail("non-finite cosine distance");
        }
        Ok(())
    }

    /// `cos-d  Q1  Q2  Q3  pct%`, tab-separated: three decimals for the
    /// distance, quartiles without trailing zeros, two decimals for the
    /// percentage.
    pub fn tsv_metrics(&self) -> String {
        format!(
            "{:.3}\t{}\t{}\t{}\t{:.2}%",
            self.cos_d,
            format_quartile(self.q1),
            format_quartile(self.q2),
            format_quartile(self.q3),
            self.pct_le_5
        )
    }

    /// Table row with a leading model column.
    pub fn tsv_row(&self, model: &str) -> String {
        format!("{model}\t{}", self.tsv_metrics())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub const TSV_HEADER: &str = "model\tcos-d\tQ1\tQ2\tQ3\t<=5";

fn format_quartile(q: f64) -> String {
    if q.fract() == 0.0 {
        format!("{q:.0}")
    } else {
        format!("{q}")
    }
}

/// Composes every test phrase (no dropout) and ranks it against the full
/// vocabulary.
pub fn evaluate(
    model: &ModelParams,
    test: &PhraseDataset,
    space: &EmbeddingSpace,
    method: RankMethod,
    resolver: Option<&LexicalResolver>,
) -> Result<EvalReport> {
    let items = prepare(test, space, model.kind(), resolver)?;
    evaluate_prepared(model, &items, space, method, None)
}

/// Evaluation over already resolved phrases, optionally with one fixed mask
/// applied to the transformed representations of every item.
pub fn evaluate_prepared(
    model: &ModelParams,
    items: &[PreparedPhrase],
    space: &EmbeddingSpace,
    method: RankMethod,
    mask: Option<&DropoutMask>,
) -> Result<EvalReport> {
    let per_item = items
        .par_iter()
        .map(|item| {
            let composed = model.compose(&item.input(space), mask)?;
            let composed_unit = unit(&composed)?;
            let rank = match method {
                RankMethod::Corrected => corrected_rank_row(space, &composed_unit, item.phrase),
                RankMethod::Original => original_rank_row(space, &composed_unit, item.phrase),
            };
            Ok(ItemResult {
                phrase: space.token(item.phrase).to_owned(),
                rank,
                cosine_distance: cosine_distance_loss(&composed, space.vector(item.phrase))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_items(method, per_item)
}
