//! Synthetic compositional data.
//!
//! Words are drawn around per-class centroids. Every ordered pair of classes
//! owns one random linear map (a shared map plus its own deviation), and a phrase's target vector is that map
//! applied to the concatenated constituent vectors, plus Gaussian noise. Words
//! of the same class therefore compose the same way, which is the structure a
//! shared-transformation model can exploit and a per-word model cannot.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::linalg::{concat, matvec};
use crate::phrase::{PhraseDataset, PhraseRecord};
use crate::rng::{derive_seed, rng_from};

/// Standard deviation of a word around its class centroid, relative to the
/// unit-variance centroid components.
pub const WORD_SPREAD: f64 = 0.6;

/// Scale of each class pair's own map relative to the shared map.
pub const CLASS_DEVIATION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n: usize,
    pub num_classes: usize,
    pub words_per_class: usize,
    pub num_phrases: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig { n: 20, num_classes: 5, words_per_class: 20, num_phrases: 600, noise_sigma: 0.05, seed: 0 }
    }
}

impl SyntheticConfig {
    pub fn vocabulary_size(&self) -> usize {
        self.num_classes * self.words_per_class
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.num_classes == 0 || self.words_per_class == 0 || self.num_phrases == 0 {
            return Err(Error::Config("synthetic counts must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise_sigma {} must be >= 0", self.noise_sigma)));
        }
        let words = self.vocabulary_size();
        if self.num_phrases > words * words {
            return Err(Error::Config(format!(
                "{} phrases requested but only {} word pairs exist",
                self.num_phrases,
                words * words
            )));
        }
        Ok(())
    }
}

pub fn word_token(i: usize) -> String {
    format!("w{i}")
}

pub fn phrase_token(i: usize, j: usize) -> String {
    format!("w{i}_w{j}")
}

/// Draws an embedding space and a phrase set whose tokens all resolve in it.
///
/// The space lists the words `w0..` first, then the phrases in dataset order.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<(EmbeddingSpace, PhraseDataset)> {
    config.validate()?;
    let n = config.n;
    let words = config.vocabulary_size();
    let class_of = |w: usize| w / config.words_per_class;

    let mut rng = rng_from(derive_seed(config.seed, "synthetic/words"));
    let centroids: Vec<Vec<f64>> = (0..config.num_classes).map(|_| gaussian_vector(&mut rng, n, 1.0)).collect();
    let word_vectors: Vec<Vec<f64>> = (0..words)
        .map(|w| {
            let offset = gaussian_vector(&mut rng, n, WORD_SPREAD);
            centroids[class_of(w)].iter().zip(offset).map(|(c, o)| c + o).collect()
        })
        .collect();

    // One n x 2n map per ordered class pair: a shared map plus a
    // class-pair-specific deviation, entries N(0, 1/(2n)) before scaling.
    let mut rng = rng_from(derive_seed(config.seed, "synthetic/maps"));
    let map_scale = (1.0 / (2 * n) as f64).sqrt();
    let shared = gaussian_vector(&mut rng, 2 * n * n, map_scale);
    let maps: Vec<Vec<f64>> = (0..config.num_classes * config.num_classes)
        .map(|_| {
            let own = gaussian_vector(&mut rng, 2 * n * n, map_scale * CLASS_DEVIATION);
            shared.iter().zip(own).map(|(s, o)| s + o).collect()
        })
        .collect();

    let mut rng = rng_from(derive_seed(config.seed, "synthetic/pairs"));
    let mut pairs: Vec<usize> = index::sample(&mut rng, words * words, config.num_phrases).into_vec();
    pairs.sort_unstable();

    let noise = Normal::new(0.0, config.noise_sigma).expect("validated sigma");
    let mut rng = rng_from(derive_seed(config.seed, "synthetic/noise"));
    let mut records = Vec::with_capacity(pairs.len());
    let mut rows: Vec<(String, Vec<f64>)> = (0..words).map(|w| (word_token(w), word_vectors[w].clone())).collect();
    for pair in pairs {
        let (i, j) = (pair / words, pair % words);
        let map = &maps[class_of(i) * config.num_classes + class_of(j)];
        let mut target = matvec(map, 2 * n, &concat(&word_vectors[i], &word_vectors[j]));
        for c in &mut target {
            *c += noise.sample(&mut rng);
        }
        let phrase = phrase_token(i, j);
        records.push(PhraseRecord::new(word_token(i), word_token(j), phrase.clone())?);
        rows.push((phrase, target));
    }

    Ok((EmbeddingSpace::from_rows(rows)?, PhraseDataset::new(records)?))
}

fn gaussian_vector(rng: &mut impl Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

/// Splits `dataset` by holding out a random `fraction` of first-position words.
///
/// Returns `(seen, unseen)`: phrases whose first word was kept, and phrases
/// whose first word was held out and whose second word still occurs in `seen`.
pub fn hold_out_first_words(dataset: &PhraseDataset, fraction: f64, seed: u64) -> (PhraseDataset, PhraseDataset) {
    let mut firsts: Vec<&str> = dataset.records().iter().map(|r| r.word1.as_str()).collect();
    firsts.sort_unstable();
    firsts.dedup();
    let take = ((firsts.len() as f64) * fraction).round() as usize;
    let mut rng = rng_from(derive_seed(seed, "synthetic/holdout"));
    let held: HashSet<&str> =
        index::sample(&mut rng, firsts.len(), take.min(firsts.len())).into_iter().map(|i| firsts[i]).collect();

    let seen = dataset.retain(|r| !held.contains(r.word1.as_str()));
    let seen_second: HashSet<&str> = seen.records().iter().map(|r| r.word2.as_str()).collect();
    let unseen = dataset.retain(|r| held.contains(r.word1.as_str()) && seen_second.contains(r.word2.as_str()));
    (seen, unseen)
}
