#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use transweight::rng::rng_from;
use transweight::{CompositionInput, LexicalRow, ModelKind, ModelParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rng_from(seed)
}

pub fn uniform_vec(rng: &mut impl Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Overwrites every parameter with a uniform draw, so biases and masks leave
/// their special initial values.
pub fn randomize(model: &mut ModelParams, rng: &mut impl Rng, scale: f64) {
    for tensor in model.tensors_mut() {
        for x in &mut tensor.data {
            *x = rng.random_range(-scale..scale);
        }
    }
}

/// Random constituent pairs with random lexical rows for lexicalized kinds.
pub struct Inputs {
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub rows: Vec<(LexicalRow, LexicalRow)>,
}

impl Inputs {
    pub fn draw(rng: &mut impl Rng, count: usize, n: usize, vocab: usize) -> Self {
        let pairs = (0..count).map(|_| (uniform_vec(rng, n, 1.0), uniform_vec(rng, n, 1.0))).collect();
        let rows = (0..count)
            .map(|_| {
                let a = rng.random_range(0..vocab.max(1));
                let b = rng.random_range(0..vocab.max(1));
                (LexicalRow::Row(a), LexicalRow::Row(b))
            })
            .collect();
        Inputs { pairs, rows }
    }

    pub fn input(&self, k: usize, kind: ModelKind) -> CompositionInput<'_> {
        let (u, v) = &self.pairs[k];
        let input = CompositionInput::new(u, v);
        if kind.is_lexicalized() {
            input.with_words(self.rows[k].0, self.rows[k].1)
        } else {
            input
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
