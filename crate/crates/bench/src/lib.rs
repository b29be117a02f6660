//! Fixtures shared by the benchmarks.

use transweight::{generate_synthetic, EmbeddingSpace, PhraseDataset, SyntheticConfig};

/// A small synthetic space and phrase set.
pub fn fixture(n: usize, num_phrases: usize) -> (EmbeddingSpace, PhraseDataset) {
    let config = SyntheticConfig { n, num_phrases, ..SyntheticConfig::default() };
    generate_synthetic(&config).expect("valid synthetic config")
}
