//! Vector composition models for distributional semantics.
//!
//! A composition model maps the vectors `u`, `v` of a two-word phrase to a
//! phrase vector `p` in the same space. This crate implements additive
//! baselines, the Matrix, WMask, FullLex and BiLinear models, and
//! transformation weighting (TransWeight) with its local-weighting variants;
//! trains them with Adagrad on the cosine distance to the phrase's own
//! embedding; and evaluates them by ranking against the full vocabulary.
//!
//! ```
//! use transweight::{init_model, CompositionInput, ModelConfig, ModelKind};
//!
//! let model = init_model(&ModelConfig::new(ModelKind::TransWeight, 4).with_t(3), 7).unwrap();
//! let p = model
//!     .compose(&CompositionInput::new(&[1.0, 0.0, 0.5, 0.0], &[0.0, 1.0, 0.0, 0.5]), None)
//!     .unwrap();
//! assert_eq!(p.len(), 4);
//! ```

pub mod ablation;
pub mod checkpoint;
pub mod config;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod phrase;
pub mod prepared;
pub mod rng;
pub mod synthetic;
pub mod train;

pub use ablation::{dropout_experiment, AblationMode, CurvePoint};
pub use checkpoint::Checkpoint;
pub use embedding::{cosine_similarity, EmbeddingFormat, EmbeddingSpace, TextPrecision};
pub use error::{Error, Result};
pub use eval::{corrected_rank, evaluate, original_rank, quartiles, EvalReport, ItemResult, RankMethod};
pub use loss::cosine_distance_loss;
pub use model::backward::{gradients, loss_and_gradients, Example, ParamGrads};
pub use model::collapse::{collapse_transweight_linear, CollapsedMatrix};
pub use model::dropout::DropoutMask;
pub use model::forward::CompositionInput;
pub use model::lexical::{FallbackPolicy, LexicalResolver, LexicalRow, Lexicon};
pub use model::{
    init_model, param_count, weighting_param_count, Activation, ModelConfig, ModelDims, ModelKind, ModelParams, Tensor,
};
pub use phrase::{filter_by_vocabulary, split_dataset, PhraseDataset, PhraseRecord, SplitLabel, SplitRatio};
pub use synthetic::{generate_synthetic, SyntheticConfig};
pub use train::{train, Adagrad, DropoutSite, EpochRecord, TrainConfig, TrainOutcome};
