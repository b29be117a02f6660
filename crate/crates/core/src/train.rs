//! Adagrad training on the mean cosine distance, with dev-set model
//! selection and optional dropout on TransWeight's transformed
//! representations.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::config::parse_value;
use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::model::backward::{batch_loss, loss_and_gradients, Example, ParamGrads};
use crate::model::dropout::DropoutMask;
use crate::model::lexical::LexicalResolver;
use crate::model::{ModelKind, ModelParams, Tensor};
use crate::phrase::PhraseDataset;
use crate::prepared::{prepare, PreparedPhrase};
use crate::rng::{derive_seed, rng_from};

pub use crate::loss::cosine_distance_loss;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DropoutSite {
    None,
    /// The transformed representations `H` of the TransWeight family.
    TransformedH,
}

impl fmt::Display for DropoutSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropoutSite::None => "none",
            DropoutSite::TransformedH => "transformed_h",
        })
    }
}

impl FromStr for DropoutSite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DropoutSite::None),
            "transformed_h" | "h" => Ok(DropoutSite::TransformedH),
            _ => Err(Error::Config(format!("unknown dropout site {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Consecutive epochs without dev improvement tolerated before stopping.
    pub patience: usize,
    pub dropout_rate: f64,
    pub dropout_site: DropoutSite,
    pub seed: u64,
    pub adagrad_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            batch_size: 100,
            max_epochs: 200,
            patience: 10,
            dropout_rate: 0.0,
            dropout_site: DropoutSite::None,
            seed: 0,
            adagrad_epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub const KEYS: [&'static str; 8] = [
        "learning_rate",
        "batch_size",
        "max_epochs",
        "patience",
        "dropout_rate",
        "dropout_site",
        "seed",
        "adagrad_epsilon",
    ];

    /// Best dev-set dropout rate for each TransWeight weighting variant.
    pub fn reported_dropout(kind: ModelKind) -> Option<f64> {
        match kind {
            ModelKind::TransWeight => Some(0.8),
            ModelKind::TransWeightFeat => Some(0.4),
            ModelKind::TransWeightTrans | ModelKind::TransWeightMat => Some(0.6),
            _ => None,
        }
    }

    /// Sets one field from its textual form. Returns `false` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "max_epochs" => self.max_epochs = parse_value(key, value)?,
            "patience" => self.patience = parse_value(key, value)?,
            "dropout_rate" => self.dropout_rate = parse_value(key, value)?,
            "dropout_site" => self.dropout_site = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            "adagrad_epsilon" => self.adagrad_epsilon = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut config = TrainConfig::default();
        for (key, value) in map {
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout_rate {} outside [0, 1)", self.dropout_rate));
        }
        if self.adagrad_epsilon.is_nan() || self.adagrad_epsilon <= 0.0 {
            return fail("adagrad_epsilon must be positive".into());
        }
        Ok(())
    }
}

/// Adagrad accumulators: per-parameter sums of squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Adagrad {
    pub accumulators: Vec<Tensor>,
    pub epsilon: f64,
}

impl Adagrad {
    pub fn new(params: &ModelParams, epsilon: f64) -> Self {
        Adagrad { accumulators: params.zeros_like(), epsilon }
    }

    /// `acc += g^2; theta -= lr * g / (sqrt(acc) + eps)` for every parameter.
    pub fn update(&mut self, params: &mut ModelParams, grads: &ParamGrads, learning_rate: f64) -> Result<()> {
        if grads.tensors.len() != params.tensors().len() {
            return Err(Error::ShapeMismatch("gradient container".into()));
        }
        for ((theta, grad), acc) in params.tensors_mut().iter_mut().zip(&grads.tensors).zip(&mut self.accumulators) {
            if theta.shape != grad.shape || theta.shape != acc.shape {
                return Err(Error::ShapeMismatch(theta.name.clone()));
            }
            for ((x, &g), a) in theta.data.iter_mut().zip(&grad.data).zip(&mut acc.data) {
                if g == 0.0 {
                    continue;
                }
                *a += g * g;
                *x -= learning_rate * g / (a.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainState {
    pub optimizer: Adagrad,
    pub epoch: usize,
    pub history: Vec<EpochRecord>,
    pub best_dev_loss: f64,
    pub best_params: ModelParams,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest dev loss.
    pub best: ModelParams,
    /// Parameters after the last epoch.
    pub last: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl TrainOutcome {
    pub fn best_dev_loss(&self) -> f64 {
        self.history.iter().map(|r| r.dev_loss).fold(f64::INFINITY, f64::min)
    }
}

/// Writes the per-epoch log: `epoch<TAB>train_loss<TAB>dev_loss`, 6 decimals.
pub fn write_training_log<W: Write>(mut w: W, history: &[EpochRecord]) -> Result<()> {
    for r in history {
        writeln!(w, "{}\t{:.6}\t{:.6}", r.epoch, r.train_loss, r.dev_loss)?;
    }
    w.flush()?;
    Ok(())
}

fn mean_loss(params: &ModelParams, phrases: &[PreparedPhrase], space: &EmbeddingSpace) -> Result<f64> {
    let examples: Vec<Example<'_>> = phrases.iter().map(|p| p.example(space)).collect();
    batch_loss(params, &examples, None)
}

/// Trains `model` on `train`, keeping the snapshot with the lowest dev loss.
///
/// Minibatches are drawn from a per-epoch seeded shuffle. Dropout masks are
/// only drawn when the site is [`DropoutSite::TransformedH`] and the rate is
/// positive. When `dev` is empty the train loss is used for selection.
pub fn train(
    model: ModelParams,
    train: &PhraseDataset,
    dev: &PhraseDataset,
    space: &EmbeddingSpace,
    resolver: Option<&LexicalResolver>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::DatasetTooSmall { required: 1, actual: 0 });
    }
    let kind = model.kind();
    if config.dropout_site == DropoutSite::TransformedH && !kind.is_transweight() {
        return Err(Error::Config(format!("{kind} has no transformed representations to drop")));
    }
    let use_dropout = config.dropout_site == DropoutSite::TransformedH && config.dropout_rate > 0.0;

    let train_set = prepare(train, space, kind, resolver)?;
    let dev_set = prepare(dev, space, kind, resolver)?;

    let mut state = TrainState {
        optimizer: Adagrad::new(&model, config.adagrad_epsilon),
        epoch: 0,
        history: Vec::new(),
        best_dev_loss: f64::INFINITY,
        best_params: model.clone(),
    };
    let mut params = model;
    let (t, n) = (params.dims().t, params.n());
    let mut shuffle_rng = rng_from(derive_seed(config.seed, "train/shuffle"));
    let mut dropout_rng = rng_from(derive_seed(config.seed, "train/dropout"));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best_epoch = 0;
    let mut stale = 0;

    while state.epoch < config.max_epochs {
        state.epoch += 1;
        let epoch = state.epoch;

        if params.param_count() > 0 {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(config.batch_size) {
                let batch: Vec<Example<'_>> = chunk.iter().map(|&i| train_set[i].example(space)).collect();
                let masks = if use_dropout {
                    Some(
                        (0..batch.len())
                            .map(|_| DropoutMask::inverted(&mut dropout_rng, t, n, config.dropout_rate))
                            .collect::<Result<Vec<_>>>()?,
                    )
                } else {
                    None
                };
                let (loss, grads) = loss_and_gradients(&params, &batch, masks.as_deref())?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, loss });
                }
                state.optimizer.update(&mut params, &grads, config.learning_rate)?;
            }
        }

        let train_loss = mean_loss(&params, &train_set, space)?;
        let dev_loss = if dev_set.is_empty() { train_loss } else { mean_loss(&params, &dev_set, space)? };
        if !train_loss.is_finite() || !dev_loss.is_finite() {
            return Err(Error::Diverged { epoch, loss: train_loss });
        }
        state.history.push(EpochRecord { epoch, train_loss, dev_loss });

        if dev_loss < state.best_dev_loss {
            state.best_dev_loss = dev_loss;
            state.best_params = params.clone();
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience.max(1) {
                break;
            }
        }
        if params.param_count() == 0 {
            break;
        }
    }

    Ok(TrainOutcome { best: state.best_params, last: params, history: state.history, best_epoch })
}
