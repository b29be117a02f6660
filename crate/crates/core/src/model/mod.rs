//! Composition models `p = f(u, v)`: parameter layout, initialization and
//! parameter counting. The forward pass lives in [`forward`], analytic
//! gradients in [`backward`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

pub mod backward;
pub mod collapse;
pub mod dropout;
pub mod forward;
pub mod lexical;

/// Default number of transformations for the TransWeight family.
pub const DEFAULT_TRANSFORMATIONS: usize = 100;
/// Largest accepted number of transformations.
pub const MAX_TRANSFORMATIONS: usize = 1000;
/// Half-width of the uniform noise added to the identity in FullLex init.
pub const DEFAULT_IDENTITY_PERTURBATION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Addition,
    SAddition,
    VAddition,
    Matrix,
    WMask,
    FullLex,
    BiLinear,
    TransWeightFeat,
    TransWeightTrans,
    TransWeightMat,
    TransWeight,
}

impl ModelKind {
    pub const ALL: [ModelKind; 11] = [
        ModelKind::Addition,
        ModelKind::SAddition,
        ModelKind::VAddition,
        ModelKind::Matrix,
        ModelKind::WMask,
        ModelKind::FullLex,
        ModelKind::BiLinear,
        ModelKind::TransWeightFeat,
        ModelKind::TransWeightTrans,
        ModelKind::TransWeightMat,
        ModelKind::TransWeight,
    ];

    /// Command-line / checkpoint name.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Addition => "addition",
            ModelKind::SAddition => "saddition",
            ModelKind::VAddition => "vaddition",
            ModelKind::Matrix => "matrix",
            ModelKind::WMask => "wmask",
            ModelKind::FullLex => "fulllex",
            ModelKind::BiLinear => "bilinear",
            ModelKind::TransWeightFeat => "transweight-feat",
            ModelKind::TransWeightTrans => "transweight-trans",
            ModelKind::TransWeightMat => "transweight-mat",
            ModelKind::TransWeight => "transweight",
        }
    }

    /// Models with a transformation stage `H = g(T[u;v] + B)`.
    pub fn is_transweight(self) -> bool {
        matches!(
            self,
            ModelKind::TransWeightFeat
                | ModelKind::TransWeightTrans
                | ModelKind::TransWeightMat
                | ModelKind::TransWeight
        )
    }

    /// Models with per-word parameters.
    pub fn is_lexicalized(self) -> bool {
        matches!(self, ModelKind::WMask | ModelKind::FullLex)
    }

    /// The activation the model uses unless told otherwise: identity on the
    /// output of the classic models, rectifier on `H` for TransWeight.
    pub fn default_activation(self) -> Activation {
        if self.is_transweight() {
            Activation::Relu
        } else {
            Activation::Identity
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let kind = match key.as_str() {
            "addition" | "add" => ModelKind::Addition,
            "saddition" => ModelKind::SAddition,
            "vaddition" => ModelKind::VAddition,
            "matrix" => ModelKind::Matrix,
            "wmask" => ModelKind::WMask,
            "fulllex" => ModelKind::FullLex,
            "bilinear" => ModelKind::BiLinear,
            "transweight-feat" | "transweight-r" => ModelKind::TransWeightFeat,
            "transweight-trans" => ModelKind::TransWeightTrans,
            "transweight-mat" => ModelKind::TransWeightMat,
            "transweight" => ModelKind::TransWeight,
            _ => return Err(Error::Config(format!("unknown model kind {s:?}"))),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative at pre-activation `x`. The rectifier uses 0 at the kink.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - x.tanh().powi(2),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "linear" | "none" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            _ => Err(Error::Config(format!("unknown activation {s:?}"))),
        }
    }
}

/// Sizes a model is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Word vector dimensionality.
    pub n: usize,
    /// Number of transformations (TransWeight family), otherwise 0.
    pub t: usize,
    /// Rows of the per-word tables (lexicalized models), otherwise 0.
    pub vocab_size: usize,
}

/// A named, row-major parameter array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(name: &str, shape: &[usize]) -> Self {
        Tensor { name: name.to_owned(), shape: shape.to_vec(), data: vec![0.0; shape.iter().product()] }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Names and shapes of the trainable arrays of `kind`, in storage order.
pub fn layout(kind: ModelKind, dims: ModelDims) -> Vec<(&'static str, Vec<usize>)> {
    let ModelDims { n, t, vocab_size: v } = dims;
    let affine = || vec![("W", vec![n, 2 * n]), ("b", vec![n])];
    let transformations = || vec![("T", vec![t, n, 2 * n]), ("B", vec![t, n])];
    match kind {
        ModelKind::Addition => vec![],
        ModelKind::SAddition => vec![("alpha", vec![1]), ("beta", vec![1])],
        ModelKind::VAddition => vec![("a", vec![n]), ("b", vec![n])],
        ModelKind::Matrix => affine(),
        ModelKind::WMask => {
            let mut l = affine();
            l.extend([("Wm", vec![v, n]), ("Wh", vec![v, n])]);
            l
        }
        ModelKind::FullLex => {
            let mut l = affine();
            l.push(("A", vec![v, n, n]));
            l
        }
        ModelKind::BiLinear => {
            let mut l = vec![("E", vec![n, n, n])];
            l.extend(affine());
            l
        }
        ModelKind::TransWeightFeat => {
            let mut l = transformations();
            l.extend([("w_feat", vec![n]), ("b_feat", vec![n])]);
            l
        }
        ModelKind::TransWeightTrans => {
            let mut l = transformations();
            l.extend([("w_trans", vec![t]), ("b_trans", vec![n])]);
            l
        }
        ModelKind::TransWeightMat => {
            let mut l = transformations();
            l.extend([("W_mat", vec![t, n]), ("b_mat", vec![n])]);
            l
        }
        ModelKind::TransWeight => {
            let mut l = transformations();
            l.extend([("W", vec![n, t, n]), ("b", vec![n])]);
            l
        }
    }
}

fn require(kind: ModelKind, value: Option<usize>, what: &'static str) -> Result<usize> {
    match value {
        Some(v) if v >= 1 => Ok(v),
        _ => Err(Error::MissingArgument { kind: kind.name(), what }),
    }
}

fn resolve_dims(kind: ModelKind, n: usize, t: Option<usize>, vocab_size: Option<usize>) -> Result<ModelDims> {
    if n == 0 {
        return Err(Error::Config("dimension n must be at least 1".into()));
    }
    let t = if kind.is_transweight() {
        let t = require(kind, t, "a transformation count t")?;
        if t > MAX_TRANSFORMATIONS {
            return Err(Error::Config(format!("t = {t} exceeds {MAX_TRANSFORMATIONS}")));
        }
        t
    } else {
        0
    };
    let vocab_size = if kind.is_lexicalized() { require(kind, vocab_size, "a vocabulary size")? } else { 0 };
    Ok(ModelDims { n, t, vocab_size })
}

/// Exact number of trainable parameters.
pub fn param_count(kind: ModelKind, n: usize, t: Option<usize>, vocab_size: Option<usize>) -> Result<u64> {
    let dims = resolve_dims(kind, n, t, vocab_size)?;
    Ok(layout(kind, dims).iter().map(|(_, shape)| shape.iter().map(|&d| d as u64).product::<u64>()).sum())
}

/// Parameters of the weighting stage alone (TransWeight family).
pub fn weighting_param_count(kind: ModelKind, n: usize, t: usize) -> Result<u64> {
    if !kind.is_transweight() {
        return Err(Error::UnsupportedKind(kind.name()));
    }
    let dims = resolve_dims(kind, n, Some(t), None)?;
    Ok(layout(kind, dims)
        .iter()
        .filter(|(name, _)| !matches!(*name, "T" | "B"))
        .map(|(_, shape)| shape.iter().map(|&d| d as u64).product::<u64>())
        .sum())
}

/// What to build: kind, sizes and construction options.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n: usize,
    pub t: Option<usize>,
    pub vocab_size: Option<usize>,
    /// Overrides [`ModelKind::default_activation`].
    pub activation: Option<Activation>,
    /// Half-width of the uniform noise on FullLex's identity matrices.
    pub identity_perturbation: f64,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, n: usize) -> Self {
        ModelConfig {
            kind,
            n,
            t: kind.is_transweight().then_some(DEFAULT_TRANSFORMATIONS),
            vocab_size: None,
            activation: None,
            identity_perturbation: DEFAULT_IDENTITY_PERTURBATION,
        }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_vocab_size(mut self, vocab_size: usize) -> Self {
        self.vocab_size = Some(vocab_size);
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = Some(activation);
        self
    }

    pub fn with_identity_perturbation(mut self, scale: f64) -> Self {
        self.identity_perturbation = scale;
        self
    }
}

/// The trainable state of one composition model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    kind: ModelKind,
    dims: ModelDims,
    activation: Activation,
    tensors: Vec<Tensor>,
}

impl ModelParams {
    /// Assembles parameters from arrays, checking them against the layout.
    pub fn from_tensors(
        kind: ModelKind,
        dims: ModelDims,
        activation: Activation,
        tensors: Vec<Tensor>,
    ) -> Result<Self> {
        let dims = resolve_dims(
            kind,
            dims.n,
            kind.is_transweight().then_some(dims.t),
            kind.is_lexicalized().then_some(dims.vocab_size),
        )?;
        let expected = layout(kind, dims);
        if expected.len() != tensors.len() {
            return Err(Error::ShapeMismatch(format!(
                "{kind} expects {} arrays, got {}",
                expected.len(),
                tensors.len()
            )));
        }
        for ((name, shape), tensor) in expected.iter().zip(&tensors) {
            if tensor.name != *name || tensor.shape != *shape || tensor.data.len() != shape.iter().product::<usize>() {
                return Err(Error::ShapeMismatch(tensor.name.clone()));
            }
            if tensor.data.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(tensor.name.clone()));
            }
        }
        Ok(ModelParams { kind, dims, activation, tensors })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.n
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn set_activation(&mut self, activation: Activation) {
        self.activation = activation;
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn param_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Data of the array called `name`.
    ///
    /// # Panics
    /// If the model has no such array.
    pub fn get(&self, name: &str) -> &[f64] {
        &self
            .tensors
            .iter()
            .find(|t| t.name == name)
            .unwrap_or_else(|| panic!("{} has no parameter {name}", self.kind))
            .data
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        self.tensors.iter_mut().find(|t| t.name == name).map(|t| t.data.as_mut_slice())
    }

    /// Zero-filled arrays with this model's layout.
    pub fn zeros_like(&self) -> Vec<Tensor> {
        self.tensors.iter().map(|t| Tensor::zeros(&t.name, &t.shape)).collect()
    }
}

/// Builds freshly initialized parameters, deterministically per `seed`.
///
/// Dense weights are uniform in `[-r, r]` with `r = sqrt(6 / (fan_in +
/// fan_out))`, biases are zero, WMask masks start at one, FullLex matrices at
/// the identity plus uniform noise, SAddition/VAddition weights at one.
pub fn init_model(config: &ModelConfig, seed: u64) -> Result<ModelParams> {
    let kind = config.kind;
    let dims = resolve_dims(kind, config.n, config.t, config.vocab_size)?;
    let ModelDims { n, t, .. } = dims;
    let mut rng = rng_from(derive_seed(seed, "model/init"));

    let mut tensors = Vec::new();
    for (name, shape) in layout(kind, dims) {
        let mut tensor = Tensor::zeros(name, &shape);
        match (kind, name) {
            (_, "b" | "B" | "b_feat" | "b_trans" | "b_mat") => {}
            (ModelKind::SAddition, _) | (ModelKind::VAddition, _) => tensor.data.fill(1.0),
            (ModelKind::WMask, "Wm" | "Wh") => tensor.data.fill(1.0),
            (ModelKind::FullLex, "A") => {
                let eps = config.identity_perturbation;
                for (k, x) in tensor.data.iter_mut().enumerate() {
                    let (row, col) = ((k / n) % n, k % n);
                    let noise = if eps > 0.0 { rng.random_range(-eps..=eps) } else { 0.0 };
                    *x = if row == col { 1.0 } else { 0.0 } + noise;
                }
            }
            (_, "W") if kind == ModelKind::TransWeight => glorot(&mut rng, &mut tensor.data, t * n, n),
            (_, "W") => glorot(&mut rng, &mut tensor.data, 2 * n, n),
            (_, "T") => glorot(&mut rng, &mut tensor.data, 2 * n, n),
            (_, "E") => glorot(&mut rng, &mut tensor.data, n * n, n),
            (_, "w_feat" | "w_trans" | "W_mat") => glorot(&mut rng, &mut tensor.data, t, 1),
            (_, other) => unreachable!("no initializer for {other}"),
        }
        tensors.push(tensor);
    }

    let activation = config.activation.unwrap_or(kind.default_activation());
    ModelParams::from_tensors(kind, dims, activation, tensors)
}

fn glorot(rng: &mut impl Rng, data: &mut [f64], fan_in: usize, fan_out: usize) {
    let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for x in data {
        *x = rng.random_range(-r..=r);
    }
}
