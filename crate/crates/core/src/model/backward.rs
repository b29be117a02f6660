//! Analytic gradients of the mean cosine-distance loss.

use super::dropout::DropoutMask;
use super::forward::{CompositionInput, Forward};
use super::lexical::LexicalRow;
use super::{ModelKind, ModelParams, Tensor};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, matvec_transposed, rank_one_update};
use crate::loss::cosine_distance_with_grad;

/// One training example: constituents plus the target phrase vector.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub input: CompositionInput<'a>,
    pub target: &'a [f64],
}

/// Gradient arrays, laid out exactly like the model's parameters.
///
/// Parameter-free models yield an empty container.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub tensors: Vec<Tensor>,
}

impl ParamGrads {
    pub fn zeros_like(params: &ModelParams) -> Self {
        ParamGrads { tensors: params.zeros_like() }
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, name: &str) -> &[f64] {
        &self.tensors.iter().find(|t| t.name == name).expect("gradient array").data
    }

    fn get_mut(&mut self, name: &str) -> &mut [f64] {
        &mut self.tensors.iter_mut().find(|t| t.name == name).expect("gradient array").data
    }

    /// Largest absolute component over all arrays.
    pub fn max_abs(&self) -> f64 {
        self.tensors.iter().flat_map(|t| &t.data).fold(0.0, |m, g| m.max(g.abs()))
    }
}

/// Mean cosine distance over `batch` and its gradient for every parameter.
///
/// `masks`, when given, holds one mask per example for the transformed
/// representations of TransWeight models.
pub fn loss_and_gradients(
    params: &ModelParams,
    batch: &[Example<'_>],
    masks: Option<&[DropoutMask]>,
) -> Result<(f64, ParamGrads)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if let Some(masks) = masks {
        if masks.len() != batch.len() {
            return Err(Error::DimensionMismatch { expected: batch.len(), actual: masks.len() });
        }
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = ParamGrads::zeros_like(params);
    let mut total = 0.0;
    for (k, example) in batch.iter().enumerate() {
        let mask = masks.map(|m| &m[k]);
        let fwd = params.forward(&example.input, mask)?;
        let (loss, mut dp) = cosine_distance_with_grad(&fwd.p, example.target)?;
        total += loss;
        dp.iter_mut().for_each(|d| *d *= scale);
        params.backward(&example.input, &fwd, &dp, mask, &mut grads)?;
    }
    Ok((total * scale, grads))
}

/// Gradient of the mean cosine distance over `batch`.
pub fn gradients(params: &ModelParams, batch: &[Example<'_>], masks: Option<&[DropoutMask]>) -> Result<ParamGrads> {
    loss_and_gradients(params, batch, masks).map(|(_, g)| g)
}

/// Mean cosine distance over `batch`, without gradients.
pub fn batch_loss(params: &ModelParams, batch: &[Example<'_>], masks: Option<&[DropoutMask]>) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for (k, example) in batch.iter().enumerate() {
        let p = params.compose(&example.input, masks.map(|m| &m[k]))?;
        total += cosine_distance_with_grad(&p, example.target)?.0;
    }
    Ok(total / batch.len() as f64)
}

impl ModelParams {
    /// Accumulates `d loss / d params` into `grads`, given `dp = d loss / d p`.
    fn backward(
        &self,
        input: &CompositionInput<'_>,
        fwd: &Forward,
        dp: &[f64],
        mask: Option<&DropoutMask>,
        grads: &mut ParamGrads,
    ) -> Result<()> {
        let n = self.n();
        let (u, v) = (input.u, input.v);
        let g = self.activation();

        match self.kind() {
            ModelKind::Addition => {}
            ModelKind::SAddition => {
                grads.get_mut("alpha")[0] += dot(dp, u);
                grads.get_mut("beta")[0] += dot(dp, v);
            }
            ModelKind::VAddition => {
                for i in 0..n {
                    grads.get_mut("a")[i] += dp[i] * u[i];
                    grads.get_mut("b")[i] += dp[i] * v[i];
                }
            }
            ModelKind::Matrix | ModelKind::WMask | ModelKind::FullLex | ModelKind::BiLinear => {
                let dz: Vec<f64> = dp.iter().zip(&fwd.z).map(|(d, &z)| d * g.derivative(z)).collect();
                rank_one_update(grads.get_mut("W"), 1.0, &dz, &fwd.x);
                axpy(1.0, &dz, grads.get_mut("b"));

                match self.kind() {
                    ModelKind::WMask => {
                        let dx = matvec_transposed(self.get("W"), 2 * n, &dz);
                        let (w1, w2) = self.word_rows(input)?;
                        if let LexicalRow::Row(r) = w1 {
                            let row = &mut grads.get_mut("Wm")[r * n..(r + 1) * n];
                            (0..n).for_each(|i| row[i] += dx[i] * u[i]);
                        }
                        if let LexicalRow::Row(r) = w2 {
                            let row = &mut grads.get_mut("Wh")[r * n..(r + 1) * n];
                            (0..n).for_each(|i| row[i] += dx[n + i] * v[i]);
                        }
                    }
                    ModelKind::FullLex => {
                        let dx = matvec_transposed(self.get("W"), 2 * n, &dz);
                        let (w1, w2) = self.word_rows(input)?;
                        if let LexicalRow::Row(r) = w2 {
                            let a = &mut grads.get_mut("A")[r * n * n..(r + 1) * n * n];
                            rank_one_update(a, 1.0, &dx[..n], u);
                        }
                        if let LexicalRow::Row(r) = w1 {
                            let a = &mut grads.get_mut("A")[r * n * n..(r + 1) * n * n];
                            rank_one_update(a, 1.0, &dx[n..], v);
                        }
                    }
                    ModelKind::BiLinear => {
                        // d E[i, k, j] = dz_k u_i v_j
                        let de = grads.get_mut("E");
                        for (i, &ui) in u.iter().enumerate() {
                            for (k, &dzk) in dz.iter().enumerate() {
                                let slice = &mut de[(i * n + k) * n..(i * n + k + 1) * n];
                                axpy(dzk * ui, v, slice);
                            }
                        }
                    }
                    _ => {}
                }
            }
            kind if kind.is_transweight() => {
                let t = self.dims().t;
                let h = &fwd.h;
                let mut dh = vec![0.0; t * n];
                match kind {
                    ModelKind::TransWeightFeat => {
                        let w = self.get("w_feat");
                        for c in 0..n {
                            let column: f64 = (0..t).map(|j| h[j * n + c]).sum();
                            grads.get_mut("w_feat")[c] += dp[c] * column;
                            (0..t).for_each(|j| dh[j * n + c] = dp[c] * w[c]);
                        }
                        axpy(1.0, dp, grads.get_mut("b_feat"));
                    }
                    ModelKind::TransWeightTrans => {
                        let w = self.get("w_trans");
                        for j in 0..t {
                            grads.get_mut("w_trans")[j] += dot(dp, &h[j * n..(j + 1) * n]);
                            (0..n).for_each(|c| dh[j * n + c] = dp[c] * w[j]);
                        }
                        axpy(1.0, dp, grads.get_mut("b_trans"));
                    }
                    ModelKind::TransWeightMat => {
                        let w = self.get("W_mat");
                        let dw = grads.get_mut("W_mat");
                        for j in 0..t {
                            for c in 0..n {
                                dw[j * n + c] += dp[c] * h[j * n + c];
                                dh[j * n + c] = dp[c] * w[j * n + c];
                            }
                        }
                        axpy(1.0, dp, grads.get_mut("b_mat"));
                    }
                    ModelKind::TransWeight => {
                        rank_one_update(grads.get_mut("W"), 1.0, dp, h);
                        axpy(1.0, dp, grads.get_mut("b"));
                        dh = matvec_transposed(self.get("W"), t * n, dp);
                    }
                    _ => unreachable!(),
                }

                // Back through the mask and the activation of H.
                let mut ds: Vec<f64> = dh.iter().zip(&fwd.z).map(|(d, &s)| d * g.derivative(s)).collect();
                if let Some(mask) = mask {
                    ds.iter_mut().zip(mask.scales()).for_each(|(d, m)| *d *= m);
                }
                rank_one_update(grads.get_mut("T"), 1.0, &ds, &fwd.x);
                axpy(1.0, &ds, grads.get_mut("B"));
            }
            _ => unreachable!(),
        }
        Ok(())
    }
}
