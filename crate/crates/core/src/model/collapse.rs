//! Without the non-linearity, a TransWeight model is a single affine map of
//! `[u; v]`: folding the weighting into the transformations gives
//! `W'[c, k] = sum_j sum_i W[c, j, i] T[j, i, k]` and
//! `b'_c = sum_j sum_i W[c, j, i] B[j, i] + b_c`.

use super::{Activation, ModelDims, ModelKind, ModelParams, Tensor};
use crate::error::{Error, Result};

/// Matrix-model parameters equivalent to an identity-activation TransWeight.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedMatrix {
    pub n: usize,
    /// Row-major n x 2n.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl CollapsedMatrix {
    pub fn into_matrix_model(self) -> Result<ModelParams> {
        let n = self.n;
        ModelParams::from_tensors(
            ModelKind::Matrix,
            ModelDims { n, t: 0, vocab_size: 0 },
            Activation::Identity,
            vec![
                Tensor { name: "W".into(), shape: vec![n, 2 * n], data: self.weights },
                Tensor { name: "b".into(), shape: vec![n], data: self.bias },
            ],
        )
    }
}

/// The global weighting tensor `W[c, j, i]` (n x t x n) a TransWeight-family
/// model applies to `H`. The local weightings are the special cases that
/// are zero off the diagonal `c = i`.
pub fn global_weighting(params: &ModelParams) -> Result<Vec<f64>> {
    let n = params.n();
    let t = params.dims().t;
    let index = |c: usize, j: usize, i: usize| (c * t + j) * n + i;
    let mut w = vec![0.0; n * t * n];
    match params.kind() {
        ModelKind::TransWeight => w.copy_from_slice(params.get("W")),
        ModelKind::TransWeightFeat => {
            let feat = params.get("w_feat");
            for c in 0..n {
                (0..t).for_each(|j| w[index(c, j, c)] = feat[c]);
            }
        }
        ModelKind::TransWeightTrans => {
            let trans = params.get("w_trans");
            for c in 0..n {
                (0..t).for_each(|j| w[index(c, j, c)] = trans[j]);
            }
        }
        ModelKind::TransWeightMat => {
            let mat = params.get("W_mat");
            for c in 0..n {
                (0..t).for_each(|j| w[index(c, j, c)] = mat[j * n + c]);
            }
        }
        other => return Err(Error::UnsupportedKind(other.name())),
    }
    Ok(w)
}

fn output_bias(params: &ModelParams) -> &[f64] {
    match params.kind() {
        ModelKind::TransWeightFeat => params.get("b_feat"),
        ModelKind::TransWeightTrans => params.get("b_trans"),
        ModelKind::TransWeightMat => params.get("b_mat"),
        _ => params.get("b"),
    }
}

/// Folds a TransWeight-family model into one `n x 2n` matrix and bias,
/// treating the activation of `H` as the identity.
pub fn collapse_transweight_linear(params: &ModelParams) -> Result<CollapsedMatrix> {
    let n = params.n();
    let t = params.dims().t;
    let w = global_weighting(params)?;
    let (tt, bb) = (params.get("T"), params.get("B"));

    let mut weights = vec![0.0; n * 2 * n];
    let mut bias = output_bias(params).to_vec();
    for c in 0..n {
        // Component-specific transformation T^c = W[c, *, *] (.) T, summed over j and i.
        let out = &mut weights[c * 2 * n..(c + 1) * 2 * n];
        for j in 0..t {
            for i in 0..n {
                let wcji = w[(c * t + j) * n + i];
                if wcji == 0.0 {
                    continue;
                }
                let row = &tt[(j * n + i) * 2 * n..(j * n + i + 1) * 2 * n];
                out.iter_mut().zip(row).for_each(|(o, r)| *o += wcji * r);
                bias[c] += wcji * bb[j * n + i];
            }
        }
    }
    Ok(CollapsedMatrix { n, weights, bias })
}
