//! Forward pass for every composition model.

use super::dropout::DropoutMask;
use super::lexical::LexicalRow;
use super::{ModelKind, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{affine, concat, dot};

/// Constituent vectors and, for lexicalized models, their per-word rows.
#[derive(Debug, Clone, Copy)]
pub struct CompositionInput<'a> {
    pub u: &'a [f64],
    pub v: &'a [f64],
    pub word1: Option<LexicalRow>,
    pub word2: Option<LexicalRow>,
}

impl<'a> CompositionInput<'a> {
    pub fn new(u: &'a [f64], v: &'a [f64]) -> Self {
        CompositionInput { u, v, word1: None, word2: None }
    }

    pub fn with_words(mut self, word1: LexicalRow, word2: LexicalRow) -> Self {
        self.word1 = Some(word1);
        self.word2 = Some(word2);
        self
    }
}

/// Output of a forward pass plus the intermediates backpropagation needs.
#[derive(Debug, Clone, Default)]
pub(crate) struct Forward {
    pub p: Vec<f64>,
    /// Input of the affine stage: `[u; v]`, masked or transformed as the model requires.
    pub x: Vec<f64>,
    /// Pre-activation output (classic models) or `T[u;v] + B` (TransWeight).
    pub z: Vec<f64>,
    /// Masked transformed representations `H` (TransWeight).
    pub h: Vec<f64>,
}

impl ModelParams {
    /// Composes `u` and `v` into a phrase vector of dimension n.
    ///
    /// `mask` multiplies the transformed representations `H` of the
    /// TransWeight family entry by entry; it is ignored by other models.
    pub fn compose(&self, input: &CompositionInput<'_>, mask: Option<&DropoutMask>) -> Result<Vec<f64>> {
        Ok(self.forward(input, mask)?.p)
    }

    pub(crate) fn forward(&self, input: &CompositionInput<'_>, mask: Option<&DropoutMask>) -> Result<Forward> {
        let n = self.n();
        let (u, v) = (input.u, input.v);
        for x in [u, v] {
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
            }
        }
        let g = self.activation();

        let out = match self.kind() {
            ModelKind::Addition => Forward { p: u.iter().zip(v).map(|(a, b)| a + b).collect(), ..Forward::default() },
            ModelKind::SAddition => {
                let (alpha, beta) = (self.get("alpha")[0], self.get("beta")[0]);
                Forward { p: u.iter().zip(v).map(|(a, b)| alpha * a + beta * b).collect(), ..Forward::default() }
            }
            ModelKind::VAddition => {
                let (a, b) = (self.get("a"), self.get("b"));
                let p = (0..n).map(|i| a[i] * u[i] + b[i] * v[i]).collect();
                Forward { p, ..Forward::default() }
            }
            ModelKind::Matrix => self.affine_output(concat(u, v)),
            ModelKind::WMask => {
                let (w1, w2) = self.word_rows(input)?;
                let mut x = concat(u, v);
                if let LexicalRow::Row(r) = w1 {
                    let mask = &self.get("Wm")[r * n..(r + 1) * n];
                    x[..n].iter_mut().zip(mask).for_each(|(xi, m)| *xi *= m);
                }
                if let LexicalRow::Row(r) = w2 {
                    let mask = &self.get("Wh")[r * n..(r + 1) * n];
                    x[n..].iter_mut().zip(mask).for_each(|(xi, m)| *xi *= m);
                }
                self.affine_output(x)
            }
            ModelKind::FullLex => {
                let (w1, w2) = self.word_rows(input)?;
                // Crosswise: the second word's matrix transforms u and vice versa.
                let mut x = self.lexical_transform(w2, u);
                x.extend(self.lexical_transform(w1, v));
                self.affine_output(x)
            }
            ModelKind::BiLinear => {
                let x = concat(u, v);
                let mut z = affine(self.get("W"), 2 * n, &x, self.get("b"));
                let e = self.get("E");
                // E is n x d x n with d = n; component k is u^T E[:, k, :] v.
                let mut bilinear = vec![0.0; n];
                for (i, &ui) in u.iter().enumerate() {
                    for (k, out) in bilinear.iter_mut().enumerate() {
                        let slice = &e[(i * n + k) * n..(i * n + k + 1) * n];
                        *out += ui * dot(slice, v);
                    }
                }
                z.iter_mut().zip(&bilinear).for_each(|(zk, bk)| *zk += bk);
                Forward { p: z.iter().map(|&zk| g.apply(zk)).collect(), x, z, h: Vec::new() }
            }
            kind if kind.is_transweight() => self.transweight_forward(concat(u, v), mask)?,
            _ => unreachable!(),
        };
        Ok(out)
    }

    fn affine_output(&self, x: Vec<f64>) -> Forward {
        let n = self.n();
        let z = affine(self.get("W"), 2 * n, &x, self.get("b"));
        let g = self.activation();
        Forward { p: z.iter().map(|&zk| g.apply(zk)).collect(), x, z, h: Vec::new() }
    }

    pub(crate) fn word_rows(&self, input: &CompositionInput<'_>) -> Result<(LexicalRow, LexicalRow)> {
        let (Some(w1), Some(w2)) = (input.word1, input.word2) else {
            return Err(Error::MissingWordIds);
        };
        let vocab_size = self.dims().vocab_size;
        for w in [w1, w2] {
            if let LexicalRow::Row(row) = w {
                if row >= vocab_size {
                    return Err(Error::LexicalRowOutOfRange { row, vocab_size });
                }
            }
        }
        Ok((w1, w2))
    }

    fn lexical_transform(&self, row: LexicalRow, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        match row {
            LexicalRow::Identity => x.to_vec(),
            LexicalRow::Row(r) => {
                let a = &self.get("A")[r * n * n..(r + 1) * n * n];
                a.chunks_exact(n).map(|row| dot(row, x)).collect()
            }
        }
    }

    fn transweight_forward(&self, x: Vec<f64>, mask: Option<&DropoutMask>) -> Result<Forward> {
        let n = self.n();
        let t = self.dims().t;
        if let Some(mask) = mask {
            if mask.shape() != (t, n) {
                return Err(Error::DimensionMismatch { expected: t * n, actual: mask.scales().len() });
            }
        }
        let g = self.activation();

        // Row j of H is g(T_j [u;v] + B_j); T is stored as a (t*n) x 2n matrix.
        let z = affine(self.get("T"), 2 * n, &x, self.get("B"));
        let mut h: Vec<f64> = z.iter().map(|&s| g.apply(s)).collect();
        if let Some(mask) = mask {
            h.iter_mut().zip(mask.scales()).for_each(|(hk, m)| *hk *= m);
        }

        let p = match self.kind() {
            ModelKind::TransWeightFeat => {
                let (w, b) = (self.get("w_feat"), self.get("b_feat"));
                (0..n).map(|c| w[c] * (0..t).map(|j| h[j * n + c]).sum::<f64>() + b[c]).collect()
            }
            ModelKind::TransWeightTrans => {
                let (w, b) = (self.get("w_trans"), self.get("b_trans"));
                (0..n).map(|c| (0..t).map(|j| h[j * n + c] * w[j]).sum::<f64>() + b[c]).collect()
            }
            ModelKind::TransWeightMat => {
                let (w, b) = (self.get("W_mat"), self.get("b_mat"));
                (0..n).map(|c| (0..t).map(|j| w[j * n + c] * h[j * n + c]).sum::<f64>() + b[c]).collect()
            }
            // Double contraction p_c = sum_j sum_i W[c, j, i] H[j, i] + b_c,
            // i.e. W viewed as an n x (t*n) matrix applied to flattened H.
            ModelKind::TransWeight => affine(self.get("W"), t * n, &h, self.get("b")),
            _ => unreachable!(),
        };
        Ok(Forward { p, x, z, h })
    }
}
