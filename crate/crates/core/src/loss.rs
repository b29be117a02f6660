//! Cosine distance `1 - p.q / (|p| |q|)` and its gradient in `p`.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

pub fn cosine_distance_loss(p: &[f64], target: &[f64]) -> Result<f64> {
    Ok(1.0 - crate::embedding::cosine_similarity(p, target)?)
}

/// Loss and `d loss / d p`.
pub fn cosine_distance_with_grad(p: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if p.len() != target.len() {
        return Err(Error::DimensionMismatch { expected: target.len(), actual: p.len() });
    }
    let (np, nt) = (norm(p), norm(target));
    if np == 0.0 || nt == 0.0 || !np.is_finite() {
        return Err(Error::ZeroNorm(None));
    }
    let pt = dot(p, target);
    let cos = pt / (np * nt);
    // d cos / d p = target / (|p||t|) - (p.t) p / (|p|^3 |t|)
    let a = 1.0 / (np * nt);
    let b = pt / (np * np * np * nt);
    let grad = p.iter().zip(target).map(|(pi, ti)| -(a * ti - b * pi)).collect();
    Ok((1.0 - cos, grad))
}
