//! Copula sampling by conditional inversion: draw u and w uniform, then
//! solve ∂C/∂u (v | u) = w for v.

use super::model::CopulaModel;
use crate::error::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample_copula(model: &CopulaModel, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen::<f64>().clamp(1e-12, 1.0 - 1e-12);
        let w: f64 = rng.gen::<f64>().clamp(1e-12, 1.0 - 1e-12);
        let v = model.conditional_inverse(w, u)?;
        out.push((u, v));
    }
    Ok(out)
}
