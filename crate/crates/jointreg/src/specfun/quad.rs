//! Quadrature rules: Gauss–Hermite, Gauss–Legendre and tanh-sinh.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadKind {
    GaussHermite,
    GaussLegendre,
    AdaptiveTanhSinh,
}

/// A set of quadrature nodes and matching weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadKind,
}

impl QuadratureRule {
    /// Gauss–Hermite rule of order `k` for the weight e^{−x²}.
    ///
    /// Golub–Welsch: nodes are eigenvalues of the Jacobi matrix, weights come
    /// from the first components of the normalized eigenvectors scaled by
    /// μ₀ = √π.
    pub fn gauss_hermite(k: usize) -> Result<Self> {
        let off = |i: usize| (i as f64 / 2.0).sqrt();
        let (nodes, weights) = golub_welsch(k, off, std::f64::consts::PI.sqrt())?;
        Ok(Self {
            nodes,
            weights,
            kind: QuadKind::GaussHermite,
        })
    }

    /// Gauss–Legendre rule of order `k` on [−1, 1].
    pub fn gauss_legendre(k: usize) -> Result<Self> {
        let off = |i: usize| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        };
        let (nodes, weights) = golub_welsch(k, off, 2.0)?;
        Ok(Self {
            nodes,
            weights,
            kind: QuadKind::GaussLegendre,
        })
    }

    /// Gauss–Legendre rule rescaled to [lo, hi].
    pub fn gauss_legendre_on(k: usize, lo: f64, hi: f64) -> Result<Self> {
        let base = Self::gauss_legendre(k)?;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Ok(Self {
            nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
            weights: base.weights.iter().map(|w| w * half).collect(),
            kind: QuadKind::GaussLegendre,
        })
    }

    /// Fixed-level tanh-sinh rule on (0, 1) with step h = 2^−level.
    pub fn tanh_sinh_level(level: u32) -> Self {
        let h = 0.5_f64.powi(level as i32);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut k = 0i64;
        while (k as f64) * h <= T_MAX {
            let t = k as f64 * h;
            let (xp, xm, w) = tanh_sinh_node(t);
            if w > 0.0 {
                if xp > 0.0 && xp < 1.0 {
                    nodes.push(xp);
                    weights.push(w * h);
                }
                if k > 0 && xm > 0.0 && xm < 1.0 {
                    nodes.push(xm);
                    weights.push(w * h);
                }
            }
            k += 1;
        }
        Self {
            nodes,
            weights,
            kind: QuadKind::AdaptiveTanhSinh,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn golub_welsch(k: usize, off_diag: impl Fn(usize) -> f64, mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::domain("quadrature order must be positive"));
    }
    let mut jac = DMatrix::zeros(k, k);
    for i in 1..k {
        let b = off_diag(i);
        jac[(i - 1, i)] = b;
        jac[(i, i - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|j| {
            let node = eig.eigenvalues[j];
            let v0 = eig.eigenvectors[(0, j)];
            (node, mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Both rules are symmetric about 0; enforce exact ± pairing to kill the
    // eigensolver's asymmetry noise.
    for i in 0..k / 2 {
        let j = k - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if k % 2 == 1 {
        pairs[k / 2].0 = 0.0;
    }
    Ok(pairs.into_iter().unzip())
}

const T_MAX: f64 = 6.5;

/// Nodes and weight of the tanh-sinh transform x(t) = ½(1 + tanh(π/2·sinh t))
/// for t ≥ 0. Returns (x(t), x(−t), w): the mirror node is computed directly
/// from the small exponential so it stays representable down to ~1e-300
/// instead of being quantized by `1 − x`.
fn tanh_sinh_node(t: f64) -> (f64, f64, f64) {
    let u = std::f64::consts::FRAC_PI_2 * t.sinh();
    let em = (-2.0 * u).exp();
    let x_plus = 1.0 / (1.0 + em);
    let x_minus = em / (1.0 + em);
    let sech = 1.0 / u.cosh();
    let w = std::f64::consts::FRAC_PI_4 * t.cosh() * sech * sech;
    (x_plus, x_minus, w)
}

/// Adaptive tanh-sinh integration of `f` over (0, 1).
///
/// Levels are doubled until two successive estimates agree within
/// `tol · max(1, |I|)`; the mixed criterion keeps the loop meaningful when
/// the integral itself is large.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let mut prev = f64::NAN;
    let mut sum_all = 0.0;
    for level in 0..=12u32 {
        let h = 0.5_f64.powi(level as i32);
        // level 0 takes every node; afterwards only the odd multiples of h
        // are new.
        let mut k: i64 = if level == 0 { 0 } else { 1 };
        let step = if level == 0 { 1 } else { 2 };
        let mut level_sum = 0.0;
        loop {
            let t = k as f64 * h;
            if t > T_MAX {
                break;
            }
            let (xp, xm, w) = tanh_sinh_node(t);
            if w > 0.0 {
                if xp > 0.0 && xp < 1.0 {
                    let v = f(xp);
                    if v.is_finite() {
                        level_sum += w * v;
                    }
                }
                if t > 0.0 && xm > 0.0 && xm < 1.0 {
                    let v = f(xm);
                    if v.is_finite() {
                        level_sum += w * v;
                    }
                }
            }
            k += step;
        }
        sum_all += level_sum;
        let estimate = sum_all * h;
        if level >= 2 {
            let diff = (estimate - prev).abs();
            if diff <= tol * estimate.abs().max(1.0) {
                return Ok(estimate);
            }
        }
        prev = estimate;
    }
    Err(Error::convergence(format!(
        "tanh-sinh integration did not reach tolerance {tol} (last estimate {prev})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::log_gamma;

    #[test]
    fn hermite_weights_sum_to_sqrt_pi() {
        for &k in &[1usize, 5, 21, 41, 64] {
            let rule = QuadratureRule::gauss_hermite(k).unwrap();
            assert_eq!(rule.nodes.len(), k);
            let s: f64 = rule.weights.iter().sum();
            assert!(
                (s - std::f64::consts::PI.sqrt()).abs() < 1e-12,
                "k={k}, sum={s}"
            );
        }
    }

    #[test]
    fn hermite_exact_for_polynomials() {
        // ∫ x^{2m} e^{−x²} dx = Γ(m + ½); order k is exact for degree ≤ 2k−1.
        for &k in &[5usize, 12, 21] {
            let rule = QuadratureRule::gauss_hermite(k).unwrap();
            for m in 0..k {
                if 2 * m + 1 > 2 * k - 1 {
                    break;
                }
                let got = rule.integrate(|x| x.powi(2 * m as i32));
                let want = log_gamma(m as f64 + 0.5).unwrap().exp();
                assert!(
                    (got - want).abs() <= 1e-10 * want.max(1.0),
                    "k={k} m={m}: {got} vs {want}"
                );
                // odd moments vanish by symmetry, up to cancellation noise
                // proportional to the absolute moment
                let odd = rule.integrate(|x| x.powi(2 * m as i32 + 1));
                let abs_moment = rule.integrate(|x| x.abs().powi(2 * m as i32 + 1));
                assert!(odd.abs() <= 1e-12 * abs_moment.max(1.0));
            }
        }
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = QuadratureRule::gauss_legendre(8).unwrap();
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-12);
        // ∫_{−1}^{1} x^{10} dx = 2/11 needs order ≥ 6
        let got = rule.integrate(|x| x.powi(10));
        assert!((got - 2.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn legendre_rescaled_interval() {
        let rule = QuadratureRule::gauss_legendre_on(16, 0.0, 2.0).unwrap();
        let got = rule.integrate(|x| x * x);
        assert!((got - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_smooth() {
        let got = tanh_sinh(|x| x * x, 1e-12).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫_0^1 x^{−1/2} dx = 2
        let got = tanh_sinh(|x| 1.0 / x.sqrt(), 1e-12).unwrap();
        assert!((got - 2.0).abs() < 1e-11, "{got}");
        // ∫_0^1 ln x dx = −1
        let got = tanh_sinh(|x| x.ln(), 1e-12).unwrap();
        assert!((got + 1.0).abs() < 1e-11, "{got}");
    }

    #[test]
    fn fixed_level_rule_matches_adaptive() {
        let rule = QuadratureRule::tanh_sinh_level(6);
        let got = rule.integrate(|x| (1.0 - x).sqrt() / x.sqrt());
        assert!((got - std::f64::consts::FRAC_PI_2).abs() < 1e-10, "{got}");
    }
}
