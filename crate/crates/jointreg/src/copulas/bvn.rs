//! Standard bivariate normal CDF.
//!
//! Uses the Drezner–Wesolowsky angle integral
//!   Φ₂(h,k;ρ) = Φ(h)Φ(k) + (1/2π) ∫₀^{asin ρ} exp(−(h²+k²−2hk sinθ)/(2cos²θ)) dθ,
//! with a single 20-node Gauss–Legendre panel for moderate |ρ| and panels
//! refined geometrically toward the endpoint when |ρ| is close to 1, where
//! the integrand develops a boundary layer.

use crate::specfun::{normal_cdf, QuadratureRule};
use std::sync::OnceLock;

fn gl20() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| QuadratureRule::gauss_legendre(20).expect("GL20"))
}

fn gl16() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| QuadratureRule::gauss_legendre(16).expect("GL16"))
}

/// P(X ≤ h, Y ≤ k) for standard normal margins with correlation |ρ| < 1.
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> f64 {
    debug_assert!(rho.abs() < 1.0, "bvn_cdf requires |rho| < 1");
    if rho == 0.0 {
        return normal_cdf(h) * normal_cdf(k);
    }
    let b = rho.asin();
    let f = |theta: f64| {
        let s = theta.sin();
        let c2 = 1.0 - s * s;
        (-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c2)).exp()
    };
    let integral = if rho.abs() <= 0.925 {
        panel(&f, 0.0, b, gl20())
    } else {
        // geometric panels toward the |ρ| → 1 boundary layer at θ = b
        let fractions = [0.0, 0.8, 0.96, 0.992, 0.9984, 0.99968, 1.0];
        let mut acc = 0.0;
        for w in fractions.windows(2) {
            acc += panel(&f, b * w[0], b * w[1], gl16());
        }
        acc
    };
    let p = normal_cdf(h) * normal_cdf(k) + integral / (2.0 * std::f64::consts::PI);
    p.clamp(0.0, 1.0)
}

fn panel(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, rule: &QuadratureRule) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}
