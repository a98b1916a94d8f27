//! CDF, log-density and conditional distribution for every copula family,
//! including the quarter-turn rotations.

use super::bvn::bvn_cdf;
use super::bvt::{bvt_cdf, t_cdf, t_quantile};
use super::model::{CopulaFamily, CopulaModel, Rotation};
use crate::error::{Error, Result};
use crate::specfun::{normal_cdf, normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopulaStat {
    Cdf,
    LogDensity,
}

pub fn copula_eval(c: &CopulaModel, u: f64, v: f64, what: CopulaStat) -> Result<f64> {
    match what {
        CopulaStat::Cdf => c.cdf(u, v),
        CopulaStat::LogDensity => c.log_density(u, v),
    }
}

fn check_interior(u: f64, v: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(Error::domain(format!(
            "copula arguments must lie strictly inside (0,1), got ({u}, {v})"
        )));
    }
    Ok(())
}

impl CopulaModel {
    /// C(u, v), rotation applied.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        check_interior(u, v)?;
        let c = match self.rotation {
            Rotation::None => base_cdf(self, u, v)?,
            Rotation::Deg90 => v - base_cdf(self, 1.0 - u, v)?,
            Rotation::Deg180 => u + v - 1.0 + base_cdf(self, 1.0 - u, 1.0 - v)?,
            Rotation::Deg270 => u - base_cdf(self, u, 1.0 - v)?,
        };
        Ok(c.clamp(0.0, 1.0))
    }

    /// log c(u, v), rotation applied.
    pub fn log_density(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        check_interior(u, v)?;
        match self.rotation {
            Rotation::None => base_log_density(self, u, v),
            Rotation::Deg90 => base_log_density(self, 1.0 - u, v),
            Rotation::Deg180 => base_log_density(self, 1.0 - u, 1.0 - v),
            Rotation::Deg270 => base_log_density(self, u, 1.0 - v),
        }
    }

    /// Conditional distribution h(v | u) = ∂C(u, v)/∂u, rotation applied.
    pub fn conditional(&self, v: f64, u: f64) -> Result<f64> {
        self.validate()?;
        check_interior(u, v)?;
        let h = match self.rotation {
            Rotation::None => base_conditional(self, v, u)?,
            Rotation::Deg90 => base_conditional(self, v, 1.0 - u)?,
            Rotation::Deg180 => 1.0 - base_conditional(self, 1.0 - v, 1.0 - u)?,
            Rotation::Deg270 => 1.0 - base_conditional(self, 1.0 - v, u)?,
        };
        Ok(h.clamp(0.0, 1.0))
    }

    /// Solve h(v | u) = w for v; closed-form where the family allows it,
    /// otherwise safeguarded Newton (tolerance 1e-12, at most 200 steps).
    pub fn conditional_inverse(&self, w: f64, u: f64) -> Result<f64> {
        self.validate()?;
        check_interior(u, w)?;
        match self.rotation {
            Rotation::None => base_conditional_inverse(self, w, u),
            Rotation::Deg90 => base_conditional_inverse(self, w, 1.0 - u),
            Rotation::Deg180 => Ok(1.0 - base_conditional_inverse(self, 1.0 - w, 1.0 - u)?),
            Rotation::Deg270 => Ok(1.0 - base_conditional_inverse(self, 1.0 - w, u)?),
        }
    }
}

// ---------------------------------------------------------------------------
// unrotated families
// ---------------------------------------------------------------------------

fn base_cdf(m: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    let th = m.theta;
    Ok(match m.family {
        CopulaFamily::Clayton => (-clayton_log_t(th, u, v) / th).exp(),
        CopulaFamily::Gaussian => bvn_cdf(normal_quantile(u)?, normal_quantile(v)?, th),
        CopulaFamily::Frank => {
            let em_t = (-th).exp_m1();
            let em_u = (-th * u).exp_m1();
            let em_v = (-th * v).exp_m1();
            -(em_u * em_v / em_t).ln_1p() / th
        }
        CopulaFamily::Gumbel | CopulaFamily::Hougaard => {
            let ln_s = gumbel_log_s(th, u, v);
            (-(ln_s / th).exp()).exp()
        }
        CopulaFamily::Joe => {
            let s = joe_s(th, u, v);
            1.0 - (s.ln() / th).exp()
        }
        CopulaFamily::Amh => u * v / (1.0 - th * (1.0 - u) * (1.0 - v)),
        CopulaFamily::Fgm => u * v * (1.0 + th * (1.0 - u) * (1.0 - v)),
        CopulaFamily::Plackett => {
            if (th - 1.0).abs() < 1e-7 {
                // series around the independence point: the closed form
                // divides by θ − 1 and cancels catastrophically here
                u * v + (th - 1.0) * u * v * (1.0 - u) * (1.0 - v)
            } else {
                let s = 1.0 + (th - 1.0) * (u + v);
                let disc = s * s - 4.0 * u * v * th * (th - 1.0);
                (s - disc.sqrt()) / (2.0 * (th - 1.0))
            }
        }
        CopulaFamily::StudentT => {
            let df = m.df.expect("validated");
            bvt_cdf(t_quantile(u, df)?, t_quantile(v, df)?, th, df)?
        }
    })
}

fn base_log_density(m: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    let th = m.theta;
    Ok(match m.family {
        CopulaFamily::Clayton => {
            let ln_t = clayton_log_t(th, u, v);
            (1.0 + th).ln() - (th + 1.0) * (u.ln() + v.ln()) - (2.0 + 1.0 / th) * ln_t
        }
        CopulaFamily::Gaussian => {
            let x = normal_quantile(u)?;
            let y = normal_quantile(v)?;
            let r2 = 1.0 - th * th;
            -0.5 * r2.ln() - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * r2)
        }
        CopulaFamily::Frank => {
            let em_t = (-th).exp_m1();
            let em_u = (-th * u).exp_m1();
            let em_v = (-th * v).exp_m1();
            let d = -em_t - em_u * em_v;
            (th * -em_t).ln() - th * (u + v) - 2.0 * d.abs().ln()
        }
        CopulaFamily::Gumbel | CopulaFamily::Hougaard => {
            let lx = (-u.ln()).ln();
            let ly = (-v.ln()).ln();
            let ln_s = gumbel_log_s(th, u, v);
            let a = (ln_s / th).exp();
            -a + (th - 1.0) * (lx + ly) + (2.0 / th - 2.0) * ln_s - (u.ln() + v.ln())
                + (1.0 + (th - 1.0) / a).ln()
        }
        CopulaFamily::Joe => {
            let om_x = -(th * (1.0 - u).ln()).exp_m1(); // 1 − (1−u)^θ
            let om_y = -(th * (1.0 - v).ln()).exp_m1();
            let s = joe_s(th, u, v);
            (th - 1.0) * ((1.0 - u).ln() + (1.0 - v).ln()) + (1.0 / th - 2.0) * s.ln()
                + ((th - 1.0) * om_x * om_y + th * s).ln()
        }
        CopulaFamily::Amh => {
            let d = 1.0 - th * (1.0 - u) * (1.0 - v);
            let n = v * (d - u * th * (1.0 - v));
            let n_v = d + v * th * (1.0 - u) - u * th * (1.0 - 2.0 * v);
            let c = (n_v * d - 2.0 * n * th * (1.0 - u)) / (d * d * d);
            c.max(1e-300).ln()
        }
        CopulaFamily::Fgm => (1.0 + th * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)).max(1e-300).ln(),
        CopulaFamily::Plackett => {
            let s = 1.0 + (th - 1.0) * (u + v);
            let disc = s * s - 4.0 * u * v * th * (th - 1.0);
            th.ln() + (1.0 + (th - 1.0) * (u + v - 2.0 * u * v)).ln() - 1.5 * disc.ln()
        }
        CopulaFamily::StudentT => {
            let df = m.df.expect("validated");
            let x = t_quantile(u, df)?;
            let y = t_quantile(v, df)?;
            let r2 = 1.0 - th * th;
            let quad = (x * x - 2.0 * th * x * y + y * y) / (df * r2);
            crate::specfun::log_gamma(0.5 * (df + 2.0))? + crate::specfun::log_gamma(0.5 * df)?
                - 2.0 * crate::specfun::log_gamma(0.5 * (df + 1.0))?
                - 0.5 * r2.ln()
                - 0.5 * (df + 2.0) * (1.0 + quad).ln()
                + 0.5 * (df + 1.0) * ((1.0 + x * x / df).ln() + (1.0 + y * y / df).ln())
        }
    })
}

fn base_conditional(m: &CopulaModel, v: f64, u: f64) -> Result<f64> {
    let th = m.theta;
    Ok(match m.family {
        CopulaFamily::Clayton => {
            let ln_t = clayton_log_t(th, u, v);
            (-(th + 1.0) * u.ln() - (1.0 / th + 1.0) * ln_t).exp()
        }
        CopulaFamily::Gaussian => {
            let x = normal_quantile(u)?;
            let y = normal_quantile(v)?;
            normal_cdf((y - th * x) / (1.0 - th * th).sqrt())
        }
        CopulaFamily::Frank => {
            let em_t = (-th).exp_m1();
            let em_u = (-th * u).exp_m1();
            let em_v = (-th * v).exp_m1();
            let e_u = (-th * u).exp();
            e_u * em_v / (em_t + em_u * em_v)
        }
        CopulaFamily::Gumbel | CopulaFamily::Hougaard => {
            let lx = (-u.ln()).ln();
            let ln_s = gumbel_log_s(th, u, v);
            let a = (ln_s / th).exp();
            (-a + (1.0 / th - 1.0) * ln_s + (th - 1.0) * lx - u.ln()).exp()
        }
        CopulaFamily::Joe => {
            let om_y = -(th * (1.0 - v).ln()).exp_m1();
            let s = joe_s(th, u, v);
            ((1.0 / th - 1.0) * s.ln() + (th - 1.0) * (1.0 - u).ln() + om_y.ln()).exp()
        }
        CopulaFamily::Amh => {
            let d = 1.0 - th * (1.0 - u) * (1.0 - v);
            v * (d - u * th * (1.0 - v)) / (d * d)
        }
        CopulaFamily::Fgm => v + th * (1.0 - 2.0 * u) * v * (1.0 - v),
        CopulaFamily::Plackett => {
            let s = 1.0 + (th - 1.0) * (u + v);
            let disc = s * s - 4.0 * u * v * th * (th - 1.0);
            0.5 * (1.0 - (s - 2.0 * th * v) / disc.sqrt())
        }
        CopulaFamily::StudentT => {
            let df = m.df.expect("validated");
            let x = t_quantile(u, df)?;
            let y = t_quantile(v, df)?;
            let scale = ((df + 1.0) / (df + x * x)).sqrt();
            t_cdf((y - th * x) / (1.0 - th * th).sqrt() * scale, df + 1.0)
        }
    })
}

fn base_conditional_inverse(m: &CopulaModel, w: f64, u: f64) -> Result<f64> {
    let th = m.theta;
    match m.family {
        CopulaFamily::Clayton => {
            // v = [(w^{−θ/(1+θ)} − 1) u^{−θ} + 1]^{−1/θ}, assembled in logs
            let b = (-th / (1.0 + th) * w.ln()).exp();
            let la = -th * u.ln();
            let ln_q = la + ((b - 1.0) + (-la).exp()).ln();
            Ok(clamp_unit((-ln_q / th).exp()))
        }
        CopulaFamily::Gaussian => {
            let x = normal_quantile(u)?;
            let z = normal_quantile(w)?;
            Ok(clamp_unit(normal_cdf(th * x + (1.0 - th * th).sqrt() * z)))
        }
        CopulaFamily::Frank => {
            let em_t = (-th).exp_m1();
            let em_u = (-th * u).exp_m1();
            let e_u = (-th * u).exp();
            let g = w * em_t / (e_u - w * em_u);
            Ok(clamp_unit(-g.ln_1p() / th))
        }
        CopulaFamily::Fgm => {
            let a = th * (1.0 - 2.0 * u);
            let one_a = 1.0 + a;
            // stable quadratic root of a v² − (1+a) v + w = 0 in (0,1)
            let disc = (one_a * one_a - 4.0 * a * w).max(0.0).sqrt();
            Ok(clamp_unit(2.0 * w / (one_a + disc)))
        }
        CopulaFamily::StudentT => {
            let df = m.df.expect("validated");
            let x = t_quantile(u, df)?;
            let z = t_quantile(w, df + 1.0)?;
            let scale = ((df + x * x) / (df + 1.0)).sqrt();
            let y = th * x + (1.0 - th * th).sqrt() * scale * z;
            Ok(clamp_unit(t_cdf(y, df)))
        }
        CopulaFamily::Gumbel
        | CopulaFamily::Hougaard
        | CopulaFamily::Joe
        | CopulaFamily::Amh
        | CopulaFamily::Plackett => invert_monotone(
            |v| base_conditional(m, v, u),
            |v| base_log_density(m, u, v),
            w,
        ),
    }
}

/// Safeguarded Newton for h(v) = w with h increasing on (0, 1) and
/// h'(v) = c(u, v) supplied in log form.
fn invert_monotone(
    h: impl Fn(f64) -> Result<f64>,
    log_c: impl Fn(f64) -> Result<f64>,
    w: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (1e-15, 1.0 - 1e-15);
    let mut v = w;
    for _ in 0..200 {
        let hv = h(v)?;
        let err = hv - w;
        if err.abs() <= 1e-12 {
            return Ok(v);
        }
        if err > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let slope = log_c(v)?.exp();
        let mut next = v - err / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() < 1e-16 {
            return Ok(next);
        }
        v = next;
    }
    // Interval collapse counts as success when the bracket pins v down even
    // though h is too flat to hit the residual tolerance.
    if hi - lo < 1e-13 {
        return Ok(0.5 * (lo + hi));
    }
    Err(Error::convergence(format!(
        "conditional inverse did not converge (w={w}, bracket [{lo}, {hi}])"
    )))
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(1e-15, 1.0 - 1e-15)
}

/// ln(u^{−θ} + v^{−θ} − 1), overflow-safe for large θ.
fn clayton_log_t(th: f64, u: f64, v: f64) -> f64 {
    let la = -th * u.ln();
    let lb = -th * v.ln();
    let m = la.max(lb);
    let mut inner = (la - m).exp() + (lb - m).exp();
    if m < 700.0 {
        inner -= (-m).exp();
    }
    m + inner.ln()
}

/// ln((−ln u)^θ + (−ln v)^θ) via log-sum-exp.
fn gumbel_log_s(th: f64, u: f64, v: f64) -> f64 {
    let lx = th * (-u.ln()).ln();
    let ly = th * (-v.ln()).ln();
    let m = lx.max(ly);
    m + ((lx - m).exp() + (ly - m).exp()).ln()
}

/// S = x + y − xy = 1 − (1−x)(1−y) with x = (1−u)^θ, computed from the
/// complements for accuracy when x, y ≈ 1.
fn joe_s(th: f64, u: f64, v: f64) -> f64 {
    let om_x = -(th * (1.0 - u).ln()).exp_m1();
    let om_y = -(th * (1.0 - v).ln()).exp_m1();
    1.0 - om_x * om_y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copulas::model::ALL_FAMILIES;

    fn test_models() -> Vec<CopulaModel> {
        ALL_FAMILIES
            .iter()
            .map(|&f| match f {
                CopulaFamily::Clayton => CopulaModel::new(f, 2.0).unwrap(),
                CopulaFamily::Gaussian => CopulaModel::new(f, 0.6).unwrap(),
                CopulaFamily::Frank => CopulaModel::new(f, 4.0).unwrap(),
                CopulaFamily::Gumbel => CopulaModel::new(f, 1.8).unwrap(),
                CopulaFamily::Joe => CopulaModel::new(f, 2.2).unwrap(),
                CopulaFamily::Amh => CopulaModel::new(f, 0.7).unwrap(),
                CopulaFamily::Fgm => CopulaModel::new(f, 0.5).unwrap(),
                CopulaFamily::Plackett => CopulaModel::new(f, 5.0).unwrap(),
                CopulaFamily::Hougaard => CopulaModel::new(f, 1.4).unwrap(),
                CopulaFamily::StudentT => CopulaModel::new_student_t(0.6, 5.0).unwrap(),
            })
            .collect()
    }

    #[test]
    fn fgm_zero_theta_is_independence() {
        let c = CopulaModel {
            family: CopulaFamily::Fgm,
            theta: 0.0,
            df: None,
            rotation: Rotation::None,
        };
        for &(u, v) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
            assert!((c.cdf(u, v).unwrap() - u * v).abs() < 1e-14);
            assert!(c.log_density(u, v).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_margins_at_the_edge() {
        for m in test_models() {
            let c = m.cdf(0.37, 1.0 - 1e-9).unwrap();
            assert!(
                (c - 0.37).abs() < 1e-6,
                "{}: C(0.37, 1−) = {c}",
                m.family.name()
            );
            let c = m.cdf(1.0 - 1e-9, 0.61).unwrap();
            assert!((c - 0.61).abs() < 1e-6, "{}", m.family.name());
        }
    }

    #[test]
    fn frechet_bounds_hold() {
        for m in test_models() {
            for &u in &[0.05, 0.3, 0.65, 0.95] {
                for &v in &[0.1, 0.5, 0.9] {
                    let c = m.cdf(u, v).unwrap();
                    let lower = (u + v - 1.0).max(0.0);
                    let upper = u.min(v);
                    assert!(
                        c >= lower - 1e-9 && c <= upper + 1e-9,
                        "{}: C({u},{v}) = {c} outside [{lower}, {upper}]",
                        m.family.name()
                    );
                }
            }
        }
    }

    #[test]
    fn log_density_matches_cdf_second_difference() {
        // c(u,v) ≈ ΔΔC/(h²) by central second differences
        let h = 1e-4;
        for m in test_models() {
            for &(u, v) in &[(0.3, 0.4), (0.6, 0.2), (0.75, 0.8)] {
                let c_pp = m.cdf(u + h, v + h).unwrap();
                let c_pm = m.cdf(u + h, v - h).unwrap();
                let c_mp = m.cdf(u - h, v + h).unwrap();
                let c_mm = m.cdf(u - h, v - h).unwrap();
                let fd = (c_pp - c_pm - c_mp + c_mm) / (4.0 * h * h);
                let want = m.log_density(u, v).unwrap().exp();
                let tol = if m.family == CopulaFamily::StudentT {
                    2e-4 // bvt cdf carries quadrature noise of its own
                } else {
                    1e-5
                };
                assert!(
                    (fd - want).abs() <= tol * want.max(1.0),
                    "{}: fd={fd}, density={want}",
                    m.family.name()
                );
            }
        }
    }

    #[test]
    fn conditional_matches_cdf_difference() {
        let h = 1e-6;
        for m in test_models() {
            for &(u, v) in &[(0.3, 0.4), (0.7, 0.15), (0.5, 0.85)] {
                let fd = (m.cdf(u + h, v).unwrap() - m.cdf(u - h, v).unwrap()) / (2.0 * h);
                let got = m.conditional(v, u).unwrap();
                let tol = if m.family == CopulaFamily::StudentT { 1e-4 } else { 1e-6 };
                assert!(
                    (fd - got).abs() <= tol * got.max(1e-3),
                    "{}: fd={fd}, h={got}",
                    m.family.name()
                );
            }
        }
    }

    #[test]
    fn conditional_inverse_round_trips() {
        for m in test_models() {
            for &u in &[0.15, 0.5, 0.9] {
                for &w in &[0.05, 0.4, 0.95] {
                    let v = m.conditional_inverse(w, u).unwrap();
                    let back = m.conditional(v, u).unwrap();
                    assert!(
                        (back - w).abs() < 1e-8,
                        "{}: u={u} w={w} v={v} back={back}",
                        m.family.name()
                    );
                }
            }
        }
    }

    #[test]
    fn exchangeable_density() {
        for m in test_models() {
            for &(u, v) in &[(0.2, 0.7), (0.45, 0.1)] {
                let a = m.log_density(u, v).unwrap();
                let b = m.log_density(v, u).unwrap();
                assert!((a - b).abs() < 1e-9, "{}: {a} vs {b}", m.family.name());
            }
        }
    }

    #[test]
    fn rotations_are_consistent() {
        let base = CopulaModel::new(CopulaFamily::Clayton, 2.0).unwrap();
        for rot in [Rotation::Deg90, Rotation::Deg180, Rotation::Deg270] {
            let m = base.with_rotation(rot);
            // rotated cdf still has uniform margins and valid density
            let h = 1e-4;
            let (u, v) = (0.35, 0.6);
            let c_pp = m.cdf(u + h, v + h).unwrap();
            let c_pm = m.cdf(u + h, v - h).unwrap();
            let c_mp = m.cdf(u - h, v + h).unwrap();
            let c_mm = m.cdf(u - h, v - h).unwrap();
            let fd = (c_pp - c_pm - c_mp + c_mm) / (4.0 * h * h);
            let want = m.log_density(u, v).unwrap().exp();
            assert!((fd - want).abs() < 1e-5 * want.max(1.0), "{rot:?}");
            // conditional inverse round trip
            let v = m.conditional_inverse(0.3, 0.7).unwrap();
            assert!((m.conditional(v, 0.7).unwrap() - 0.3).abs() < 1e-8, "{rot:?}");
        }
    }

    #[test]
    fn boundary_arguments_rejected() {
        let m = CopulaModel::new(CopulaFamily::Clayton, 1.0).unwrap();
        assert!(m.cdf(0.0, 0.5).is_err());
        assert!(m.cdf(0.5, 1.0).is_err());
        assert!(m.log_density(1.0, 0.5).is_err());
    }

    #[test]
    fn extreme_theta_stays_finite() {
        // gumbel θ → 1⁺ and clayton with large θ must not produce NaN
        let g = CopulaModel::new(CopulaFamily::Gumbel, 1.0 + 1e-12).unwrap();
        assert!(g.log_density(0.3, 0.8).unwrap().is_finite());
        let c = CopulaModel::new(CopulaFamily::Clayton, 50.0).unwrap();
        assert!(c.log_density(1e-10, 1e-10).unwrap().is_finite());
        assert!(c.cdf(1e-10, 0.99).unwrap() >= 0.0);
    }
}
