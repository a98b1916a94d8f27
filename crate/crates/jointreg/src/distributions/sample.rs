//! The universal fitter input: n subjects observed at two time points.

use super::family::ResponseFamily;
use crate::error::{Error, Result};
use crate::specfun::{kendall_tau, sample_skewness};

/// Paired responses (y1ᵢ, y2ᵢ) for i = 1..n.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalSample {
    y1: Vec<f64>,
    y2: Vec<f64>,
}

impl LongitudinalSample {
    pub fn new(y1: Vec<f64>, y2: Vec<f64>) -> Result<Self> {
        if y1.len() != y2.len() {
            return Err(Error::domain(format!(
                "time-point vectors differ in length: {} vs {}",
                y1.len(),
                y2.len()
            )));
        }
        if y1.len() < 2 {
            return Err(Error::domain("need at least 2 subjects"));
        }
        if y1.iter().chain(y2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("responses must be finite"));
        }
        Ok(Self { y1, y2 })
    }

    pub fn n(&self) -> usize {
        self.y1.len()
    }

    pub fn y1(&self) -> &[f64] {
        &self.y1
    }

    pub fn y2(&self) -> &[f64] {
        &self.y2
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.y1.iter().copied().zip(self.y2.iter().copied()).collect()
    }

    /// Family-specific support validation, with the first offending subject
    /// index in the message.
    pub fn validate_for_family(&self, family: ResponseFamily) -> Result<()> {
        for (i, &y) in self.y1.iter().chain(self.y2.iter()).enumerate() {
            let subject = i % self.n() + 1;
            match family {
                ResponseFamily::Normal => {}
                ResponseFamily::Gamma => {
                    if y <= 0.0 {
                        return Err(Error::domain(format!(
                            "gamma family requires positive responses; subject {subject} has y={y}"
                        )));
                    }
                }
                ResponseFamily::NegBin => {
                    if y < 0.0 || (y - y.round()).abs() > 1e-8 {
                        return Err(Error::domain(format!(
                            "negbin family requires nonnegative integer counts; subject {subject} has y={y}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Empirical Kendall's tau-b between the two time points.
    pub fn empirical_tau(&self) -> Result<f64> {
        kendall_tau(&self.pairs())
    }

    /// Average of the two marginal sample skewness values.
    pub fn empirical_skew(&self) -> Result<f64> {
        Ok(0.5 * (sample_skewness(&self.y1)? + sample_skewness(&self.y2)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(LongitudinalSample::new(vec![1.0], vec![2.0]).is_err());
        assert!(LongitudinalSample::new(vec![1.0, 2.0], vec![2.0]).is_err());
        assert!(LongitudinalSample::new(vec![1.0, f64::NAN], vec![2.0, 3.0]).is_err());
    }

    #[test]
    fn family_validation() {
        let d = LongitudinalSample::new(vec![1.0, 2.0], vec![0.5, -1.0]).unwrap();
        assert!(d.validate_for_family(ResponseFamily::Normal).is_ok());
        assert!(d.validate_for_family(ResponseFamily::Gamma).is_err());
        let counts = LongitudinalSample::new(vec![0.0, 3.0], vec![2.0, 1.0]).unwrap();
        assert!(counts.validate_for_family(ResponseFamily::NegBin).is_ok());
        let frac = LongitudinalSample::new(vec![0.5, 3.0], vec![2.0, 1.0]).unwrap();
        assert!(frac.validate_for_family(ResponseFamily::NegBin).is_err());
    }
}
