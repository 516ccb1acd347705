//! Truncated Weierstrass sums.
//!
//! `W(t) = sum_{n=0}^{N} alpha^n (cos(beta^n pi t) - 1)` with `0 < alpha < 1`,
//! `beta > 1` and `alpha * beta > 1`. The function is continuous, nowhere
//! differentiable, and Holder of exponent `xi = log(1/alpha) / log(beta)`.
//! Each term is bounded by `2 alpha^n`, so truncating after `N` leaves a tail
//! of at most `2 alpha^{N+1} / (1 - alpha)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassParams {
    pub alpha: f64,
    pub beta: f64,
    /// Last summation index kept in the partial sum.
    pub truncation: u32,
}

impl WeierstrassParams {
    pub fn new(alpha: f64, beta: f64, truncation: u32) -> Result<Self> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::invalid("weierstrass alpha must lie in (0, 1)"));
        }
        if beta <= 1.0 {
            return Err(Error::invalid("weierstrass beta must exceed 1"));
        }
        if alpha * beta <= 1.0 {
            return Err(Error::invalid("weierstrass requires alpha * beta > 1"));
        }
        if truncation == 0 {
            return Err(Error::invalid("weierstrass truncation must be positive"));
        }
        let p = WeierstrassParams {
            alpha,
            beta,
            truncation,
        };
        let xi = p.xi();
        if !(0.0 < xi && xi < 1.0) {
            return Err(Error::invalid("weierstrass exponent must lie in (0, 1)"));
        }
        Ok(p)
    }

    /// Chooses the truncation from the geometric tail bound so that the
    /// truncation error stays below `tol`.
    pub fn with_tail_tolerance(alpha: f64, beta: f64, tol: f64) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::invalid("tail tolerance must be positive"));
        }
        let n = ((tol * (1.0 - alpha) / 2.0).ln() / alpha.ln()).ceil().max(1.0);
        Self::new(alpha, beta, n as u32)
    }

    /// Holder exponent `log(1/alpha) / log(beta)`.
    pub fn xi(&self) -> f64 {
        (1.0 / self.alpha).ln() / self.beta.ln()
    }

    /// Tail bound of the truncated sum.
    pub fn tail_bound(&self) -> f64 {
        2.0 * self.alpha.powi(self.truncation as i32 + 1) / (1.0 - self.alpha)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut sum = 0.0;
        let mut an = 1.0;
        let mut bn = 1.0;
        for _ in 0..=self.truncation {
            sum += an * ((bn * std::f64::consts::PI * t).cos() - 1.0);
            an *= self.alpha;
            bn *= self.beta;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_at_zero() {
        let p = WeierstrassParams::new(0.5, 4.0, 30).unwrap();
        assert_eq!(p.eval(0.0), 0.0);
    }

    #[test]
    fn classic_params_at_one() {
        // alpha = 1/2, beta = 4: cos(4^n pi) = 1 for n >= 1, so only the
        // n = 0 term survives with cos(pi) - 1 = -2. Terms beyond n ~ 25
        // see the f64 representation error of pi blown up past one radian,
        // but their alpha^n weights keep the pollution below 1e-7.
        let p = WeierstrassParams::new(0.5, 4.0, 30).unwrap();
        assert!((p.eval(1.0) + 2.0).abs() < 1e-6, "{}", p.eval(1.0));
    }

    #[test]
    fn truncation_error_within_tail_bound() {
        let p10 = WeierstrassParams::new(0.5, 4.0, 10).unwrap();
        let p20 = WeierstrassParams::new(0.5, 4.0, 20).unwrap();
        let bound = p10.tail_bound();
        for i in 0..100 {
            let t = i as f64 / 99.0 * 2.0;
            assert!((p10.eval(t) - p20.eval(t)).abs() <= bound);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WeierstrassParams::new(1.2, 4.0, 10).is_err());
        assert!(WeierstrassParams::new(0.5, 0.9, 10).is_err());
        assert!(WeierstrassParams::new(0.2, 4.0, 10).is_err()); // alpha*beta < 1
    }

    #[test]
    fn tail_tolerance_picks_enough_terms() {
        let p = WeierstrassParams::with_tail_tolerance(0.6, 2.0, 1e-10).unwrap();
        assert!(p.tail_bound() <= 1e-10);
    }
}
