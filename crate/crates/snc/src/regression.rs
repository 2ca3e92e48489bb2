//! Ordinary least squares with a two-sided t-test on the slope.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided p-value of `slope = 0`.
    pub p_value: f64,
    pub slope_std_err: f64,
    pub r_squared: f64,
    pub n: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RegressionError {
    #[error("regression needs at least 3 observations, got {0}")]
    TooFew(usize),
    #[error("x and y lengths differ ({0} vs {1})")]
    Length(usize, usize),
    #[error("control values are all equal")]
    ConstantX,
    #[error("non-finite observation")]
    NonFinite,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<OlsFit, RegressionError> {
    if x.len() != y.len() {
        return Err(RegressionError::Length(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(RegressionError::TooFew(n));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite);
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(RegressionError::ConstantX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    // residuals below rounding noise count as an exact fit
    let sse = if sse <= 1e-24 * syy.max(f64::MIN_POSITIVE) { 0.0 } else { sse };
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let p_value = if se == 0.0 {
        if slope == 0.0 { 1.0 } else { 0.0 }
    } else {
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("n >= 3");
        2.0 * t.sf((slope / se).abs())
    };
    let r_squared = if syy == 0.0 { 0.0 } else { 1.0 - sse / syy };
    Ok(OlsFit { slope, intercept, p_value, slope_std_err: se, r_squared, n })
}
