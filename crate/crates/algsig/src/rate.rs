//! Empirical convergence rates against the predicted exponent
//! `min(3β/2, 2m(1−β))`.

use serde::{Deserialize, Serialize};

use crate::activation::SigmoidParams;
use crate::certify::grid_sup;
use crate::density::OperatorConfig;
use crate::error::{Error, Result};
use crate::operators::a_n_deviation;
use crate::vector::{FunctionRef, Interval, NormKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// The modulus term `n^{−3β/2}` dominates.
    ModulusLimited,
    /// The tail term `n^{−2m(1−β)}` dominates.
    TailLimited,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::ModulusLimited => "modulus-limited",
            Regime::TailLimited => "tail-limited",
        })
    }
}

/// `4m/(3+4m)`: at and above it the tail term sets the rate.
pub fn regime_threshold(m: u32) -> f64 {
    let m = f64::from(m);
    4.0 * m / (3.0 + 4.0 * m)
}

pub fn regime(beta: f64, m: u32) -> Regime {
    if beta >= regime_threshold(m) {
        Regime::TailLimited
    } else {
        Regime::ModulusLimited
    }
}

pub fn predicted_exponent(beta: f64, m: u32) -> f64 {
    (1.5 * beta).min(2.0 * f64::from(m) * (1.0 - beta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub series: Vec<(u64, f64)>,
    /// Least-squares slope of `−log(error)` against `log n`, so that decay
    /// reads as a positive number.
    pub slope: f64,
    pub predicted_exponent: f64,
    pub regime: Regime,
}

/// Fits `error ≈ C n^{−slope}` over `series` (at least 3 points, `n`
/// strictly increasing, errors positive).
pub fn rate_estimate(series: &[(u64, f64)], beta: f64, m: u32) -> Result<RateReport> {
    if series.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 points, got {}", series.len())));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) || series[0].0 == 0 {
        return Err(Error::InvalidParameter("n must be positive and strictly increasing".into()));
    }
    if let Some(&(n, e)) = series.iter().find(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Domain(format!("error at n = {n} is {e}; need a positive finite value")));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, e)| ((n as f64).ln(), e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(RateReport {
        series: series.to_vec(),
        slope: -sxy / sxx,
        predicted_exponent: predicted_exponent(beta, m),
        regime: regime(beta, m),
    })
}

/// `‖A_n f − f‖∞` on a grid of `grid_points` (refined once) for each `n`.
pub fn error_ladder(
    f: &FunctionRef,
    on: &Interval,
    ladder: &[u64],
    p: SigmoidParams,
    grid_points: usize,
) -> Result<Vec<(u64, f64)>> {
    ladder
        .iter()
        .map(|&n| {
            let cfg = OperatorConfig::new(on.a(), on.b(), n, p)?;
            let s = grid_sup(on, grid_points, |x| Ok(a_n_deviation(f.as_ref(), x, &cfg)?.norm(NormKind::Euclidean)))?;
            Ok((n, s.refined))
        })
        .collect()
}
