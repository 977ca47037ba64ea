//! Estimators of (H, σ, υ) from a uniformly sampled path.
//!
//! Everything runs on the fOU observations x_k = c_k^{1-β}. The Hurst and
//! volatility estimators use squared second differences at lags 1 and 2;
//! the elimination-rate estimators invert the stationary second moment
//!
//! ```text
//! E[Y²] = σ² (1-β)^{2-2H} υ^{-2H} H Γ(2H)
//! ```
//!
//! at an empirical mean square, through [`upsilon_from_mean_square`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::grid::{check_uniform, SamplePath};
use crate::model::ModelParams;

/// Relative spacing tolerance for observation grids.
pub const OBSERVATION_GRID_TOLERANCE: f64 = 1e-6;

/// Concentrations observed on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub times: Vec<f64>,
    pub concentrations: Vec<f64>,
    /// Exponent used for the transform x = c^{1-β}.
    pub beta: f64,
}

impl ObservationSet {
    pub fn new(times: Vec<f64>, concentrations: Vec<f64>, beta: f64) -> Result<Self> {
        let obs = ObservationSet {
            times,
            concentrations,
            beta,
        };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::InvalidInput("observation set is empty".into()));
        }
        if self.times.len() != self.concentrations.len() {
            return Err(Error::GridMismatch(format!(
                "{} times but {} concentrations",
                self.times.len(),
                self.concentrations.len()
            )));
        }
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", self.beta, "exponent must lie in [0, 1)"));
        }
        if let Some(t) = self.times.iter().find(|t| !t.is_finite()) {
            return Err(invalid("t", *t, "times must be finite"));
        }
        if self.times.len() > 1 {
            let step = self.delta();
            if !(step > 0.0) {
                return Err(Error::InvalidInput("observation times must be strictly increasing".into()));
            }
            check_uniform(&self.times, step, OBSERVATION_GRID_TOLERANCE)?;
        }
        if let Some((index, &value)) = self
            .concentrations
            .iter()
            .enumerate()
            .find(|(_, c)| !(**c > 0.0 && c.is_finite()))
        {
            return Err(Error::NonPositiveConcentration { index, value });
        }
        Ok(())
    }

    /// Observations of a simulated concentration path.
    pub fn from_path(c: &SamplePath, beta: f64) -> Result<Self> {
        ObservationSet::new(c.grid.times(), c.values.clone(), beta)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mean spacing (t_last - t_0) / (len - 1); 0 for a single observation.
    pub fn delta(&self) -> f64 {
        let n = self.times.len();
        if n < 2 {
            0.0
        } else {
            (self.times[n - 1] - self.times[0]) / (n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    UpsilonKnown,
    Hurst,
    Sigma,
    UpsilonUnknown,
    Regression,
}

/// A point estimate with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub estimate: f64,
    pub method: Method,
    /// Number of samples used.
    pub n: usize,
    pub delta: f64,
    pub warnings: Vec<String>,
    /// Intermediate statistics.
    pub stats: BTreeMap<String, f64>,
}

impl EstimationResult {
    fn new(method: Method, estimate: f64, n: usize, delta: f64) -> Self {
        EstimationResult {
            estimate,
            method,
            n,
            delta,
            warnings: Vec::new(),
            stats: BTreeMap::new(),
        }
    }

    fn stat(mut self, name: &str, value: f64) -> Self {
        self.stats.insert(name.to_string(), value);
        self
    }
}

/// Second-difference filter a = (-1/4, 1/2, -1/4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterCoefficients {
    pub a: [f64; 3],
}

impl Default for FilterCoefficients {
    fn default() -> Self {
        FilterCoefficients {
            a: [-0.25, 0.5, -0.25],
        }
    }
}

impl FilterCoefficients {
    /// Σ_{k,l} a_k a_l |k-l|^{2H}, with 0^{2H} = 0.
    pub fn self_correlation(&self, h: f64) -> f64 {
        let mut s = 0.0;
        for (k, ak) in self.a.iter().enumerate() {
            for (l, al) in self.a.iter().enumerate() {
                if k != l {
                    s += ak * al * ((k as f64) - (l as f64)).abs().powf(2.0 * h);
                }
            }
        }
        s
    }
}

/// -1/2 + 2^{2H-3}, the filter self-correlation in closed form.
pub fn filter_constant(h: f64) -> f64 {
    -0.5 + 2f64.powf(2.0 * h - 3.0)
}

/// x_k = c_k^{1-β}.
pub fn to_fou_observations(obs: &ObservationSet) -> Result<Vec<f64>> {
    obs.validate()?;
    let e = 1.0 - obs.beta;
    Ok(obs.concentrations.iter().map(|c| c.powf(e)).collect())
}

/// E[Y^n] of the stationary solution: 0 for odd n, and
/// n! σ^n (1-β)^{n-nH} υ^{-nH} H^{n/2} Γ(2H)^{n/2} / (2^{n/2} (n/2)!) for even n.
pub fn ergodic_moment(order: u32, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if order == 0 {
        return Err(invalid("n", 0.0, "moment order must be at least 1"));
    }
    if order % 2 == 1 {
        return Ok(0.0);
    }
    if p.sigma == 0.0 {
        return Ok(0.0);
    }
    let n = order as f64;
    let h = p.hurst;
    let half = n / 2.0;
    let log = ln_gamma(n + 1.0) + n * p.sigma.ln() + (n - n * h) * (1.0 - p.beta).ln()
        - n * h * p.upsilon.ln()
        + half * (h.ln() + ln_gamma(2.0 * h))
        - half * 2f64.ln()
        - ln_gamma(half + 1.0);
    Ok(log.exp())
}

/// Elimination constant matching a stationary mean square:
/// `(1-β)^{-1} [ms / (σ²(1-β)² H Γ(2H))]^{-1/(2H)}`.
pub fn upsilon_from_mean_square(ms: f64, h: f64, sigma: f64, beta: f64) -> Result<f64> {
    if !(ms > 0.0 && ms.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "mean square {ms} must be positive; the elimination constant is undefined"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", sigma, "volatility must be positive"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("H", h, "Hurst parameter must be positive"));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid("beta", beta, "exponent must lie in [0, 1)"));
    }
    let e = 1.0 - beta;
    let scale = sigma * sigma * e * e * h * gamma(2.0 * h);
    Ok((ms / scale).powf(-1.0 / (2.0 * h)) / e)
}

/// υ̂_T for known (H, σ): inverts the trapezoid time average of X² over the path.
pub fn upsilon_hat_known(x_path: &SamplePath, h: f64, sigma: f64, beta: f64) -> Result<EstimationResult> {
    if x_path.len() < 2 || x_path.len() != x_path.grid.len() {
        return Err(Error::InvalidInput("path needs at least two aligned samples".into()));
    }
    if !(h > 0.5 && h < 1.0) {
        return Err(invalid("H", h, "known Hurst parameter must lie in (1/2, 1)"));
    }
    let horizon = x_path.grid.horizon();
    let integral = x_path.trapezoid(|v| v * v);
    if !(integral > 0.0) {
        return Err(Error::DegenerateInput(
            "the path is identically zero; the elimination constant is undefined".into(),
        ));
    }
    let ms = integral / horizon;
    let u = upsilon_from_mean_square(ms, h, sigma, beta)?;
    Ok(EstimationResult::new(Method::UpsilonKnown, u, x_path.len(), x_path.grid.step())
        .stat("mean_square", ms)
        .stat("horizon", horizon)
        .stat("H", h)
        .stat("sigma", sigma))
}

/// Mean squared second differences at lag 1 and lag 2 with their term counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondVariations {
    pub lag1_sum: f64,
    pub lag1_count: usize,
    pub lag2_sum: f64,
    pub lag2_count: usize,
}

impl SecondVariations {
    pub fn of(x: &[f64]) -> Self {
        let lag = |l: usize| -> (f64, usize) {
            if x.len() <= 2 * l {
                return (0.0, 0);
            }
            let s = x
                .windows(2 * l + 1)
                .map(|w| {
                    let d = w[2 * l] - 2.0 * w[l] + w[0];
                    d * d
                })
                .sum();
            (s, x.len() - 2 * l)
        };
        let (lag1_sum, lag1_count) = lag(1);
        let (lag2_sum, lag2_count) = lag(2);
        SecondVariations {
            lag1_sum,
            lag1_count,
            lag2_sum,
            lag2_count,
        }
    }

    pub fn lag1_mean(&self) -> f64 {
        self.lag1_sum / self.lag1_count as f64
    }

    pub fn lag2_mean(&self) -> f64 {
        self.lag2_sum / self.lag2_count as f64
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!("sample {i} is not finite"))),
        None => Ok(()),
    }
}

/// Second differences below rounding noise of the sample magnitude.
fn vanishes(sum: f64, count: usize, x: &[f64]) -> bool {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 64.0 * f64::EPSILON * scale;
    sum <= count as f64 * floor * floor
}

/// Ĥ = ½ log₂(lag-2 mean / lag-1 mean) of squared second differences.
///
/// Unclamped; estimates outside (1/2, 1) carry a warning.
pub fn hurst_hat(x: &[f64]) -> Result<EstimationResult> {
    if x.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "Hurst estimation needs at least 5 samples, got {}",
            x.len()
        )));
    }
    check_finite(x)?;
    let v = SecondVariations::of(x);
    if vanishes(v.lag1_sum, v.lag1_count, x) {
        return Err(Error::DegenerateInput(
            "lag-1 second differences vanish (affine sample); H is not identifiable".into(),
        ));
    }
    if vanishes(v.lag2_sum, v.lag2_count, x) {
        return Err(Error::DegenerateInput(
            "lag-2 second differences vanish; H is not identifiable".into(),
        ));
    }
    let h = 0.5 * (v.lag2_mean() / v.lag1_mean()).log2();
    let mut r = EstimationResult::new(Method::Hurst, h, x.len(), f64::NAN)
        .stat("lag1_sum", v.lag1_sum)
        .stat("lag2_sum", v.lag2_sum)
        .stat("lag1_mean", v.lag1_mean())
        .stat("lag2_mean", v.lag2_mean());
    if !(h > 0.5 && h < 1.0) {
        r.warnings
            .push(format!("estimated H = {h:.4} lies outside (1/2, 1)"));
    }
    Ok(r)
}

/// σ̂ from the lag-1 mean squared second difference at Hurst parameter `h_est`:
/// `σ̂² = (1-β)^{-2} · (-1/8) · mean|ΔΔx|² / ((-1/2 + 2^{2H-3}) δ^{2H})`.
pub fn sigma_hat(x: &[f64], h_est: f64, delta: f64, beta: f64) -> Result<EstimationResult> {
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "volatility estimation needs at least 3 samples, got {}",
            x.len()
        )));
    }
    check_finite(x)?;
    if !(h_est > 0.0 && h_est < 1.0) {
        return Err(invalid("H", h_est, "Hurst estimate must lie in (0, 1) for the volatility estimator"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", delta, "step must be positive"));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid("beta", beta, "exponent must lie in [0, 1)"));
    }
    let v = SecondVariations::of(x);
    let q = v.lag1_mean();
    let constant = filter_constant(h_est);
    let sigma2 = -q / (8.0 * constant * delta.powf(2.0 * h_est)) / (1.0 - beta).powi(2);
    let sigma = sigma2.sqrt();
    Ok(EstimationResult::new(Method::Sigma, sigma, x.len(), delta)
        .stat("lag1_mean", q)
        .stat("filter_constant", constant)
        .stat("sigma2", sigma2)
        .stat("H", h_est))
}

/// υ̂* for unknown (H, σ): Ĥ and σ̂ plugged into the mean-square inversion with
/// the left-point mean `(1/n) Σ_{k<n} x_k²`.
pub fn upsilon_hat_unknown(x: &[f64], delta: f64, beta: f64) -> Result<EstimationResult> {
    let h = hurst_hat(x)?;
    let s = sigma_hat(x, h.estimate, delta, beta)?;
    if !(s.estimate > 0.0) {
        return Err(Error::DegenerateInput(
            "estimated volatility is zero; the elimination constant is undefined".into(),
        ));
    }
    let n = x.len() - 1;
    let ms = x[..n].iter().map(|v| v * v).sum::<f64>() / n as f64;
    let u = upsilon_from_mean_square(ms, h.estimate, s.estimate, beta)?;
    let mut r = EstimationResult::new(Method::UpsilonUnknown, u, x.len(), delta)
        .stat("H_hat", h.estimate)
        .stat("sigma_hat", s.estimate)
        .stat("mean_square", ms)
        .stat("lag1_sum", h.stats["lag1_sum"])
        .stat("lag2_sum", h.stats["lag2_sum"]);
    r.warnings = h.warnings;
    Ok(r)
}

/// Least-squares fallback: υ = -(1-β)^{-1} · slope of log x on t, x = c^{1-β}.
/// The intercept gives C0 through log x_0 = (1-β) log C0.
pub fn regression_upsilon(obs: &ObservationSet) -> Result<EstimationResult> {
    let x = to_fou_observations(obs)?;
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput("regression needs at least two observations".into()));
    }
    let t = &obs.times;
    let mt = t.iter().sum::<f64>() / n as f64;
    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ml = logs.iter().sum::<f64>() / n as f64;
    let sxx: f64 = t.iter().map(|ti| (ti - mt).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateInput("observation times have zero variance".into()));
    }
    let sxy: f64 = t.iter().zip(&logs).map(|(ti, li)| (ti - mt) * (li - ml)).sum();
    let slope = sxy / sxx;
    let intercept = ml - slope * mt;
    let e = 1.0 - obs.beta;
    let u = -slope / e;
    let mut r = EstimationResult::new(Method::Regression, u, n, obs.delta())
        .stat("slope_log_x", slope)
        .stat("intercept_log_x", intercept)
        .stat("c0", (intercept / e).exp());
    if !(u > 0.0) {
        r.warnings
            .push("non-positive regression slope: concentrations do not decay".into());
    }
    Ok(r)
}
