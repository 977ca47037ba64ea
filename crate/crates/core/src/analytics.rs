//! Gaussian analytics of the fractional Ornstein–Uhlenbeck process X:
//! covariance kernels, finite-dimensional densities of C, the uniform
//! deviation bound and the sigma budget.
//!
//! With k = υ(1-β), p = 2H - 2 and α_H = H(2H-1),
//!
//! ```text
//! R_{H,θ}(s,t) = α_H (1-β)² ∫_0^s ∫_0^t |u-v|^p e^{k(u+v)} du dv
//! R_X(s,t)     = σ² e^{-k(s+t)} R_{H,θ}(s,t)
//! ```
//!
//! Both are evaluated through the scaled integral
//! `J(s,t) = e^{-k(s+t)} ∫∫ |u-v|^p e^{k(u+v)}`. Writing w = u - v, the inner
//! integral over the diagonal direction is elementary, leaving
//! `J = ∫_{-s}^{t} |w|^p E(w) dw` with E smooth, bounded by the segment length
//! and free of overflow. The substitution |w| = z^{1/(p+1)} absorbs the
//! weight |w|^p into the measure, so adaptive Gauss–Kronrod sees a continuous
//! integrand with one kink (at w = t - s).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::SamplePath;
use crate::linalg::{cholesky_with_jitter, condition_number, CholeskyFactor};
use crate::model::ModelParams;
use crate::quadrature::QuadOptions;

/// Evaluation scheme for the double integral in R_{H,θ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelScheme {
    /// Adaptive Gauss–Kronrod with the given relative tolerance.
    Adaptive { rel_tol: f64 },
    /// Midpoint-free Riemann sum on `u_i = i·s/N`, `v_j = j·t/N`
    /// (i, j = 1..N) with the coincident points u_i = v_j dropped. A coarse
    /// approximation kept to reproduce published tables computed that way.
    OffDiagonalGrid { points: usize },
}

impl Default for KernelScheme {
    fn default() -> Self {
        KernelScheme::Adaptive { rel_tol: 1e-6 }
    }
}

impl std::str::FromStr for KernelScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "adaptive" {
            return Ok(KernelScheme::default());
        }
        let parse_tail = |tail: &str| {
            tail.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad kernel scheme `{s}`")))
        };
        if let Some(tail) = s.strip_prefix("adaptive:") {
            let rel_tol = parse_tail(tail)?;
            if !(rel_tol > 0.0) {
                return Err(invalid("rel_tol", rel_tol, "tolerance must be positive"));
            }
            return Ok(KernelScheme::Adaptive { rel_tol });
        }
        if let Some(tail) = s.strip_prefix("offdiag-grid:") {
            let points = tail
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad kernel scheme `{s}`")))?;
            if points == 0 {
                return Err(invalid("points", 0.0, "grid needs at least one point"));
            }
            return Ok(KernelScheme::OffDiagonalGrid { points });
        }
        Err(Error::InvalidInput(format!(
            "unknown kernel scheme `{s}` (expected adaptive, adaptive:TOL or offdiag-grid:N)"
        )))
    }
}

/// A kernel value with its estimated absolute error (0 for grid sums).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub error: f64,
}

impl KernelValue {
    fn scaled(self, f: f64) -> Self {
        KernelValue {
            value: self.value * f,
            error: self.error * f.abs(),
        }
    }
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(invalid("s", s, "times must be nonnegative"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", t, "times must be nonnegative"));
    }
    Ok(())
}

/// E(w) = e^{-k(s+t)} ∫_{v_lo}^{v_hi} e^{k(w+2v)} dv.
fn diagonal_profile(w: f64, s: f64, t: f64, k: f64) -> f64 {
    let lo = (-w).max(0.0);
    let hi = s.min(t - w);
    let len = hi - lo;
    if len <= 0.0 {
        return 0.0;
    }
    let kl = 2.0 * k * len;
    let segment = if kl < 1e-300 { len } else { -(-kl).exp_m1() / (2.0 * k) };
    (k * (w + 2.0 * hi - s - t)).exp() * segment
}

/// J(s,t) by the substituted one-dimensional integral.
fn scaled_integral_adaptive(s: f64, t: f64, h: f64, k: f64, rel_tol: f64) -> Result<KernelValue> {
    let q = 1.0 / (2.0 * h - 1.0); // |w| = z^q, p + 1 = 2H - 1
    let opts = QuadOptions::relative(rel_tol);
    let mut total = KernelValue { value: 0.0, error: 0.0 };
    // right side w ∈ [0, t], left side w ∈ [-s, 0]; the kink sits at w = t - s
    for (sign, end) in [(1.0, t), (-1.0, s)] {
        if end <= 0.0 {
            continue;
        }
        let f = |z: f64| diagonal_profile(sign * z.powf(q), s, t, k);
        let zmax = end.powf(2.0 * h - 1.0);
        let kink = sign * (t - s);
        let pieces: Vec<f64> = if kink > 0.0 && kink < end {
            vec![0.0, kink.powf(2.0 * h - 1.0), zmax]
        } else {
            vec![0.0, zmax]
        };
        let r = crate::quadrature::integrate_pieces(f, &pieces, opts)?;
        total.value += q * r.value;
        total.error += q * r.error;
    }
    Ok(total)
}

fn scaled_integral_grid(s: f64, t: f64, h: f64, k: f64, points: usize) -> f64 {
    let p = 2.0 * h - 2.0;
    let du = s / points as f64;
    let dv = t / points as f64;
    let mut acc = 0.0;
    for i in 1..=points {
        let u = i as f64 * du;
        for j in 1..=points {
            let v = j as f64 * dv;
            if u == v {
                continue;
            }
            // e^{k(u+v)} e^{-k(s+t)}
            acc += (u - v).abs().powf(p) * (k * (u - s + v - t)).exp();
        }
    }
    acc * du * dv
}

/// J(s,t) = e^{-k(s+t)} ∫_0^s ∫_0^t |u-v|^{2H-2} e^{k(u+v)} du dv.
fn scaled_integral(s: f64, t: f64, p: &ModelParams, scheme: KernelScheme) -> Result<KernelValue> {
    check_times(s, t)?;
    p.validate()?;
    if s == 0.0 || t == 0.0 {
        return Ok(KernelValue { value: 0.0, error: 0.0 });
    }
    // symmetric in (s, t); evaluating in a canonical order keeps it exactly so
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    let k = p.drift_rate();
    match scheme {
        KernelScheme::Adaptive { rel_tol } => scaled_integral_adaptive(s, t, p.hurst, k, rel_tol),
        KernelScheme::OffDiagonalGrid { points } => Ok(KernelValue {
            value: scaled_integral_grid(s, t, p.hurst, k, points),
            error: 0.0,
        }),
    }
}

fn prefactor(p: &ModelParams) -> f64 {
    p.hurst().alpha() * (1.0 - p.beta).powi(2)
}

/// R_{H,θ}(s,t) with its error estimate. σ is not used.
pub fn r_h_theta_with(s: f64, t: f64, p: &ModelParams, scheme: KernelScheme) -> Result<KernelValue> {
    let j = scaled_integral(s, t, p, scheme)?;
    let growth = (p.drift_rate() * (s + t)).exp();
    if !growth.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "R_H,theta({s}, {t}) overflows; use r_x for long horizons"
        )));
    }
    Ok(j.scaled(prefactor(p) * growth))
}

/// R_{H,θ}(s,t) by adaptive quadrature (relative tolerance 1e-6).
pub fn r_h_theta(s: f64, t: f64, p: &ModelParams) -> Result<f64> {
    Ok(r_h_theta_with(s, t, p, KernelScheme::default())?.value)
}

/// R_X(s,t) = σ² e^{-υ(1-β)(s+t)} R_{H,θ}(s,t), with its error estimate.
pub fn r_x_with(s: f64, t: f64, p: &ModelParams, scheme: KernelScheme) -> Result<KernelValue> {
    if p.sigma == 0.0 {
        check_times(s, t)?;
        return Ok(KernelValue { value: 0.0, error: 0.0 });
    }
    Ok(scaled_integral(s, t, p, scheme)?.scaled(p.sigma * p.sigma * prefactor(p)))
}

/// Covariance of the fractional Ornstein–Uhlenbeck process X.
pub fn r_x(s: f64, t: f64, p: &ModelParams) -> Result<f64> {
    Ok(r_x_with(s, t, p, KernelScheme::default())?.value)
}

/// Covariance matrix and mean of (X_{t_1}, …, X_{t_n}).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub times: Vec<f64>,
    /// R_n(i,j) = R_X(t_i, t_j).
    pub covariance: DMatrix<f64>,
    /// V_n(i) = C0^{1-β} e^{-υ(1-β)t_i}.
    pub mean: DVector<f64>,
    /// Quadrature error estimate of each covariance entry.
    pub entry_errors: DMatrix<f64>,
}

/// Serializable view of a [`GaussianSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpecRecord {
    pub times: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

impl GaussianSpec {
    pub fn dim(&self) -> usize {
        self.times.len()
    }

    pub fn record(&self) -> GaussianSpecRecord {
        GaussianSpecRecord {
            times: self.times.clone(),
            covariance: self
                .covariance
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            mean: self.mean.iter().copied().collect(),
        }
    }
}

/// Builds R_n and V_n for strictly increasing positive observation times.
pub fn build_gaussian_spec(times: &[f64], p: &ModelParams) -> Result<GaussianSpec> {
    build_gaussian_spec_with(times, p, KernelScheme::default())
}

pub fn build_gaussian_spec_with(times: &[f64], p: &ModelParams, scheme: KernelScheme) -> Result<GaussianSpec> {
    p.validate()?;
    if times.is_empty() {
        return Err(Error::InvalidInput("at least one observation time is required".into()));
    }
    if !(times[0] > 0.0) {
        return Err(invalid("t", times[0], "observation times must be positive"));
    }
    if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(invalid("t", w[1], "observation times must be strictly increasing"));
    }
    let n = times.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<KernelValue> = pairs
        .par_iter()
        .map(|&(i, j)| r_x_with(times[i], times[j], p, scheme))
        .collect::<Result<_>>()?;
    let mut covariance = DMatrix::zeros(n, n);
    let mut entry_errors = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(&values) {
        covariance[(i, j)] = v.value;
        covariance[(j, i)] = v.value;
        entry_errors[(i, j)] = v.error;
        entry_errors[(j, i)] = v.error;
    }
    let x0 = p.x0();
    let k = p.drift_rate();
    let mean = DVector::from_iterator(n, times.iter().map(|t| x0 * (-k * t).exp()));
    Ok(GaussianSpec {
        times: times.to_vec(),
        covariance,
        mean,
        entry_errors,
    })
}

/// Largest dimension accepted by the density (2^n sign patterns are summed).
pub const MAX_DENSITY_DIM: usize = 20;
/// Condition numbers above this are reported as singular.
pub const MAX_CONDITION: f64 = 1e13;

/// A density value with the condition number of R_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    pub condition: f64,
}

/// Reusable evaluator of the density χ_n of (C_{t_1}, …, C_{t_n}).
///
/// With y_i = x_i^{1-β}, C = |X|^{1/(1-β)} gives
/// `χ_n(x) = Π (1-β) x_i^{-β} · Σ_{ε ∈ {±1}^n} φ_{R_n}(ε∘y - V_n)`
/// on the open positive orthant, and 0 elsewhere.
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    factor: CholeskyFactor,
    mean: DVector<f64>,
    beta: f64,
    condition: f64,
    log_norm: f64,
}

impl DensityEvaluator {
    pub fn new(spec: &GaussianSpec, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(invalid("beta", beta, "exponent must lie in [0, 1)"));
        }
        let n = spec.dim();
        if n > MAX_DENSITY_DIM {
            return Err(Error::InvalidInput(format!(
                "density dimension {n} exceeds {MAX_DENSITY_DIM}"
            )));
        }
        let condition = condition_number(&spec.covariance);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularCovariance { condition });
        }
        let factor = cholesky_with_jitter(&spec.covariance)
            .map_err(|_| Error::SingularCovariance { condition })?;
        let log_norm = -0.5 * factor.log_det() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        Ok(DensityEvaluator {
            factor,
            mean: spec.mean.clone(),
            beta,
            condition,
            log_norm,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn evaluate(&self, xs: &[f64]) -> Result<f64> {
        let n = self.mean.len();
        if xs.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} query coordinates for a {n}-dimensional density",
                xs.len()
            )));
        }
        if xs.iter().any(|&x| !(x > 0.0)) {
            return Ok(0.0);
        }
        let e = 1.0 - self.beta;
        let y: Vec<f64> = xs.iter().map(|x| x.powf(e)).collect();
        let log_jac: f64 = xs.iter().map(|x| e.ln() - self.beta * x.ln()).sum();
        let mut logs = Vec::with_capacity(1 << n);
        let mut z = DVector::zeros(n);
        for mask in 0u32..(1u32 << n) {
            for i in 0..n {
                let sign = if mask & (1 << i) != 0 { -1.0 } else { 1.0 };
                z[i] = sign * y[i] - self.mean[i];
            }
            let w = self.factor.solve_lower(&z);
            logs.push(-0.5 * w.norm_squared());
        }
        let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - peak).exp()).sum();
        Ok((log_jac + self.log_norm + peak + sum.ln()).exp())
    }
}

/// χ_n(xs) together with the condition number of R_n.
pub fn density_chi_n(xs: &[f64], spec: &GaussianSpec, beta: f64) -> Result<DensityValue> {
    let eval = DensityEvaluator::new(spec, beta)?;
    Ok(DensityValue {
        value: eval.evaluate(xs)?,
        condition: eval.condition(),
    })
}

/// 2 exp[-x² / (2σ² R_{H,θ}(T,T))], unclamped. 0 when σ = 0.
pub fn borell_bound_raw(x: f64, horizon: f64, p: &ModelParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid("x", x, "deviation radius must be positive"));
    }
    if !(horizon > 0.0) {
        return Err(invalid("T", horizon, "horizon must be positive"));
    }
    p.validate()?;
    if p.sigma == 0.0 {
        return Ok(0.0);
    }
    let r = r_h_theta(horizon, horizon, p)?;
    Ok(borell_from_kernel(x, p.sigma * p.sigma, r))
}

fn borell_from_kernel(x: f64, sigma2: f64, r_tt: f64) -> f64 {
    2.0 * (-x * x / (2.0 * sigma2 * r_tt)).exp()
}

/// Upper bound on P(sup_{t ≤ T} |X_t - X^det_t| > x), clamped to [0, 1].
pub fn borell_deviation_bound(x: f64, horizon: f64, p: &ModelParams) -> Result<f64> {
    Ok(borell_bound_raw(x, horizon, p)?.min(1.0))
}

/// A sigma-budget question: the largest σ² keeping X within `x` of X^det on
/// [0, T] with probability at least 1 - λ. σ in `params` is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetQuery {
    pub lambda: f64,
    /// Radius in X-space.
    pub x: f64,
    pub horizon: f64,
    pub params: ModelParams,
}

impl BudgetQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(invalid("lambda", self.lambda, "level must lie in (0, 1)"));
        }
        if !(self.x > 0.0 && self.x.is_finite()) {
            return Err(invalid("x", self.x, "deviation radius must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("T", self.horizon, "horizon must be positive"));
        }
        self.params.validate()
    }
}

/// M(λ, x, H) = x² / (2 R_{H,θ}(T,T) log(2/λ)) for a known R_{H,θ}(T,T).
pub fn sigma_budget_from_kernel(lambda: f64, x: f64, r_tt: f64) -> f64 {
    x * x / (2.0 * r_tt * (2.0 / lambda).ln())
}

/// M(λ, x, H) by adaptive quadrature.
pub fn sigma_budget(q: &BudgetQuery) -> Result<f64> {
    sigma_budget_with(q, KernelScheme::default())
}

pub fn sigma_budget_with(q: &BudgetQuery, scheme: KernelScheme) -> Result<f64> {
    q.validate()?;
    let r = r_h_theta_with(q.horizon, q.horizon, &q.params, scheme)?.value;
    Ok(sigma_budget_from_kernel(q.lambda, q.x, r))
}

/// Upper envelope 2^γ (C^det_t + x^{γ+1}) of the concentration.
pub fn concentration_envelope(cdet: &SamplePath, x: f64, gamma: f64) -> Result<SamplePath> {
    if !(x > 0.0) {
        return Err(invalid("x", x, "deviation radius must be positive"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", gamma, "gamma must be nonnegative"));
    }
    let scale = 2f64.powf(gamma);
    let shift = x.powf(gamma + 1.0);
    Ok(SamplePath {
        grid: cdet.grid,
        values: cdet.values.iter().map(|c| scale * (c + shift)).collect(),
    })
}
