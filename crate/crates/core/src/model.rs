//! The fractional bolus model: parameters, the weighted integral B^H(θ), the
//! explicit concentration path and its fractional Ornstein–Uhlenbeck form.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fbm::{FbmSampler, GeneratorKind, Hurst};
use crate::grid::{SamplePath, TimeGrid};
use crate::noise::Seed;

/// Parameters of the model. Units: hours and grams (or g/L with a volume).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Elimination constant υ (1/h).
    pub upsilon: f64,
    /// Volatility σ.
    pub sigma: f64,
    /// Exponent β ∈ [0, 1).
    pub beta: f64,
    /// Hurst parameter H ∈ (1/2, 1).
    pub hurst: f64,
    /// Initial concentration C0.
    pub c0: f64,
    /// Horizon T (h).
    pub horizon: f64,
}

impl ModelParams {
    pub fn new(upsilon: f64, sigma: f64, beta: f64, hurst: f64, c0: f64, horizon: f64) -> Result<Self> {
        let p = ModelParams {
            upsilon,
            sigma,
            beta,
            hurst,
            c0,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    /// β = 0, υ = 1.5, H = 0.9, σ² = 0.26, C0 = 1, T = 3.
    pub fn simulation_defaults() -> Self {
        ModelParams {
            upsilon: 1.5,
            sigma: 0.26f64.sqrt(),
            beta: 0.0,
            hurst: 0.9,
            c0: 1.0,
            horizon: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.upsilon > 0.0 && self.upsilon.is_finite()) {
            return Err(invalid("upsilon", self.upsilon, "elimination constant must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", self.sigma, "volatility must be nonnegative"));
        }
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", self.beta, "exponent must lie in [0, 1)"));
        }
        Hurst::new(self.hurst)?;
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(invalid("C0", self.c0, "initial concentration must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("T", self.horizon, "horizon must be positive"));
        }
        Ok(())
    }

    pub fn hurst(&self) -> Hurst {
        Hurst::new(self.hurst).expect("validated parameters")
    }

    /// γ = β / (1 - β).
    pub fn gamma(&self) -> f64 {
        self.beta / (1.0 - self.beta)
    }

    /// Drift rate k = υ(1 - β) of the Ornstein–Uhlenbeck form.
    pub fn drift_rate(&self) -> f64 {
        self.upsilon * (1.0 - self.beta)
    }

    /// X_0 = C0^{1-β}.
    pub fn x0(&self) -> f64 {
        self.c0.powf(1.0 - self.beta)
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        ModelParams { sigma, ..self }.checked()
    }

    pub fn with_hurst(self, hurst: f64) -> Result<Self> {
        ModelParams { hurst, ..self }.checked()
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        ModelParams { beta, ..self }.checked()
    }

    pub fn with_horizon(self, horizon: f64) -> Result<Self> {
        ModelParams { horizon, ..self }.checked()
    }

    fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }
}

/// θ_t = (1 - β) e^{υ(1-β)t}.
pub fn theta_weight(t: f64, p: &ModelParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("t", t, "time must be nonnegative"));
    }
    Ok((1.0 - p.beta) * (p.drift_rate() * t).exp())
}

/// Left-point Riemann–Stieltjes sums `out[i] = Σ_{j<i} θ(t_j)(bh[j+1] - bh[j])`.
pub fn weighted_integral<F: Fn(f64) -> f64>(bh: &SamplePath, theta: F) -> Result<SamplePath> {
    if bh.values.len() != bh.grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for a grid of {} points",
            bh.values.len(),
            bh.grid.len()
        )));
    }
    let mut values = Vec::with_capacity(bh.len());
    let mut acc = 0.0;
    values.push(0.0);
    for (j, w) in bh.values.windows(2).enumerate() {
        acc += theta(bh.grid.time(j)) * (w[1] - w[0]);
        values.push(acc);
    }
    Ok(SamplePath {
        grid: bh.grid,
        values,
    })
}

/// B^H_t(θ) = ∫_0^t θ_s dB^H_s on the path's grid.
pub fn weighted_wiener_integral(bh: &SamplePath, p: &ModelParams) -> Result<SamplePath> {
    p.validate()?;
    let scale = 1.0 - p.beta;
    let k = p.drift_rate();
    weighted_integral(bh, |t| scale * (k * t).exp())
}

/// Every process of one simulated path on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessBundle {
    pub params: ModelParams,
    pub grid: TimeGrid,
    /// Driving fBm.
    pub bh: SamplePath,
    /// B^H(θ).
    pub bh_theta: SamplePath,
    /// Fractional Ornstein–Uhlenbeck process X (signed).
    pub x: SamplePath,
    /// Concentration C = |X|^{γ+1}.
    pub c: SamplePath,
    /// First index where the concentration reaches 0.
    pub tau0_index: Option<usize>,
}

impl ProcessBundle {
    /// Assembles the bundle from a driving fBm path.
    pub fn from_fbm(p: &ModelParams, bh: SamplePath) -> Result<Self> {
        let bh_theta = weighted_wiener_integral(&bh, p)?;
        let grid = bh.grid;
        let x0 = p.x0();
        let k = p.drift_rate();
        let power = p.gamma() + 1.0;
        let x: Vec<f64> = bh_theta
            .values
            .iter()
            .enumerate()
            .map(|(i, b)| (x0 + p.sigma * b) * (-k * grid.time(i)).exp())
            .collect();
        let c = x.iter().map(|v| v.abs().powf(power)).collect();
        let mut bundle = ProcessBundle {
            params: *p,
            grid,
            bh,
            bh_theta,
            x: SamplePath { grid, values: x },
            c: SamplePath { grid, values: c },
            tau0_index: None,
        };
        bundle.tau0_index = detect_tau0(&bundle).map(|(i, _)| i);
        Ok(bundle)
    }

    /// C0^{1-β} + σ B^H(θ), the pre-absolute-value core of C.
    pub fn core(&self) -> Vec<f64> {
        let x0 = self.params.x0();
        self.bh_theta
            .values
            .iter()
            .map(|b| x0 + self.params.sigma * b)
            .collect()
    }

    pub fn tau0_time(&self) -> Option<f64> {
        self.tau0_index.map(|i| self.grid.time(i))
    }
}

/// Simulates the model on `n` intervals of `[0, p.horizon]`.
pub fn simulate_concentration(
    p: &ModelParams,
    n: usize,
    seed: Seed,
    generator: GeneratorKind,
) -> Result<ProcessBundle> {
    p.validate()?;
    if n < 2 {
        return Err(invalid("n", n as f64, "at least two intervals are required"));
    }
    let sampler = FbmSampler::new(generator, p.hurst, p.horizon, n)?;
    simulate_with(p, &sampler, seed)
}

/// Simulates with a prepared generator whose grid defines the time points.
pub fn simulate_with(p: &ModelParams, sampler: &FbmSampler, seed: Seed) -> Result<ProcessBundle> {
    ProcessBundle::from_fbm(p, sampler.sample(seed)?)
}

/// Bundles for many seeds, in seed order.
pub fn simulate_many(p: &ModelParams, sampler: &FbmSampler, seeds: &[Seed]) -> Result<Vec<ProcessBundle>> {
    sampler
        .sample_many(seeds)?
        .into_iter()
        .map(|bh| ProcessBundle::from_fbm(p, bh))
        .collect()
}

/// (X^det, C^det) with X^det_t = C0^{1-β} e^{-υ(1-β)t} and C^det = |X^det|^{γ+1}.
pub fn deterministic_solution(p: &ModelParams, grid: TimeGrid) -> Result<(SamplePath, SamplePath)> {
    p.validate()?;
    let x0 = p.x0();
    let k = p.drift_rate();
    let power = p.gamma() + 1.0;
    let x: Vec<f64> = (0..grid.len()).map(|i| x0 * (-k * grid.time(i)).exp()).collect();
    let c = x.iter().map(|v| v.abs().powf(power)).collect();
    Ok((SamplePath { grid, values: x }, SamplePath { grid, values: c }))
}

/// First grid index (and time) where the core C0^{1-β} + σ B^H(θ) is ≤ 0.
pub fn detect_tau0(bundle: &ProcessBundle) -> Option<(usize, f64)> {
    bundle
        .core()
        .iter()
        .position(|&v| v <= 0.0)
        .map(|i| (i, bundle.grid.time(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pk() -> ModelParams {
        ModelParams::new(3.5, 0.5, 0.9, 0.9, 1.0, 3.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::new(0.0, 0.1, 0.0, 0.9, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.0, 0.9, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, 1.0, 0.9, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, 0.0, 0.5, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, 0.0, 0.9, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, 0.0, 0.9, 1.0, 0.0).is_err());
        let p = pk();
        assert!((p.gamma() - 9.0).abs() < 1e-12);
        assert!((p.drift_rate() - 0.35).abs() < 1e-15);
        assert!(ModelParams::simulation_defaults().validate().is_ok());
    }

    #[test]
    fn theta_examples() {
        let p = pk();
        assert!((theta_weight(0.0, &p).unwrap() - 0.1).abs() < 1e-16);
        // 0.1·e^{0.35} and e^{3.5}, evaluated independently
        assert!((theta_weight(1.0, &p).unwrap() - 0.141_906_754_859_325_73).abs() < 1e-15);
        let q = p.with_beta(0.0).unwrap();
        assert!((theta_weight(1.0, &q).unwrap() - 33.115_451_958_692_31).abs() < 1e-12);
        assert!(theta_weight(-1.0, &p).is_err());
    }

    #[test]
    fn constant_weight_telescopes() {
        let bh = SamplePath::new(TimeGrid::uniform(1.0, 4).unwrap(), vec![0.0, 0.3, -0.2, 0.5, 0.1]).unwrap();
        let out = weighted_integral(&bh, |_| 2.0).unwrap();
        for (o, b) in out.values.iter().zip(&bh.values) {
            assert!((o - 2.0 * b).abs() < 1e-15);
        }
        let zero = weighted_wiener_integral(&SamplePath::zeros(bh.grid), &pk()).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let broken = SamplePath { grid: bh.grid, values: vec![0.0; 3] };
        assert!(matches!(weighted_integral(&broken, |_| 1.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn sigma_zero_is_deterministic() {
        let p = pk().with_sigma(0.0).unwrap();
        let b = simulate_concentration(&p, 64, Seed::new(3), GeneratorKind::Exact).unwrap();
        let (xd, cd) = deterministic_solution(&p, b.grid).unwrap();
        assert_eq!(b.x.values, xd.values);
        assert_eq!(b.c.values, cd.values);
        assert!(b.tau0_index.is_none());
        for (i, c) in b.c.values.iter().enumerate() {
            let exact = (-3.5 * b.grid.time(i)).exp();
            assert!((c - exact).abs() <= 1e-13 * exact);
            if i > 0 {
                assert!(*c < b.c.values[i - 1]);
            }
        }
    }

    #[test]
    fn bundle_identities() {
        let p = pk().with_sigma(2.0).unwrap();
        let b = simulate_concentration(&p, 200, Seed::new(8), GeneratorKind::Hosking).unwrap();
        assert!((b.c.values[0] - 1.0).abs() < 1e-15);
        assert_eq!(b.x.values[0], 1.0);
        let (xd, _) = deterministic_solution(&p, b.grid).unwrap();
        let power = p.gamma() + 1.0;
        for i in 0..b.grid.len() {
            let c = b.x.values[i].abs().powf(power);
            assert!((b.c.values[i] - c).abs() <= 4.0 * f64::EPSILON * c);
            let diff = p.sigma * b.bh_theta.values[i] * (-0.35 * b.grid.time(i)).exp();
            assert!((b.x.values[i] - xd.values[i] - diff).abs() < 1e-14);
        }
    }

    #[test]
    fn deterministic_values() {
        let p = ModelParams::new(3.5, 0.0, 0.0, 0.9, 1.0, 1.0).unwrap();
        let (x, c) = deterministic_solution(&p, TimeGrid::uniform(1.0, 1).unwrap()).unwrap();
        assert_eq!((x.values[0], c.values[0]), (1.0, 1.0));
        assert!((c.values[1] - 0.030_197_383_422_318_5).abs() < 1e-15);
        let q = pk().with_horizon(1.0).unwrap();
        let (x, c) = deterministic_solution(&q, TimeGrid::uniform(1.0, 10).unwrap()).unwrap();
        for (xv, cv) in x.values.iter().zip(&c.values) {
            assert!((xv.powf(q.gamma() + 1.0) - cv).abs() <= 4.0 * f64::EPSILON * cv);
        }
    }

    #[test]
    fn tau0_on_constructed_core() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.9, 1.0, 3.0).unwrap();
        let grid = TimeGrid::uniform(3.0, 3).unwrap();
        let theta = SamplePath::new(grid, vec![0.0, -0.5, -1.2, 0.4]).unwrap();
        let mut b = ProcessBundle::from_fbm(&p, SamplePath::zeros(grid)).unwrap();
        b.bh_theta = theta;
        assert_eq!(b.core(), vec![1.0, 0.5, 1.0 - 1.2, 1.4]);
        assert_eq!(detect_tau0(&b), Some((2, 2.0)));
    }
}
