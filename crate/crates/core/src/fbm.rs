//! Fractional Brownian motion: covariance and sample-path generators.
//!
//! Three generators share the noise convention of [`crate::noise`]: the path
//! for seed `s` is a deterministic linear map applied to ξ_0..ξ_{n-1}.
//!
//! * [`VolterraFbm`]: the discretized Volterra scheme with Toeplitz weights
//!   `(i-j)^{H+1/2} - (i-j-1)^{H+1/2}`. Its kernel is `(t-s)^{H-1/2}`, so
//!   the process it approximates is the Riemann–Liouville fBm: at `t` its
//!   variance tends to `t^{2H}/(2H)` rather than `t^{2H}` (exact at H = 1/2).
//! * [`CholeskyFbm`]: exact in distribution, via the lower Cholesky factor of the
//!   `R_H` matrix on `t_1..t_n`.
//! * [`HoskingFbm`]: exact in distribution, via the Durbin–Levinson recursion on the
//!   fractional Gaussian noise autocovariance. Because Cholesky factors are
//!   unique, it reproduces the [`CholeskyFbm`] path for the same seed (up to
//!   rounding) in O(n) memory, which is what long horizons need.
//!
//! All three cost O(n²) per path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{SamplePath, TimeGrid};
use crate::linalg::cholesky_with_jitter;
use crate::noise::{standard_normals, Seed};

/// Hurst parameter.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hurst(f64);

impl Hurst {
    /// Hurst parameter admissible for the model, H ∈ (1/2, 1).
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.5 && h < 1.0 {
            Ok(Hurst(h))
        } else {
            Err(invalid("H", h, "model Hurst parameter must lie in (1/2, 1)"))
        }
    }

    /// Any fBm Hurst parameter, H ∈ (0, 1].
    pub fn fbm(h: f64) -> Result<Self> {
        if h > 0.0 && h <= 1.0 {
            Ok(Hurst(h))
        } else {
            Err(invalid("H", h, "fBm Hurst parameter must lie in (0, 1]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// α_H = H(2H - 1).
    pub fn alpha(self) -> f64 {
        self.0 * (2.0 * self.0 - 1.0)
    }
}

/// R_H(s, t) = ½(s^{2H} + t^{2H} - |t - s|^{2H}).
pub fn fbm_covariance(s: f64, t: f64, h: f64) -> Result<f64> {
    let h = Hurst::fbm(h)?;
    if !(s >= 0.0) {
        return Err(invalid("s", s, "times must be nonnegative"));
    }
    if !(t >= 0.0) {
        return Err(invalid("t", t, "times must be nonnegative"));
    }
    Ok(cov_unchecked(s, t, h.value()))
}

fn cov_unchecked(s: f64, t: f64, h: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
fn fgn_autocov(k: usize, h: f64) -> f64 {
    let e = 2.0 * h;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Volterra,
    Exact,
    Hosking,
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volterra" => Ok(GeneratorKind::Volterra),
            "exact" => Ok(GeneratorKind::Exact),
            "hosking" => Ok(GeneratorKind::Hosking),
            other => Err(Error::InvalidInput(format!(
                "unknown generator `{other}` (expected volterra, exact or hosking)"
            ))),
        }
    }
}

impl std::fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GeneratorKind::Volterra => "volterra",
            GeneratorKind::Exact => "exact",
            GeneratorKind::Hosking => "hosking",
        })
    }
}

fn check_inputs(h: f64, horizon: f64, n: usize) -> Result<(Hurst, TimeGrid)> {
    let h = Hurst::fbm(h)?;
    let grid = TimeGrid::uniform(horizon, n)?;
    Ok((h, grid))
}

/// Discretized Volterra scheme:
/// `B_{t_i} ≈ (T/n)^H / (H+1/2) · Σ_{j<i} [(i-j)^{H+1/2} - (i-j-1)^{H+1/2}] ξ_j`.
#[derive(Debug, Clone)]
pub struct VolterraFbm {
    hurst: Hurst,
    grid: TimeGrid,
    scale: f64,
    /// weights[m-1] = m^{H+1/2} - (m-1)^{H+1/2}, m = 1..=n.
    weights: Vec<f64>,
}

impl VolterraFbm {
    pub fn new(h: f64, horizon: f64, n: usize) -> Result<Self> {
        let (hurst, grid) = check_inputs(h, horizon, n)?;
        let a = h + 0.5;
        let weights = (1..=n)
            .map(|m| (m as f64).powf(a) - ((m - 1) as f64).powf(a))
            .collect();
        Ok(VolterraFbm {
            hurst,
            grid,
            scale: grid.step().powf(h) / a,
            weights,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the scheme to explicit noise ξ_0..ξ_{n-1}.
    pub fn from_noise(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.grid.intervals();
        assert_eq!(xi.len(), n, "noise length must equal the number of intervals");
        let mut out = vec![0.0; n + 1];
        for (i, o) in out.iter_mut().enumerate().skip(1) {
            let acc: f64 = xi[..i].iter().enumerate().map(|(j, x)| self.weights[i - j - 1] * x).sum();
            *o = self.scale * acc;
        }
        out
    }

    pub fn sample(&self, seed: Seed) -> SamplePath {
        let xi = standard_normals(seed, self.grid.intervals());
        SamplePath {
            grid: self.grid,
            values: self.from_noise(&xi),
        }
    }

    /// Exact variance of the scheme at grid index `i`.
    pub fn variance_at(&self, i: usize) -> f64 {
        let s: f64 = self.weights[..i].iter().map(|w| w * w).sum();
        self.scale * self.scale * s
    }
}

/// Exact generator: B = L ξ with L the lower Cholesky factor of
/// `[R_H(t_i, t_j)]_{i,j=1..n}` (jitter policy of [`cholesky_with_jitter`]).
#[derive(Debug, Clone)]
pub struct CholeskyFbm {
    hurst: Hurst,
    grid: TimeGrid,
    /// Row-major packed lower triangle; row i holds i+1 entries.
    packed: Vec<f64>,
    jitter: f64,
}

impl CholeskyFbm {
    pub fn new(h: f64, horizon: f64, n: usize) -> Result<Self> {
        let (hurst, grid) = check_inputs(h, horizon, n)?;
        let cov = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            cov_unchecked(grid.time(i + 1), grid.time(j + 1), h)
        });
        let factor = cholesky_with_jitter(&cov)?;
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for k in 0..=i {
                packed.push(factor.lower[(i, k)]);
            }
        }
        Ok(CholeskyFbm {
            hurst,
            grid,
            packed,
            jitter: factor.jitter,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    /// Diagonal jitter that the factorization needed (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sample(&self, seed: Seed) -> SamplePath {
        self.sample_batch(&[seed]).pop().expect("one seed in, one path out")
    }

    /// Paths for several seeds. Each path is bit-identical to [`Self::sample`].
    pub fn sample_batch(&self, seeds: &[Seed]) -> Vec<SamplePath> {
        let n = self.grid.intervals();
        let b = seeds.len();
        // noise laid out [k][seed] so the inner loop runs over seeds
        let mut xi = vec![0.0; n * b];
        for (c, &s) in seeds.iter().enumerate() {
            for (k, v) in standard_normals(s, n).into_iter().enumerate() {
                xi[k * b + c] = v;
            }
        }
        let mut values = vec![vec![0.0; n + 1]; b];
        let mut acc = vec![0.0; b];
        let mut offset = 0;
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0.0);
            let row = &self.packed[offset..offset + i + 1];
            for (k, &l) in row.iter().enumerate() {
                let xk = &xi[k * b..(k + 1) * b];
                for (a, &x) in acc.iter_mut().zip(xk) {
                    *a += l * x;
                }
            }
            for (c, a) in acc.iter().enumerate() {
                values[c][i + 1] = *a;
            }
            offset += i + 1;
        }
        values
            .into_iter()
            .map(|v| SamplePath {
                grid: self.grid,
                values: v,
            })
            .collect()
    }
}

/// Exact generator through the Durbin–Levinson recursion on fractional
/// Gaussian noise (Hosking's method).
#[derive(Debug, Clone)]
pub struct HoskingFbm {
    hurst: Hurst,
    grid: TimeGrid,
    autocov: Vec<f64>,
}

impl HoskingFbm {
    pub fn new(h: f64, horizon: f64, n: usize) -> Result<Self> {
        let (hurst, grid) = check_inputs(h, horizon, n)?;
        let autocov = (0..n).map(|k| fgn_autocov(k, h)).collect();
        Ok(HoskingFbm {
            hurst,
            grid,
            autocov,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn sample(&self, seed: Seed) -> Result<SamplePath> {
        Ok(self.sample_batch(&[seed])?.pop().expect("one seed in, one path out"))
    }

    /// Paths for several seeds sharing one pass of the recursion.
    pub fn sample_batch(&self, seeds: &[Seed]) -> Result<Vec<SamplePath>> {
        let n = self.grid.intervals();
        let gamma = &self.autocov;
        let noise: Vec<Vec<f64>> = seeds.iter().map(|&s| standard_normals(s, n)).collect();
        let mut incr: Vec<Vec<f64>> = vec![vec![0.0; n]; seeds.len()];

        let mut phi: Vec<f64> = Vec::with_capacity(n);
        let mut next: Vec<f64> = Vec::with_capacity(n);
        let mut v = gamma[0];
        for (x, xi) in incr.iter_mut().zip(&noise) {
            x[0] = v.sqrt() * xi[0];
        }
        for k in 1..n {
            // phi holds φ_{k-1, 1..k-1}
            let mut num = gamma[k];
            for (j, p) in phi.iter().enumerate() {
                num -= p * gamma[k - 1 - j];
            }
            let pkk = num / v;
            next.clear();
            for j in 0..phi.len() {
                next.push(phi[j] - pkk * phi[phi.len() - 1 - j]);
            }
            next.push(pkk);
            std::mem::swap(&mut phi, &mut next);
            v *= 1.0 - pkk * pkk;
            if !(v > 0.0) {
                return Err(Error::Cholesky { dim: n, jitter: 0.0 });
            }
            let sd = v.sqrt();
            for (x, xi) in incr.iter_mut().zip(&noise) {
                let mut pred = 0.0;
                for (j, p) in phi.iter().enumerate() {
                    pred += p * x[k - 1 - j];
                }
                x[k] = pred + sd * xi[k];
            }
        }
        let scale = self.grid.step().powf(self.hurst.value());
        Ok(incr
            .into_iter()
            .map(|x| {
                let mut values = Vec::with_capacity(n + 1);
                let mut b = 0.0;
                values.push(0.0);
                for d in x {
                    b += scale * d;
                    values.push(b);
                }
                SamplePath {
                    grid: self.grid,
                    values,
                }
            })
            .collect())
    }
}

/// A prepared generator, reusable across seeds.
#[derive(Debug, Clone)]
pub enum FbmSampler {
    Volterra(VolterraFbm),
    Exact(CholeskyFbm),
    Hosking(HoskingFbm),
}

impl FbmSampler {
    pub fn new(kind: GeneratorKind, h: f64, horizon: f64, n: usize) -> Result<Self> {
        Ok(match kind {
            GeneratorKind::Volterra => FbmSampler::Volterra(VolterraFbm::new(h, horizon, n)?),
            GeneratorKind::Exact => FbmSampler::Exact(CholeskyFbm::new(h, horizon, n)?),
            GeneratorKind::Hosking => FbmSampler::Hosking(HoskingFbm::new(h, horizon, n)?),
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        match self {
            FbmSampler::Volterra(_) => GeneratorKind::Volterra,
            FbmSampler::Exact(_) => GeneratorKind::Exact,
            FbmSampler::Hosking(_) => GeneratorKind::Hosking,
        }
    }

    pub fn grid(&self) -> TimeGrid {
        match self {
            FbmSampler::Volterra(g) => g.grid(),
            FbmSampler::Exact(g) => g.grid(),
            FbmSampler::Hosking(g) => g.grid(),
        }
    }

    pub fn sample(&self, seed: Seed) -> Result<SamplePath> {
        match self {
            FbmSampler::Volterra(g) => Ok(g.sample(seed)),
            FbmSampler::Exact(g) => Ok(g.sample(seed)),
            FbmSampler::Hosking(g) => g.sample(seed),
        }
    }

    /// Paths for many seeds, in seed order. Work is split into chunks that run
    /// on the rayon pool; results do not depend on the thread count.
    pub fn sample_many(&self, seeds: &[Seed]) -> Result<Vec<SamplePath>> {
        const CHUNK: usize = 32;
        let chunks: Vec<Result<Vec<SamplePath>>> = seeds
            .par_chunks(CHUNK)
            .map(|chunk| match self {
                FbmSampler::Volterra(g) => Ok(chunk.iter().map(|&s| g.sample(s)).collect()),
                FbmSampler::Exact(g) => Ok(g.sample_batch(chunk)),
                FbmSampler::Hosking(g) => g.sample_batch(chunk),
            })
            .collect();
        let mut out = Vec::with_capacity(seeds.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }
}

/// One path of the Volterra scheme.
pub fn simulate_fbm_volterra(h: f64, horizon: f64, n: usize, seed: Seed) -> Result<SamplePath> {
    Ok(VolterraFbm::new(h, horizon, n)?.sample(seed))
}

/// One exact path (Cholesky of the grid covariance).
pub fn simulate_fbm_exact(h: f64, horizon: f64, n: usize, seed: Seed) -> Result<SamplePath> {
    Ok(CholeskyFbm::new(h, horizon, n)?.sample(seed))
}

/// One exact path (Durbin–Levinson).
pub fn simulate_fbm_hosking(h: f64, horizon: f64, n: usize, seed: Seed) -> Result<SamplePath> {
    HoskingFbm::new(h, horizon, n)?.sample(seed)
}
