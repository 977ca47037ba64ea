//! Uniform time grids and sampled paths.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative tolerance on step uniformity when a grid is rebuilt from times.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Uniform grid t_i = i·δ, i = 0..=intervals, with δ = T / intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    step: f64,
    intervals: usize,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, intervals: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid("T", horizon, "horizon must be positive and finite"));
        }
        if intervals == 0 {
            return Err(invalid("n", 0.0, "at least one interval is required"));
        }
        Ok(TimeGrid {
            step: horizon / intervals as f64,
            intervals,
        })
    }

    pub fn with_step(step: f64, intervals: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(invalid("delta", step, "step must be positive and finite"));
        }
        TimeGrid::uniform(step * intervals as f64, intervals)
    }

    /// Recovers a grid from explicit times, which must start at 0 and be
    /// uniformly spaced within [`GRID_TOLERANCE`].
    pub fn from_times(times: &[f64]) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidInput("a grid needs at least two times".into()));
        }
        if times[0] != 0.0 {
            return Err(invalid("t0", times[0], "simulation grids start at 0"));
        }
        let intervals = times.len() - 1;
        let step = times[intervals] / intervals as f64;
        check_uniform(times, step, GRID_TOLERANCE)?;
        TimeGrid::with_step(step, intervals)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of grid points, `intervals + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.intervals)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }
}

/// Checks |t_{i+1} - t_i - step| <= tol·step for every consecutive pair.
pub(crate) fn check_uniform(times: &[f64], step: f64, tol: f64) -> Result<()> {
    for (i, w) in times.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(d > 0.0) || (d - step).abs() > tol * step {
            return Err(Error::NonUniformGrid {
                index: i + 1,
                step: d,
                expected: step,
            });
        }
    }
    Ok(())
}

/// Values sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(SamplePath { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        SamplePath {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    /// (t_i, value_i) pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.grid.time(i), v))
    }

    /// Trapezoid-rule integral of `f(value)` over the grid.
    pub fn trapezoid<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = self.grid.step();
        let inner: f64 = self.values[1..self.len() - 1].iter().map(|&v| f(v)).sum();
        h * (0.5 * (f(self.values[0]) + f(self.last())) + inner)
    }

    /// sup_i |value_i|.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_basics() {
        let g = TimeGrid::uniform(3.0, 500).unwrap();
        assert_eq!(g.len(), 501);
        assert_eq!(g.time(0), 0.0);
        assert!((g.horizon() - 3.0).abs() < 1e-15);
        assert!((g.step() - 0.006).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::uniform(0.0, 10).is_err());
        assert!(TimeGrid::uniform(1.0, 0).is_err());
        assert!(matches!(
            TimeGrid::from_times(&[0.0, 0.5, 1.2]),
            Err(Error::NonUniformGrid { .. })
        ));
        assert!(TimeGrid::from_times(&[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn from_times_round_trips() {
        let g = TimeGrid::uniform(2.0, 64).unwrap();
        let back = TimeGrid::from_times(&g.times()).unwrap();
        assert_eq!(back.intervals(), 64);
        assert!((back.step() - g.step()).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let g = TimeGrid::uniform(2.0, 7).unwrap();
        let p = SamplePath::new(g, g.times()).unwrap();
        assert!((p.trapezoid(|v| v) - 2.0).abs() < 1e-14);
        assert!(SamplePath::new(g, vec![0.0; 3]).is_err());
    }
}
