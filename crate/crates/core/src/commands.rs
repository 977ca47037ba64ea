//! Reproducible runs behind the command-line interface.
//!
//! Every command takes a serializable configuration, writes its outputs under
//! `out`, and writes the resolved configuration to `out/config.json`. Feeding
//! that file back through `--config` reproduces the outputs bit for bit.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    build_gaussian_spec_with, concentration_envelope, DensityEvaluator, GaussianSpecRecord, KernelScheme,
};
use crate::error::{invalid, Error, Result};
use crate::estimation::{
    hurst_hat, regression_upsilon, sigma_hat, to_fou_observations, upsilon_hat_known, upsilon_hat_unknown,
    EstimationResult, ObservationSet,
};
use crate::fbm::{FbmSampler, GeneratorKind};
use crate::grid::{SamplePath, TimeGrid};
use crate::io::{bundle_csv, load_observations, load_points, table_csv, write_json, write_text};
use crate::model::{deterministic_solution, simulate_many, ModelParams};
use crate::noise::Seed;
use crate::procedure::{budget_table, run_procedure, BudgetTable, ProcedureConfig, ProcedureReport};

/// Resolved configuration of one run, tagged by command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Estimate(EstimateConfig),
    Sweep(SweepConfig),
    Bound(BoundConfig),
    Procedure(ProcedureRunConfig),
    Density(DensityConfig),
}

/// Parameters of the pharmacokinetic setting used by the table commands:
/// β = 0.9, υ = 3.5, H = 0.9, C0 = 1, T = 3, σ unused.
pub fn table_defaults() -> ModelParams {
    ModelParams {
        upsilon: 3.5,
        sigma: 0.0,
        beta: 0.9,
        hurst: 0.9,
        c0: 1.0,
        horizon: 3.0,
    }
}

/// Overlays the JSON object in `overlay` onto `base` (keys in the file win).
pub fn merge_config<T: Serialize + DeserializeOwned>(base: &T, overlay: &Path) -> Result<T> {
    let text = std::fs::read_to_string(overlay)?;
    let mut patch: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(obj) = patch.as_object_mut() {
        obj.remove("command");
    }
    let mut value = serde_json::to_value(base)?;
    merge_values(&mut value, patch);
    Ok(serde_json::from_value(value)?)
}

fn merge_values(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge_values(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn write_config(out: &Path, cfg: RunConfig) -> Result<PathBuf> {
    let path = out.join("config.json");
    write_json(&path, &cfg)?;
    Ok(path)
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub params: ModelParams,
    pub n: usize,
    pub seed: u64,
    pub replicates: usize,
    pub generator: GeneratorKind,
    pub out: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            params: ModelParams::simulation_defaults(),
            n: 500,
            seed: 1,
            replicates: 1,
            generator: GeneratorKind::Exact,
            out: PathBuf::from("out"),
        }
    }
}

/// JSON sidecar of a simulated bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSidecar {
    pub params: ModelParams,
    pub seed: Seed,
    pub generator: GeneratorKind,
    pub n: usize,
    pub tau0_index: Option<usize>,
    pub tau0_time: Option<f64>,
}

/// Writes `bundle_RRRR.csv` and `bundle_RRRR.json` per replicate.
pub fn cmd_simulate(cfg: &SimulateConfig) -> Result<Vec<PathBuf>> {
    cfg.params.validate()?;
    if cfg.n < 2 {
        return Err(invalid("n", cfg.n as f64, "at least two intervals are required"));
    }
    if cfg.replicates == 0 {
        return Err(invalid("replicates", 0.0, "at least one replicate is required"));
    }
    let sampler = FbmSampler::new(cfg.generator, cfg.params.hurst, cfg.params.horizon, cfg.n)?;
    let seeds = Seed::replicates(cfg.seed, cfg.replicates);
    let bundles = simulate_many(&cfg.params, &sampler, &seeds)?;
    let mut files = vec![write_config(&cfg.out, RunConfig::Simulate(cfg.clone()))?];
    for (r, (b, seed)) in bundles.iter().zip(&seeds).enumerate() {
        let csv = cfg.out.join(format!("bundle_{r:04}.csv"));
        write_text(&csv, &bundle_csv(b))?;
        let json = cfg.out.join(format!("bundle_{r:04}.json"));
        write_json(
            &json,
            &BundleSidecar {
                params: cfg.params,
                seed: *seed,
                generator: cfg.generator,
                n: cfg.n,
                tau0_index: b.tau0_index,
                tau0_time: b.tau0_time(),
            },
        )?;
        files.push(csv);
        files.push(json);
    }
    Ok(files)
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    /// Observation CSV files with columns `t` and `c`.
    pub data: Vec<PathBuf>,
    pub beta: f64,
    /// Known H; with `sigma`, enables the known-parameter estimator.
    pub hurst: Option<f64>,
    pub sigma: Option<f64>,
    pub out: PathBuf,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            data: Vec::new(),
            beta: 0.0,
            hurst: None,
            sigma: None,
            out: PathBuf::from("out"),
        }
    }
}

/// Result of one estimator: a value or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok(EstimationResult),
    Error(String),
}

impl Outcome {
    fn from(r: Result<EstimationResult>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Error(e.to_string()),
        }
    }

    pub fn estimate(&self) -> Option<f64> {
        match self {
            Outcome::Ok(r) => Some(r.estimate),
            Outcome::Error(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub source: Option<PathBuf>,
    pub n: usize,
    pub delta: f64,
    pub beta: f64,
    pub hurst: Outcome,
    pub sigma: Outcome,
    pub upsilon_unknown: Outcome,
    pub regression: Outcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upsilon_known: Option<Outcome>,
}

/// Runs every applicable estimator; one failure does not stop the others.
pub fn estimate_observations(obs: &ObservationSet, hurst: Option<f64>, sigma: Option<f64>) -> Result<EstimateReport> {
    let x = to_fou_observations(obs)?;
    let delta = obs.delta();
    let h = Outcome::from(hurst_hat(&x));
    let s = match h.estimate() {
        Some(hv) => Outcome::from(sigma_hat(&x, hv, delta, obs.beta)),
        None => Outcome::Error("volatility estimate needs a Hurst estimate".into()),
    };
    let u = Outcome::from(upsilon_hat_unknown(&x, delta, obs.beta));
    let reg = Outcome::from(regression_upsilon(obs));
    let known = match (hurst, sigma) {
        (Some(hk), Some(sk)) => Some(Outcome::from(
            TimeGrid::with_step(delta, x.len().saturating_sub(1))
                .and_then(|g| SamplePath::new(g, x.clone()))
                .and_then(|path| upsilon_hat_known(&path, hk, sk, obs.beta)),
        )),
        _ => None,
    };
    Ok(EstimateReport {
        source: None,
        n: x.len(),
        delta,
        beta: obs.beta,
        hurst: h,
        sigma: s,
        upsilon_unknown: u,
        regression: reg,
        upsilon_known: known,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub reports: Vec<EstimateReport>,
    /// Medians over the files where each estimator succeeded.
    pub median_hurst: Option<f64>,
    pub median_sigma: Option<f64>,
    pub median_upsilon_unknown: Option<f64>,
    pub median_regression: Option<f64>,
}

/// Writes `estimates.json` covering every input file.
pub fn cmd_estimate(cfg: &EstimateConfig) -> Result<EstimateSummary> {
    if cfg.data.is_empty() {
        return Err(Error::InvalidInput("no observation files given".into()));
    }
    let mut reports = Vec::with_capacity(cfg.data.len());
    for path in &cfg.data {
        let obs = load_observations(path, cfg.beta)?;
        let mut r = estimate_observations(&obs, cfg.hurst, cfg.sigma)?;
        r.source = Some(path.clone());
        reports.push(r);
    }
    let med = |f: fn(&EstimateReport) -> &Outcome| {
        let v: Vec<f64> = reports.iter().filter_map(|r| f(r).estimate()).collect();
        if v.is_empty() {
            None
        } else {
            Some(median(&v))
        }
    };
    let summary = EstimateSummary {
        median_hurst: med(|r| &r.hurst),
        median_sigma: med(|r| &r.sigma),
        median_upsilon_unknown: med(|r| &r.upsilon_unknown),
        median_regression: med(|r| &r.regression),
        reports,
    };
    write_config(&cfg.out, RunConfig::Estimate(cfg.clone()))?;
    write_json(&cfg.out.join("estimates.json"), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- sweep

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    assert!(!data.is_empty(), "quantile of empty data");
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return v[lo];
    }
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub params: ModelParams,
    /// Sample sizes; each uses δ_n = n^{-1/2} and T = n δ_n.
    pub ns: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub generator: GeneratorKind,
    pub out: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            params: ModelParams::simulation_defaults(),
            ns: vec![10, 100, 1000],
            replicates: 50,
            seed: 1,
            generator: GeneratorKind::Hosking,
            out: PathBuf::from("out"),
        }
    }
}

/// Summary of one estimator at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub truth: f64,
    /// Median |estimate - truth|, failed replicates counted as infinite error.
    pub median_abs_error: f64,
    pub failures: usize,
}

impl SweepRow {
    fn from_estimates(n: usize, truth: f64, est: &[Option<f64>]) -> Self {
        let ok: Vec<f64> = est.iter().flatten().copied().collect();
        let errors: Vec<f64> = est
            .iter()
            .map(|e| e.map_or(f64::INFINITY, |v| (v - truth).abs()))
            .collect();
        let (median, q25, q75) = if ok.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (self::median(&ok), quantile(&ok, 0.25), quantile(&ok, 0.75))
        };
        SweepRow {
            n,
            median,
            q25,
            q75,
            truth,
            median_abs_error: self::median(&errors),
            failures: est.len() - ok.len(),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub hurst: Vec<SweepRow>,
    pub sigma2: Vec<SweepRow>,
    pub upsilon: Vec<SweepRow>,
}

/// Per-replicate (Ĥ, σ̂², υ̂*) from simulated concentrations on n intervals.
pub fn sweep_estimates(
    p: &ModelParams,
    n: usize,
    seeds: &[Seed],
    generator: GeneratorKind,
) -> Result<Vec<[Option<f64>; 3]>> {
    let delta = 1.0 / (n as f64).sqrt();
    let p = p.with_horizon(n as f64 * delta)?;
    let sampler = FbmSampler::new(generator, p.hurst, p.horizon, n)?;
    let bundles = simulate_many(&p, &sampler, seeds)?;
    Ok(bundles
        .par_iter()
        .map(|b| {
            let obs = match ObservationSet::from_path(&b.c, p.beta) {
                Ok(o) => o,
                Err(_) => return [None, None, None],
            };
            let x = match to_fou_observations(&obs) {
                Ok(x) => x,
                Err(_) => return [None, None, None],
            };
            let h = hurst_hat(&x).ok().map(|r| r.estimate);
            let s2 = h
                .and_then(|hv| sigma_hat(&x, hv, delta, p.beta).ok())
                .map(|r| r.estimate * r.estimate);
            let u = upsilon_hat_unknown(&x, delta, p.beta).ok().map(|r| r.estimate);
            [h, s2, u]
        })
        .collect())
}

/// Writes `sweep_hurst.csv`, `sweep_sigma2.csv`, `sweep_upsilon.csv`
/// (columns `n,median,q25,q75,truth`) and `sweep.json`.
pub fn cmd_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.params.validate()?;
    if cfg.replicates == 0 {
        return Err(invalid("replicates", 0.0, "at least one replicate is required"));
    }
    if let Some(&n) = cfg.ns.iter().find(|&&n| n < 5) {
        return Err(invalid("n", n as f64, "sweep sizes must be at least 5"));
    }
    let p = cfg.params;
    let truths = [p.hurst, p.sigma * p.sigma, p.upsilon];
    let seeds = Seed::replicates(cfg.seed, cfg.replicates);
    let mut report = SweepReport {
        hurst: Vec::new(),
        sigma2: Vec::new(),
        upsilon: Vec::new(),
    };
    for &n in &cfg.ns {
        let est = sweep_estimates(&p, n, &seeds, cfg.generator)?;
        let column = |k: usize| -> Vec<Option<f64>> { est.iter().map(|e| e[k]).collect() };
        report.hurst.push(SweepRow::from_estimates(n, truths[0], &column(0)));
        report.sigma2.push(SweepRow::from_estimates(n, truths[1], &column(1)));
        report.upsilon.push(SweepRow::from_estimates(n, truths[2], &column(2)));
    }
    write_config(&cfg.out, RunConfig::Sweep(cfg.clone()))?;
    for (name, rows) in [
        ("hurst", &report.hurst),
        ("sigma2", &report.sigma2),
        ("upsilon", &report.upsilon),
    ] {
        let data: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r.n as f64, r.median, r.q25, r.q75, r.truth])
            .collect();
        let mut text = String::from("n,median,q25,q75,truth\n");
        for (row, r) in data.iter().zip(rows) {
            let rest: Vec<String> = row[1..].iter().map(|v| crate::io::fmt17(*v)).collect();
            text.push_str(&format!("{},{}\n", r.n, rest.join(",")));
        }
        write_text(&cfg.out.join(format!("sweep_{name}.csv")), &text)?;
    }
    write_json(&cfg.out.join("sweep.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- bound

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    /// υ, β, C0 and T; σ and H are not used.
    pub params: ModelParams,
    pub hurst_values: Vec<f64>,
    pub table: ProcedureConfig,
    /// Grid size of the envelope curves.
    pub envelope_intervals: usize,
    pub out: PathBuf,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            params: table_defaults(),
            hurst_values: vec![0.9, 0.6],
            table: ProcedureConfig::default(),
            envelope_intervals: 300,
            out: PathBuf::from("out"),
        }
    }
}

/// Writes one budget table per H (`budget_H*.csv|json|txt`) and
/// `envelope.csv` (columns `t,cdet` and one upper envelope per radius).
pub fn cmd_bound(cfg: &BoundConfig) -> Result<Vec<BudgetTable>> {
    cfg.params.validate()?;
    let tables = cfg
        .hurst_values
        .iter()
        .map(|&h| budget_table(h, &cfg.params, &cfg.table))
        .collect::<Result<Vec<_>>>()?;
    write_config(&cfg.out, RunConfig::Bound(cfg.clone()))?;
    for t in &tables {
        let stem = format!("budget_H{}", t.hurst);
        write_text(&cfg.out.join(format!("{stem}.csv")), &t.to_csv())?;
        write_json(&cfg.out.join(format!("{stem}.json")), t)?;
        write_text(&cfg.out.join(format!("{stem}.txt")), &t.to_text())?;
    }
    let horizon = cfg.table.horizon.unwrap_or(cfg.params.horizon);
    let grid = TimeGrid::uniform(horizon, cfg.envelope_intervals.max(1))?;
    let (_, cdet) = deterministic_solution(&cfg.params, grid)?;
    let e = 1.0 - cfg.params.beta;
    let envelopes = cfg
        .table
        .radius_grid
        .iter()
        .map(|r| concentration_envelope(&cdet, r.powf(e), cfg.params.gamma()))
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec!["t".to_string(), "cdet".to_string()];
    header.extend(cfg.table.radius_grid.iter().map(|r| format!("envelope_{r}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| {
            let mut row = vec![grid.time(i), cdet.values[i]];
            row.extend(envelopes.iter().map(|env| env.values[i]));
            row
        })
        .collect();
    write_text(&cfg.out.join("envelope.csv"), &table_csv(&header_refs, &rows))?;
    Ok(tables)
}

// ---------------------------------------------------------------- procedure

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcedureRunConfig {
    pub data: PathBuf,
    pub procedure: ProcedureConfig,
    pub out: PathBuf,
}

impl Default for ProcedureRunConfig {
    fn default() -> Self {
        ProcedureRunConfig {
            data: PathBuf::new(),
            procedure: ProcedureConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

/// Writes `report.json` and `report.txt`.
pub fn cmd_procedure(cfg: &ProcedureRunConfig) -> Result<ProcedureReport> {
    let obs = load_observations(&cfg.data, cfg.procedure.beta_init)?;
    let report = run_procedure(&obs, &cfg.procedure)?;
    write_config(&cfg.out, RunConfig::Procedure(cfg.clone()))?;
    write_json(&cfg.out.join("report.json"), &report)?;
    write_text(&cfg.out.join("report.txt"), &report.to_text())?;
    Ok(report)
}

// ---------------------------------------------------------------- density

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub params: ModelParams,
    /// Observation times t_1 < … < t_n.
    pub times: Vec<f64>,
    /// CSV of query points (one column per time); required when n ≥ 2.
    pub points: Option<PathBuf>,
    /// Number of cells of the n = 1 curve.
    pub cells: usize,
    /// Right end of the n = 1 curve; by default 12 standard deviations out.
    pub upper: Option<f64>,
    pub scheme: KernelScheme,
    pub out: PathBuf,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            params: ModelParams::simulation_defaults(),
            times: vec![1.0],
            points: None,
            cells: 4000,
            upper: None,
            scheme: KernelScheme::default(),
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOutput {
    pub spec: GaussianSpecRecord,
    pub condition: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Midpoint-rule integral of the n = 1 curve.
    pub curve_integral: Option<f64>,
}

/// Writes `spec.json` and `density.csv` (query coordinates, then `density`).
pub fn cmd_density(cfg: &DensityConfig) -> Result<DensityOutput> {
    cfg.params.validate()?;
    let spec = build_gaussian_spec_with(&cfg.times, &cfg.params, cfg.scheme)?;
    let eval = DensityEvaluator::new(&spec, cfg.params.beta)?;
    let n = spec.dim();
    let (points, cell) = match &cfg.points {
        Some(path) => {
            let (_, rows) = load_points(path)?;
            if let Some(r) = rows.iter().find(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "query point with {} coordinates for {n} times",
                    r.len()
                )));
            }
            (rows, None)
        }
        None if n == 1 => {
            if cfg.cells == 0 {
                return Err(invalid("cells", 0.0, "curve needs at least one cell"));
            }
            let sd = spec.covariance[(0, 0)].sqrt();
            let upper = cfg
                .upper
                .unwrap_or_else(|| (spec.mean[0].abs() + 12.0 * sd).powf(1.0 / (1.0 - cfg.params.beta)));
            if !(upper > 0.0) {
                return Err(invalid("upper", upper, "curve end must be positive"));
            }
            let h = upper / cfg.cells as f64;
            ((0..cfg.cells).map(|i| vec![(i as f64 + 0.5) * h]).collect(), Some(h))
        }
        None => {
            return Err(Error::InvalidInput(
                "a points file is required for densities of dimension 2 or more".into(),
            ))
        }
    };
    let values = points
        .par_iter()
        .map(|x| eval.evaluate(x))
        .collect::<Result<Vec<f64>>>()?;
    let curve_integral = cell.map(|h| h * values.iter().sum::<f64>());
    let out = DensityOutput {
        spec: spec.record(),
        condition: eval.condition(),
        points,
        values,
        curve_integral,
    };
    write_config(&cfg.out, RunConfig::Density(cfg.clone()))?;
    write_json(
        &cfg.out.join("spec.json"),
        &serde_json::json!({
            "spec": &out.spec,
            "condition": out.condition,
            "curve_integral": out.curve_integral,
        }),
    )?;
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("density".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = out
        .points
        .iter()
        .zip(&out.values)
        .map(|(p, v)| {
            let mut row = p.clone();
            row.push(*v);
            row
        })
        .collect();
    write_text(&cfg.out.join("density.csv"), &table_csv(&header_refs, &rows))?;
    Ok(out)
}

/// Runs a resolved configuration and returns a one-paragraph summary.
pub fn run(cfg: &RunConfig) -> Result<String> {
    Ok(match cfg {
        RunConfig::Simulate(c) => {
            let files = cmd_simulate(c)?;
            format!("wrote {} files to {}", files.len(), c.out.display())
        }
        RunConfig::Estimate(c) => {
            let s = cmd_estimate(c)?;
            let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
            format!(
                "{} file(s): median H = {}, sigma = {}, upsilon* = {}, regression upsilon = {}",
                s.reports.len(),
                show(s.median_hurst),
                show(s.median_sigma),
                show(s.median_upsilon_unknown),
                show(s.median_regression)
            )
        }
        RunConfig::Sweep(c) => {
            let r = cmd_sweep(c)?;
            let mut s = String::from("estimator      n     median        q25        q75      truth\n");
            for (name, rows) in [("hurst", &r.hurst), ("sigma2", &r.sigma2), ("upsilon", &r.upsilon)] {
                for row in rows {
                    s.push_str(&format!(
                        "{name:<9} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}\n",
                        row.n, row.median, row.q25, row.q75, row.truth
                    ));
                }
            }
            s
        }
        RunConfig::Bound(c) => cmd_bound(c)?
            .iter()
            .map(BudgetTable::to_text)
            .collect::<Vec<_>>()
            .join("\n"),
        RunConfig::Procedure(c) => cmd_procedure(c)?.to_text(),
        RunConfig::Density(c) => {
            let d = cmd_density(c)?;
            let mut s = format!("{} density values, condition number {:.3e}", d.values.len(), d.condition);
            if let Some(i) = d.curve_integral {
                s.push_str(&format!(", curve integral {i:.6}"));
            }
            s
        }
    })
}
