use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use fracpk::analytics::KernelScheme;
use fracpk::commands::{
    merge_config, run, table_defaults, BoundConfig, DensityConfig, EstimateConfig, ProcedureRunConfig, RunConfig,
    SimulateConfig, SweepConfig,
};
use fracpk::io::write_text;
use fracpk::{GeneratorKind, ModelParams, Result};

/// Observations shipped with the binary for `procedure --example`.
const EXAMPLE_OBSERVATIONS: &str = include_str!("../data/example_observations.csv");

#[derive(Parser)]
#[command(name = "fracpk", version, about = "Fractional one-compartment pharmacokinetic model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate concentration paths (one CSV and JSON sidecar per replicate).
    Simulate(SimulateArgs),
    /// Run every estimator on observation files.
    Estimate(EstimateArgs),
    /// Estimator convergence study over sample sizes.
    Sweep(SweepArgs),
    /// Volatility budget tables and concentration envelopes.
    Bound(BoundArgs),
    /// Iterative selection of H, β and a volatility interval from data.
    Procedure(ProcedureArgs),
    /// Finite-dimensional concentration density.
    Density(DensityArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// JSON configuration; its keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Elimination constant υ.
    #[arg(long)]
    upsilon: Option<f64>,
    /// Volatility σ.
    #[arg(long, conflicts_with = "sigma2")]
    sigma: Option<f64>,
    /// Volatility given as σ².
    #[arg(long)]
    sigma2: Option<f64>,
    /// Dose-effect exponent β in [0, 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Hurst exponent H in (1/2, 1).
    #[arg(long)]
    hurst: Option<f64>,
    /// Initial concentration C0.
    #[arg(long)]
    c0: Option<f64>,
    /// Horizon T.
    #[arg(long)]
    horizon: Option<f64>,
}

impl ModelArgs {
    fn apply(&self, mut p: ModelParams) -> ModelParams {
        if let Some(v) = self.upsilon {
            p.upsilon = v;
        }
        if let Some(v) = self.sigma {
            p.sigma = v;
        }
        if let Some(v) = self.sigma2 {
            p.sigma = v.sqrt();
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.hurst {
            p.hurst = v;
        }
        if let Some(v) = self.c0 {
            p.c0 = v;
        }
        if let Some(v) = self.horizon {
            p.horizon = v;
        }
        p
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of grid intervals.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// volterra, exact or hosking.
    #[arg(long)]
    generator: Option<GeneratorKind>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EstimateArgs {
    /// Observation CSV files with columns t and c.
    data: Vec<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    /// Known H (enables the known-parameter elimination estimate with --sigma).
    #[arg(long)]
    hurst: Option<f64>,
    /// Known σ.
    #[arg(long)]
    sigma: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    generator: Option<GeneratorKind>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TableArgs {
    /// Comma-separated concentration radii.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Comma-separated levels λ.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// adaptive, adaptive:TOL or offdiag-grid:N.
    #[arg(long)]
    scheme: Option<KernelScheme>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated Hurst exponents, one table each.
    #[arg(long, value_delimiter = ',')]
    hurst_values: Option<Vec<f64>>,
    #[command(flatten)]
    table: TableArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ProcedureArgs {
    /// Observation CSV; the bundled example when omitted.
    data: Option<PathBuf>,
    #[arg(long)]
    h_init: Option<f64>,
    #[arg(long)]
    beta_init: Option<f64>,
    /// Level λ of the recommendation.
    #[arg(long)]
    lambda: Option<f64>,
    /// Known elimination constant (otherwise estimated by regression).
    #[arg(long)]
    upsilon: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Concentration radius replacing the observed one.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Keep β fixed.
    #[arg(long)]
    fixed_beta: bool,
    #[command(flatten)]
    table: TableArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated observation times.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// CSV of query points, one column per time.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Cells of the one-dimensional curve.
    #[arg(long)]
    cells: Option<usize>,
    /// Right end of the one-dimensional curve.
    #[arg(long)]
    upper: Option<f64>,
    #[arg(long)]
    scheme: Option<KernelScheme>,
    #[command(flatten)]
    common: Common,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn finish<T: Serialize + DeserializeOwned>(cfg: T, common: &Common) -> Result<T> {
    match &common.config {
        Some(path) => merge_config(&cfg, path),
        None => Ok(cfg),
    }
}

fn resolve(command: Command) -> Result<RunConfig> {
    Ok(match command {
        Command::Simulate(a) => {
            let mut c = SimulateConfig {
                out: a.common.out.clone(),
                ..Default::default()
            };
            c.params = a.model.apply(c.params);
            set(&mut c.n, a.n);
            set(&mut c.seed, a.seed);
            set(&mut c.replicates, a.replicates);
            set(&mut c.generator, a.generator);
            RunConfig::Simulate(finish(c, &a.common)?)
        }
        Command::Estimate(a) => {
            let mut c = EstimateConfig {
                data: a.data,
                out: a.common.out.clone(),
                hurst: a.hurst,
                sigma: a.sigma,
                ..Default::default()
            };
            set(&mut c.beta, a.beta);
            RunConfig::Estimate(finish(c, &a.common)?)
        }
        Command::Sweep(a) => {
            let mut c = SweepConfig {
                out: a.common.out.clone(),
                ..Default::default()
            };
            c.params = a.model.apply(c.params);
            set(&mut c.ns, a.ns);
            set(&mut c.seed, a.seed);
            set(&mut c.replicates, a.replicates);
            set(&mut c.generator, a.generator);
            RunConfig::Sweep(finish(c, &a.common)?)
        }
        Command::Bound(a) => {
            let mut c = BoundConfig {
                params: a.model.apply(table_defaults()),
                out: a.common.out.clone(),
                ..Default::default()
            };
            set(&mut c.hurst_values, a.hurst_values);
            set(&mut c.table.radius_grid, a.table.radii);
            set(&mut c.table.lambda_grid, a.table.lambdas);
            set(&mut c.table.scheme, a.table.scheme);
            RunConfig::Bound(finish(c, &a.common)?)
        }
        Command::Procedure(a) => {
            let data = match a.data {
                Some(d) => d,
                None => {
                    let path = a.common.out.join("example_observations.csv");
                    write_text(&path, EXAMPLE_OBSERVATIONS)?;
                    path
                }
            };
            let mut c = ProcedureRunConfig {
                data,
                out: a.common.out.clone(),
                ..Default::default()
            };
            let p = &mut c.procedure;
            set(&mut p.h_init, a.h_init);
            set(&mut p.beta_init, a.beta_init);
            set(&mut p.lambda, a.lambda);
            set(&mut p.max_iterations, a.max_iterations);
            set(&mut p.radius_grid, a.table.radii);
            set(&mut p.lambda_grid, a.table.lambdas);
            set(&mut p.scheme, a.table.scheme);
            p.upsilon = a.upsilon.or(p.upsilon);
            p.c0 = a.c0.or(p.c0);
            p.horizon = a.horizon.or(p.horizon);
            p.radius = a.radius.or(p.radius);
            p.adjust_beta = !a.fixed_beta;
            RunConfig::Procedure(finish(c, &a.common)?)
        }
        Command::Density(a) => {
            let mut c = DensityConfig {
                out: a.common.out.clone(),
                points: a.points,
                upper: a.upper,
                ..Default::default()
            };
            c.params = a.model.apply(c.params);
            set(&mut c.times, a.times);
            set(&mut c.cells, a.cells);
            set(&mut c.scheme, a.scheme);
            RunConfig::Density(finish(c, &a.common)?)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(cli.command).and_then(|cfg| run(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
