//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion at its
//! stated tolerance and exits non-zero when any criterion fails.

mod common;

use common::{map_paths, mean, median, slope, variance, Verdict};
use fracpk::analytics::{
    borell_deviation_bound, build_gaussian_spec, r_h_theta, sigma_budget, BudgetQuery, DensityEvaluator,
    KernelScheme,
};
use fracpk::commands::{cmd_bound, sweep_estimates, table_defaults, BoundConfig};
use fracpk::estimation::{ergodic_moment, hurst_hat, regression_upsilon, ObservationSet};
use fracpk::fbm::{FbmSampler, GeneratorKind, VolterraFbm};
use fracpk::model::{deterministic_solution, simulate_concentration, weighted_wiener_integral};
use fracpk::procedure::{budget_table, ProcedureConfig};
use fracpk::quadrature::{integrate, QuadOptions};
use fracpk::{fbm_covariance, Error, ModelParams, ProcessBundle, Seed};

/// Published budget arrays, rows x^{γ+1} ∈ {0.1, 0.2, 0.4}, columns λ ∈ {0.01, 0.05, 0.10}.
const TABLE_H09: [[f64; 3]; 3] = [[0.26, 0.38, 0.46], [0.30, 0.43, 0.53], [0.36, 0.50, 0.61]];
const TABLE_H06: [[f64; 3]; 3] = [[0.70, 1.00, 1.23], [0.80, 1.15, 1.42], [0.92, 1.32, 1.63]];

fn max_table_deviation(values: &[Vec<f64>], expected: &[[f64; 3]; 3]) -> f64 {
    let mut worst: f64 = 0.0;
    for (row, exp) in values.iter().zip(expected) {
        for (v, e) in row.iter().zip(exp) {
            worst = worst.max((v - e).abs());
        }
    }
    worst
}

fn simulation_defaults() -> ModelParams {
    ModelParams::simulation_defaults()
}

fn criterion_1_budget_tables() -> Vec<Verdict> {
    let mut out = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let cfg = BoundConfig {
        out: dir.path().to_path_buf(),
        ..Default::default()
    };
    let tables = cmd_bound(&cfg).unwrap();
    assert_eq!(tables.len(), 2);
    let dev09 = max_table_deviation(&tables[0].values, &TABLE_H09);
    let dev06 = max_table_deviation(&tables[1].values, &TABLE_H06);
    for t in &tables {
        println!("{}", t.to_text());
    }

    // The published arrays are reproduced by an off-diagonal grid rule for
    // the kernel; this line is informational and does not gate the criterion.
    let grid_cfg = ProcedureConfig {
        scheme: KernelScheme::OffDiagonalGrid { points: 500 },
        ..Default::default()
    };
    let p = table_defaults();
    let g09 = max_table_deviation(&budget_table(0.9, &p, &grid_cfg).unwrap().values, &TABLE_H09);
    let g06 = max_table_deviation(&budget_table(0.6, &p, &grid_cfg).unwrap().values, &TABLE_H06);
    println!("note: off-diagonal grid kernel (500 points) max deviation H=0.9 {g09:.4}, H=0.6 {g06:.4}");

    let pass = dev09 <= 0.02 && dev06 <= 0.02;
    out.push(Verdict::new(
        "criterion 1 (budget tables within 0.02)",
        pass,
        &format!("max |M - printed| H=0.9 {dev09:.4}, H=0.6 {dev06:.4}"),
    ));
    out
}

fn criterion_2_weighted_integral_variance() -> Vec<Verdict> {
    let mut out = Vec::new();
    let mut pass = true;
    let mut details = Vec::new();
    for h in [0.6, 0.9] {
        let p = table_defaults().with_hurst(h).unwrap();
        let sampler = FbmSampler::new(GeneratorKind::Exact, h, p.horizon, 2048).unwrap();
        let terminal = map_paths(&sampler, 20, 20_000, |bh| weighted_wiener_integral(bh, &p).unwrap().last());
        let n = terminal.len() as f64;
        let var = variance(&terminal);
        let exact = r_h_theta(p.horizon, p.horizon, &p).unwrap();
        let se = var * (2.0 / (n - 1.0)).sqrt();
        let z = (var - exact) / se;
        pass &= z.abs() <= 3.0;
        details.push(format!("H={h}: MC {var:.6} vs kernel {exact:.6} ({z:+.2} SE)"));
    }
    out.push(Verdict::new("criterion 2 (weighted integral variance, 3 SE)", pass, &details.join("; ")));
    out
}

fn criterion_3_generator_validity() -> Vec<Verdict> {
    let mut out = Vec::new();
    // exact generator: 8-point covariance
    let (h, horizon) = (0.7, 2.0);
    let sampler = FbmSampler::new(GeneratorKind::Exact, h, horizon, 8).unwrap();
    let grid = sampler.grid();
    let paths = map_paths(&sampler, 30, 20_000, |bh| bh.values[1..].to_vec());
    let n = paths.len() as f64;
    let mut worst_z: f64 = 0.0;
    for i in 0..8 {
        for j in 0..=i {
            let exact = fbm_covariance(grid.time(i + 1), grid.time(j + 1), h).unwrap();
            let cii = fbm_covariance(grid.time(i + 1), grid.time(i + 1), h).unwrap();
            let cjj = fbm_covariance(grid.time(j + 1), grid.time(j + 1), h).unwrap();
            let emp = paths.iter().map(|v| v[i] * v[j]).sum::<f64>() / n;
            let se = ((cii * cjj + exact * exact) / n).sqrt();
            worst_z = worst_z.max(((emp - exact) / se).abs());
        }
    }
    let exact_pass = worst_z <= 3.0;
    out.push(Verdict::new(
        "criterion 3a (exact generator covariance, 3 SE)",
        exact_pass,
        &format!("worst entry {worst_z:.2} SE over 36 entries"),
    ));

    // Volterra scheme: terminal variance against T^{2H}
    let (h, horizon, n) = (0.9, 1.0, 256);
    let volterra = VolterraFbm::new(h, horizon, n).unwrap();
    let terminal: Vec<f64> = Seed::replicates(31, 20_000)
        .into_iter()
        .map(|s| volterra.sample(s).last())
        .collect();
    let var = variance(&terminal);
    let target = horizon.powf(2.0 * h);
    let rel = var / target - 1.0;
    let volterra_pass = rel.abs() <= 0.05;
    out.push(Verdict::new(
        "criterion 3b (Volterra terminal variance within 5% of T^2H)",
        volterra_pass,
        &format!(
            "MC {var:.4}, scheme variance {:.4}, target {target:.4} ({:+.1}%)",
            volterra.variance_at(n),
            100.0 * rel
        ),
    ));
    out
}

fn criterion_4_borell_bound_validity() -> Vec<Verdict> {
    let mut out = Vec::new();
    let p = simulation_defaults().with_horizon(2.0).unwrap();
    let sampler = FbmSampler::new(GeneratorKind::Exact, p.hurst, p.horizon, 1000).unwrap();
    let (xdet, _) = deterministic_solution(&p, sampler.grid()).unwrap();
    let sups = map_paths(&sampler, 40, 10_000, |bh| {
        let b = ProcessBundle::from_fbm(&p, bh.clone()).unwrap();
        b.x.values
            .iter()
            .zip(&xdet.values)
            .map(|(x, d)| (x - d).abs())
            .fold(0.0, f64::max)
    });
    let n = sups.len() as f64;
    let mut pass = true;
    let mut details = Vec::new();
    for x in [0.5, 1.0, 1.5] {
        let freq = sups.iter().filter(|&&s| s > x).count() as f64 / n;
        let bound = borell_deviation_bound(x, p.horizon, &p).unwrap();
        let se = (bound * (1.0 - bound) / n).sqrt();
        pass &= freq <= bound + 3.0 * se;
        details.push(format!("x={x}: freq {freq:.4} <= bound {bound:.4}"));
    }
    out.push(Verdict::new("criterion 4 (Borell bound validity)", pass, &details.join("; ")));
    out
}

fn criterion_5_ergodic_moments() -> Vec<Verdict> {
    let mut out = Vec::new();
    let p = simulation_defaults().with_horizon(200.0).unwrap();
    let sampler = FbmSampler::new(GeneratorKind::Hosking, p.hurst, p.horizon, 20_000).unwrap();
    let averages = map_paths(&sampler, 50, 50, |bh| {
        let b = ProcessBundle::from_fbm(&p, bh.clone()).unwrap();
        let t = p.horizon;
        (b.x.trapezoid(|v| v * v) / t, b.x.trapezoid(|v| v * v * v) / t)
    });
    let second: Vec<f64> = averages.iter().map(|a| a.0).collect();
    let third: Vec<f64> = averages.iter().map(|a| a.1).collect();
    let target = ergodic_moment(2, &p).unwrap();
    let med = median(&second);
    let rel = med / target - 1.0;
    let second_pass = rel.abs() <= 0.05;
    let m3 = mean(&third);
    let se3 = (variance(&third) / third.len() as f64).sqrt();
    let third_pass = m3.abs() <= 3.0 * se3;
    out.push(Verdict::new(
        "criterion 5a (time average of X^2 within 5%, median of 50 seeds)",
        second_pass,
        &format!("median {med:.5}, mean {:.5}, stationary moment {target:.5} ({:+.1}%)", mean(&second), 100.0 * rel),
    ));
    out.push(Verdict::new(
        "criterion 5b (time average of X^3 within 3 SE of 0)",
        third_pass,
        &format!("mean {m3:.5}, SE {se3:.5}"),
    ));
    out
}

fn criterion_6_estimator_consistency() -> Vec<Verdict> {
    let mut out = Vec::new();
    let p = simulation_defaults();
    let seeds = Seed::replicates(60, 100);
    let large = sweep_estimates(&p, 1000, &seeds, GeneratorKind::Hosking).unwrap();
    let small = sweep_estimates(&p, 100, &seeds, GeneratorKind::Hosking).unwrap();
    let truths = [p.hurst, p.sigma * p.sigma, p.upsilon];
    let column = |est: &[[Option<f64>; 3]], k: usize| -> Vec<f64> { est.iter().filter_map(|e| e[k]).collect() };
    // failed replicates count as infinite error
    let mae = |est: &[[Option<f64>; 3]], k: usize| -> f64 {
        let errs: Vec<f64> = est
            .iter()
            .map(|e| e[k].map_or(f64::INFINITY, |v| (v - truths[k]).abs()))
            .collect();
        median(&errs)
    };
    let med = |k: usize| median(&column(&large, k));
    let (h, s2, u) = (med(0), med(1), med(2));
    let h_ok = (0.85..=0.95).contains(&h);
    let s_ok = (s2 / truths[1] - 1.0).abs() <= 0.20;
    let u_ok = (u / truths[2] - 1.0).abs() <= 0.30;
    let mut decreasing = true;
    let mut mae_text = Vec::new();
    for (k, name) in ["H", "sigma^2", "upsilon"].iter().enumerate() {
        let (a, b) = (mae(&small, k), mae(&large, k));
        decreasing &= b < a;
        mae_text.push(format!("{name} {a:.4}->{b:.4}"));
    }
    let pass = h_ok && s_ok && u_ok && decreasing;
    out.push(Verdict::new(
        "criterion 6 (estimator consistency)",
        pass,
        &format!(
            "n=1000 medians H {h:.4}, sigma^2 {s2:.4}, upsilon {u:.4}; median abs error n=100->1000: {}",
            mae_text.join(", ")
        ),
    ));
    out
}

fn folded_normal(x: f64, mean: f64, var: f64) -> f64 {
    let s = var.sqrt();
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (phi((x - mean) / s) + phi((x + mean) / s)) / s
}

fn criterion_7_density() -> Vec<Verdict> {
    let mut out = Vec::new();
    let p = simulation_defaults();
    let spec1 = build_gaussian_spec(&[1.0], &p).unwrap();
    let eval1 = DensityEvaluator::new(&spec1, 0.0).unwrap();
    let (v, r) = (spec1.mean[0], spec1.covariance[(0, 0)]);
    let mut worst: f64 = 0.0;
    for i in 1..=400 {
        let x = i as f64 * 0.01;
        worst = worst.max((eval1.evaluate(&[x]).unwrap() - folded_normal(x, v, r)).abs());
    }
    let upper1 = v.abs() + 12.0 * r.sqrt();
    let total1 = integrate(|x| eval1.evaluate(&[x]).unwrap(), 0.0, upper1, QuadOptions::relative(1e-10))
        .unwrap()
        .value;

    let spec2 = build_gaussian_spec(&[1.0, 2.0], &p).unwrap();
    let eval2 = DensityEvaluator::new(&spec2, 0.0).unwrap();
    let u = |i: usize| spec2.mean[i].abs() + 10.0 * spec2.covariance[(i, i)].sqrt();
    let (u1, u2) = (u(0), u(1));
    let opts = QuadOptions::relative(1e-8);
    let total2 = integrate(
        |x1| {
            integrate(|x2| eval2.evaluate(&[x1, x2]).unwrap(), 0.0, u2, opts)
                .unwrap()
                .value
        },
        0.0,
        u1,
        opts,
    )
    .unwrap()
    .value;
    let pass = worst <= 1e-8 && (total1 - 1.0).abs() <= 1e-3 && (total2 - 1.0).abs() <= 1e-3;
    out.push(Verdict::new(
        "criterion 7 (density oracle and normalization)",
        pass,
        &format!("max |chi_1 - folded normal| {worst:.2e}; integrals n=1 {total1:.8}, n=2 {total2:.8}"),
    ));
    out
}

fn criterion_8_degenerate_inputs() -> Vec<Verdict> {
    let mut out = Vec::new();
    let affine: Vec<f64> = (0..50).map(|i| 2.0 - 0.03 * i as f64).collect();
    let affine_ok = matches!(hurst_hat(&affine), Err(Error::DegenerateInput(_)));

    let p = simulation_defaults().with_sigma(0.0).unwrap();
    let b = simulate_concentration(&p, 200, Seed::new(80), GeneratorKind::Exact).unwrap();
    let (xdet, cdet) = deterministic_solution(&p, b.grid).unwrap();
    let deterministic_ok = b.x.values == xdet.values && b.c.values == cdet.values;

    let mut inversion_worst: f64 = 0.0;
    let tp = table_defaults();
    for lambda in [0.01, 0.05, 0.10] {
        for x in [0.1f64.powf(0.1), 0.2f64.powf(0.1), 0.4f64.powf(0.1)] {
            let m = sigma_budget(&BudgetQuery {
                lambda,
                x,
                horizon: tp.horizon,
                params: tp,
            })
            .unwrap();
            let back = borell_deviation_bound(x, tp.horizon, &tp.with_sigma(m.sqrt()).unwrap()).unwrap();
            inversion_worst = inversion_worst.max((back / lambda - 1.0).abs());
        }
    }
    let inversion_ok = inversion_worst <= 1e-12;

    let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.075).collect();
    let conc: Vec<f64> = times.iter().map(|t| 1.7 * (-1.5 * t).exp()).collect();
    let obs = ObservationSet::new(times, conc, 0.0).unwrap();
    let reg = regression_upsilon(&obs).unwrap();
    let regression_ok = (reg.estimate - 1.5).abs() <= 1e-12;

    let pass = affine_ok && deterministic_ok && inversion_ok && regression_ok;
    out.push(Verdict::new(
        "criterion 8 (degenerate-input suite)",
        pass,
        &format!(
            "affine rejected {affine_ok}; sigma=0 exact {deterministic_ok}; budget inversion rel err {inversion_worst:.1e}; regression error {:.1e}",
            (reg.estimate - 1.5).abs()
        ),
    ));
    out
}

fn criterion_9_discretization_bridge() -> Vec<Verdict> {
    let mut out = Vec::new();
    // The integral uses a sub-grid twice as fine as the observation grid.
    const REFINE: usize = 2;
    let base = simulation_defaults();
    let mut log_delta = Vec::new();
    let mut log_gap = Vec::new();
    let mut details = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let delta = 1.0 / (n as f64).sqrt();
        let p = base.with_horizon(n as f64 * delta).unwrap();
        let sampler = FbmSampler::new(GeneratorKind::Hosking, p.hurst, p.horizon, REFINE * n).unwrap();
        let gaps = map_paths(&sampler, 90, 100, |bh| {
            let b = ProcessBundle::from_fbm(&p, bh.clone()).unwrap();
            let integral = b.x.trapezoid(|v| v * v) / p.horizon;
            let discrete = (0..n).map(|k| b.x.values[REFINE * k].powi(2)).sum::<f64>() / n as f64;
            (integral - discrete).abs()
        });
        let g = mean(&gaps);
        details.push(format!("n={n} gap {g:.3e}"));
        log_delta.push(delta.ln());
        log_gap.push(g.ln());
    }
    let s = slope(&log_delta, &log_gap);
    let pass = (s - base.hurst).abs() <= 0.2;
    out.push(Verdict::new(
        "criterion 9 (gap slope within 0.2 of H)",
        pass,
        &format!("{}; log-log slope {s:.3}", details.join(", ")),
    ));
    out
}

type Criterion = fn() -> Vec<Verdict>;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("criterion 1", criterion_1_budget_tables),
        ("criterion 2", criterion_2_weighted_integral_variance),
        ("criterion 3", criterion_3_generator_validity),
        ("criterion 4", criterion_4_borell_bound_validity),
        ("criterion 5", criterion_5_ergodic_moments),
        ("criterion 6", criterion_6_estimator_consistency),
        ("criterion 7", criterion_7_density),
        ("criterion 8", criterion_8_degenerate_inputs),
        ("criterion 9", criterion_9_discretization_bridge),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let verdicts = std::panic::catch_unwind(run)
            .unwrap_or_else(|_| vec![Verdict::new(name, false, "panicked before reaching a verdict")]);
        for v in verdicts {
            println!("{v}");
            failed += usize::from(!v.pass);
        }
    }
    println!("acceptance: {failed} failing line(s)");
    if failed > 0 {
        std::process::exit(1);
    }
}
