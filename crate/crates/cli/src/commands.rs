//! The four subcommands. Each renders its artifact into memory so callers
//! decide where it goes.

use serde::Serialize;
use srwpnet::displacement::{displacement_distribution, ln_cdf, ln_pdf, InFlightLaw, ZnDistribution};
use srwpnet::interference::{density_profile, displaced_mass, lambda1_direct, udm_density, DensityQuery};
use srwpnet::mobility::{phase_at, PhaseKind};
use srwpnet::montecarlo::{
    empirical_density, empirical_rates, run_trials, test_phi_uniform, test_psi_uniform, test_zn_fit, trial_rng,
};
use srwpnet::rate::{average_rate_udm, average_rate_uim, rate_curve, ServiceModel};

use crate::config::{Profile, RunConfig};
use crate::CliError;

/// Bytes to emit and whether the command's checks passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: Vec<u8>,
    pub passed: bool,
}

impl Outcome {
    fn ok(output: Vec<u8>) -> Self {
        Self { output, passed: true }
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Histogram edges halfway between grid points, so bin `i` holds point `i`.
pub fn bin_edges(grid: &[f64]) -> Vec<f64> {
    match grid {
        [] => Vec::new(),
        [x] => vec![(x - 0.5).max(0.0), x + 0.5],
        _ => {
            let n = grid.len();
            let mut edges = Vec::with_capacity(n + 1);
            edges.push((grid[0] - 0.5 * (grid[1] - grid[0])).max(0.0));
            edges.extend(grid.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            edges.push(grid[n - 1] + 0.5 * (grid[n - 1] - grid[n - 2]));
            edges
        }
    }
}

/// `t,u_x,lambda_ratio_analytic[,lambda_ratio_mc,mc_stderr]`.
pub fn cmd_density(cfg: &RunConfig, mc: bool) -> Result<Outcome, CliError> {
    let times = cfg.run.times.points();
    let grid = cfg.run.u_x.points();
    let u_0 = cfg.run.u_0;
    let mut w = csv_writer();
    let mut header = vec!["t", "u_x", "lambda_ratio_analytic"];
    if mc {
        header.extend(["lambda_ratio_mc", "mc_stderr"]);
    }
    w.write_record(&header)?;
    let histograms = if mc {
        let edges = bin_edges(grid);
        let sim = srwpnet::montecarlo::SimConfig {
            r_obs: *edges.last().expect("grid validated non-empty"),
            ..cfg.sim_config(times.to_vec())
        };
        Some(empirical_density(u_0, &edges, &cfg.network, &cfg.mobility, &sim)?)
    } else {
        None
    };
    for (j, &t) in times.iter().enumerate() {
        let profile = density_profile(t, u_0, grid, &cfg.network, &cfg.mobility, &cfg.quad)?;
        for (i, (u_x, ratio)) in profile.points.into_iter().enumerate() {
            let mut row = vec![num(t), num(u_x), num(ratio)];
            if let Some(h) = &histograms {
                let b = h[j].bins[i];
                row.extend([num(b.ratio), num(b.stderr)]);
            }
            w.write_record(&row)?;
        }
    }
    Ok(Outcome::ok(finish(w)?))
}

/// `t,model,rate,units,h[,rate_mc,mc_stderr]`, one block per altitude and
/// model.
pub fn cmd_rate(cfg: &RunConfig, mc: bool) -> Result<Outcome, CliError> {
    let times = cfg.run.times.points();
    let units = cfg.run.units;
    let mut w = csv_writer();
    let mut header = vec!["t", "model", "rate", "units", "h"];
    if mc {
        header.extend(["rate_mc", "mc_stderr"]);
    }
    w.write_record(&header)?;
    for net in cfg.networks() {
        for &model in cfg.run.model.models() {
            let curve = rate_curve(model, times, &net, &cfg.mobility, &cfg.quad)?;
            let sampled = if mc {
                Some(empirical_rates(
                    model,
                    &net,
                    &cfg.mobility,
                    &cfg.sim_config(times.to_vec()),
                )?)
            } else {
                None
            };
            for (j, (t, r)) in curve.points.into_iter().enumerate() {
                let mut row = vec![
                    num(t),
                    model.to_string(),
                    num(units.convert(r)),
                    units.name().to_string(),
                    num(net.h),
                ];
                if let Some(s) = &sampled {
                    row.extend([num(units.convert(s[j].mean)), num(units.convert(s[j].stderr))]);
                }
                w.write_record(&row)?;
            }
        }
    }
    Ok(Outcome::ok(finish(w)?))
}

/// Raw SIR records: `model,trial,t,sir,serving_distance,interference`.
/// Zero-interference draws appear with `sir = inf`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let times = cfg.run.times.points();
    let sim = cfg.sim_config(times.to_vec());
    let mut w = csv_writer();
    w.write_record(["model", "trial", "t", "sir", "serving_distance", "interference"])?;
    for &model in cfg.run.model.models() {
        let runs = run_trials(&cfg.network, &cfg.mobility, &sim, model, None)?;
        for (trial, r) in runs.iter().enumerate() {
            for s in &r.samples {
                w.write_record([
                    model.to_string(),
                    trial.to_string(),
                    num(s.t),
                    num(s.sir),
                    num(s.serving_distance),
                    num(s.interference),
                ])?;
            }
        }
    }
    Ok(Outcome::ok(finish(w)?))
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn below(test: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            test: test.into(),
            statistic,
            threshold,
            pass: statistic < threshold,
        }
    }

    fn above(test: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            test: test.into(),
            statistic,
            threshold,
            pass: statistic > threshold,
        }
    }
}

/// Sample counts of the validation suite.
struct Budget {
    angle_samples: usize,
    ks_samples: usize,
    rate_trials: usize,
}

impl Budget {
    fn for_profile(profile: Profile, trials: usize) -> Self {
        match profile {
            Profile::Fast => Budget {
                angle_samples: 100_000,
                ks_samples: 100_000,
                rate_trials: trials.min(20_000),
            },
            Profile::Full => Budget {
                angle_samples: 1_000_000,
                ks_samples: 1_000_000,
                rate_trials: trials,
            },
        }
    }
}

/// Runs the invariant suites and reports each as a [`Check`].
pub fn validation_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let budget = Budget::for_profile(cfg.run.profile, cfg.sim.trials);
    let (net, m, q) = (&cfg.network, &cfg.mobility, &cfg.quad);
    let seed = cfg.sim.seed;
    let mut checks = Vec::new();

    // Net bearing and turn angle uniformity.
    for (k, n) in [2u32, 3, 5].into_iter().enumerate() {
        let r = test_psi_uniform(n, budget.angle_samples, &mut trial_rng(seed, k as u64))?;
        checks.push(Check::above(format!("psi_uniform_n{n}_p_value"), r.p_value, 0.01));
    }
    let r = test_phi_uniform(3, budget.angle_samples, &mut trial_rng(seed, 3))?;
    checks.push(Check::above("phi_uniform_n3_p_value", r.p_value, 0.01));

    // Z_n against its closed form.
    let z2 = test_zn_fit(2, m.s, budget.ks_samples, &mut trial_rng(seed, 10))?;
    checks.push(Check::below("z2_ks_distance", z2.statistic, z2.critical_01));
    let z50 = test_zn_fit(50, m.s, budget.ks_samples, &mut trial_rng(seed, 11))?;
    checks.push(Check::below("z50_ks_distance", z50.statistic, 0.02));
    let z3 = test_zn_fit(3, m.s, budget.ks_samples, &mut trial_rng(seed, 12))?;
    checks.push(Check::below("z3_ks_distance", z3.statistic, 0.05));

    // Normalisation of the displacement law over several cycles.
    let horizon = 16.0 * m.cycle();
    let mut worst: f64 = 0.0;
    for i in 0..=160 {
        let dist = displacement_distribution(horizon * i as f64 / 160.0, m)?;
        worst = worst.max((dist.total_mass(q)? - 1.0).abs());
    }
    checks.push(Check::below("displacement_normalisation_max_error", worst, 1e-4));

    // In-flight density against a central difference of the CDF.
    let fine = q.tightened(100.0);
    let mut worst: f64 = 0.0;
    for n in [1u32, 2, 3, 6] {
        for frac in [0.2, 0.5, 0.8] {
            let d = frac * m.s;
            let t = n as f64 * m.cycle() + m.w + d / m.v;
            let PhaseKind::Flight { d } = phase_at(m, t)?.kind else {
                continue;
            };
            let law = InFlightLaw::new(ZnDistribution::new(n, m.s)?, d)?;
            let (lo, hi) = law.support();
            let kinks = law.breakpoints();
            for i in 1..10 {
                let l = lo + (hi - lo) * i as f64 / 10.0;
                if kinks.iter().any(|k| (k - l).abs() < 0.02 * m.s) {
                    continue;
                }
                let h = 1e-4 * m.s;
                let fd = (ln_cdf(l + h, t, m, &fine)? - ln_cdf(l - h, t, m, &fine)?) / (2.0 * h);
                let p = ln_pdf(l, t, m, q)?;
                worst = worst.max((fd - p).abs() / p.max(1e-300));
            }
        }
    }
    checks.push(Check::below("ln_pdf_finite_difference_max_rel_error", worst, 1e-3));

    // Exclusion-zone mass.
    let u_0 = cfg.run.u_0;
    for t in [40.0, 300.0] {
        let mass = displaced_mass(t, u_0, net, m, q)?;
        let expected = net.lambda0 * std::f64::consts::PI * u_0 * u_0;
        checks.push(Check::below(
            format!("exclusion_mass_rel_error_t{t}"),
            (mass / expected - 1.0).abs(),
            0.01,
        ));
    }

    // Direct interferer density against the complement form.
    let mut worst: f64 = 0.0;
    for (t, u_x) in branch_grid(u_0, m.v) {
        let direct = lambda1_direct(t, u_x, u_0, net, m, q)?;
        let lam = udm_density(&DensityQuery::new(t, u_x, u_0)?, net, m, q)?;
        worst = worst.max((direct + lam - net.lambda0).abs() / net.lambda0);
    }
    checks.push(Check::below("direct_density_complement_max_rel_error", worst, 1e-3));

    // Rates.
    let uim = average_rate_uim(net, q)?;
    let udm0 = average_rate_udm(0.0, net, m, q)?;
    checks.push(Check::below("udm_t0_vs_uim_rel_error", (udm0 / uim - 1.0).abs(), 1e-4));
    let sim = srwpnet::montecarlo::SimConfig {
        trials: budget.rate_trials,
        ..cfg.sim_config(vec![0.0])
    };
    let mc = empirical_rates(ServiceModel::Uim, net, m, &sim)?[0];
    checks.push(Check::below("uim_rate_mc_rel_error", (mc.mean / uim - 1.0).abs(), 0.03));
    Ok(checks)
}

/// `(t, u_x)` pairs covering every branch of the UDM density for the given
/// exclusion radius and speed.
pub fn branch_grid(u_0: f64, v: f64) -> Vec<(f64, f64)> {
    let t_reach = u_0 / v;
    let mut pts = Vec::new();
    for f in [0.3, 0.8, 1.4, 3.4, 7.5] {
        let t = f * t_reach;
        let reach = v * t;
        for u_x in [0.25 * u_0, u_0, 0.5 * (u_0 + reach) + 0.25 * u_0, u_0 + reach + 100.0] {
            pts.push((t, u_x));
        }
    }
    pts
}

/// JSON array of `{test, statistic, threshold, pass}`; passes iff every
/// check does.
pub fn cmd_validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let checks = validation_checks(cfg)?;
    let passed = checks.iter().all(|c| c.pass);
    let mut output = serde_json::to_vec_pretty(&checks).map_err(|e| CliError::Output(e.to_string()))?;
    output.push(b'\n');
    Ok(Outcome { output, passed })
}
