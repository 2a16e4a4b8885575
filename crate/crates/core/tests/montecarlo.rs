use proptest::prelude::*;
use rand::Rng;
use srwpnet::interference::{udm_density, DensityQuery};
use srwpnet::model::{sample_ppp, MobilityConfig, NetworkConfig};
use srwpnet::montecarlo::{
    density_bins, edge_effect_check, empirical_ccdf, empirical_density, empirical_rates, rates_from, run_trials,
    simulate_realization, test_phi_uniform, test_psi_uniform, test_psi_uniform_with, test_zn_fit, trial_rng,
    MarginPolicy, SimConfig,
};
use srwpnet::quadrature::QuadratureSpec;
use srwpnet::rate::{coverage_probability, sir_ccdf_conditional, ServiceModel};

fn net() -> NetworkConfig {
    NetworkConfig::new(1e-6, 100.0, 3.0).unwrap()
}

fn srwp() -> MobilityConfig {
    MobilityConfig::new(12.5, 5.0, 250.0).unwrap()
}

#[test]
fn identical_across_thread_counts() {
    let sim = SimConfig::new(8000.0, 40, 42, vec![0.0, 60.0, 120.0]).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_trials(&net(), &srwp(), &sim, ServiceModel::Uim, None).unwrap())
    };
    assert_eq!(run(1), run(3));
    let other = run_trials(
        &net(),
        &srwp(),
        &SimConfig {
            seed: 43,
            ..sim.clone()
        },
        ServiceModel::Uim,
        None,
    )
    .unwrap();
    assert_ne!(run(1), other);
}

#[test]
fn lonely_drone_has_infinite_sir() {
    let sim = SimConfig {
        margin: MarginPolicy::Metres(0.0),
        ..SimConfig::new(200.0, 30, 1, vec![0.0]).unwrap()
    };
    let sparse = NetworkConfig::new(2e-5, 100.0, 3.0).unwrap();
    let runs = run_trials(&sparse, &srwp(), &sim, ServiceModel::Uim, None).unwrap();
    let lonely = runs.iter().filter(|r| r.samples[0].is_infinite()).count();
    assert!(lonely > 0);
    assert!(runs.iter().map(|r| r.redraws).sum::<u32>() > 0);
    let est = rates_from(&runs, &[0.0])[0];
    assert_eq!(est.infinite, lonely);
    assert_eq!(est.samples + est.infinite, runs.len());
    assert!(est.mean.is_finite());
}

#[test]
fn udm_serving_drone_only_approaches() {
    let m = srwp();
    let sim = SimConfig::new(5000.0, 1, 0, (0..=30).map(|i| 10.0 * i as f64).collect()).unwrap();
    for trial in 0..200 {
        let r = simulate_realization(&net(), &m, &sim, ServiceModel::Udm, &mut trial_rng(5, trial)).unwrap();
        let u_0 = (r.samples[0].serving_distance.powi(2) - 1e4).sqrt();
        for w in r.samples.windows(2) {
            assert!(w[1].serving_distance <= w[0].serving_distance);
        }
        for s in &r.samples {
            if s.t >= u_0 / m.v {
                assert_eq!(s.serving_distance, 100.0);
            }
            assert!(s.sir > 0.0 && s.interference > 0.0);
        }
    }
}

#[test]
fn static_uim_ccdf_matches_coverage() {
    let sim = SimConfig::new(50_000.0, 20_000, 3, vec![0.0]).unwrap();
    let q = QuadratureSpec::default();
    for e in empirical_ccdf(&[0.1, 1.0, 10.0], None, ServiceModel::Uim, &net(), &srwp(), &sim).unwrap() {
        let a = coverage_probability(e.gamma, 0.0, ServiceModel::Uim, &net(), &srwp(), &q).unwrap();
        assert!(
            (e.p - a).abs() < 2.0 * e.stderr,
            "γ = {}: {} ± {} vs {a}",
            e.gamma,
            e.p,
            e.stderr
        );
    }
}

#[test]
fn conditional_ccdf_matches_analytic() {
    let sim = SimConfig::new(50_000.0, 20_000, 3, vec![0.0]).unwrap();
    let e = empirical_ccdf(&[1.0], Some(500.0), ServiceModel::Uim, &net(), &srwp(), &sim).unwrap()[0];
    let a = sir_ccdf_conditional(
        1.0,
        0.0,
        500.0,
        ServiceModel::Uim,
        &net(),
        &srwp(),
        &QuadratureSpec::default(),
    )
    .unwrap();
    assert!((e.p - a).abs() < 2.0 * e.stderr, "{} ± {} vs {a}", e.p, e.stderr);
}

#[test]
fn density_step_at_time_zero() {
    let sim = SimConfig::new(1500.0, 4000, 8, vec![0.0]).unwrap();
    let edges = density_bins(1500.0, 100.0, 0.0).unwrap();
    let h = &empirical_density(500.0, &edges, &net(), &srwp(), &sim).unwrap()[0];
    for b in &h.bins {
        if b.hi <= 500.0 {
            assert_eq!(b.ratio, 0.0);
        } else {
            assert!((b.ratio - 1.0).abs() < 3.0 * b.stderr, "{b:?}");
        }
    }
}

#[test]
fn homogeneity_is_preserved() {
    let sim = SimConfig::new(3000.0, 4000, 11, vec![40.0, 170.0, 300.0]).unwrap();
    let edges = density_bins(3000.0, 250.0, 2e5).unwrap();
    for h in empirical_density(0.0, &edges, &net(), &srwp(), &sim).unwrap() {
        for b in &h.bins {
            assert!(!b.low_confidence);
            assert!((b.ratio - 1.0).abs() < 3.0 * b.stderr, "t = {}: {b:?}", h.t);
        }
    }
}

#[test]
fn density_histogram_tracks_analytic_profile() {
    let (cfg, m, q) = (net(), srwp(), QuadratureSpec::default());
    let sim = SimConfig::new(2000.0, 20_000, 17, vec![40.0]).unwrap();
    let edges = density_bins(2000.0, 250.0, 5e5).unwrap();
    let h = &empirical_density(500.0, &edges, &cfg, &m, &sim).unwrap()[0];
    for b in &h.bins {
        // Bin average of the analytic density on a fine midpoint rule.
        let k = 40;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..k {
            let u = b.lo + (b.hi - b.lo) * (i as f64 + 0.5) / k as f64;
            num += u * udm_density(&DensityQuery::new(40.0, u, 500.0).unwrap(), &cfg, &m, &q).unwrap();
            den += u;
        }
        let analytic = num / den / cfg.lambda0;
        assert!((b.ratio - analytic).abs() < 0.03, "{b:?} vs {analytic}");
    }
}

#[test]
fn uim_rate_is_stationary_and_udm_rises() {
    let sim = SimConfig::new(50_000.0, 3000, 21, vec![0.0, 60.0, 120.0]).unwrap();
    let uim = empirical_rates(ServiceModel::Uim, &net(), &srwp(), &sim).unwrap();
    for a in &uim {
        for b in &uim {
            assert!((a.mean - b.mean).abs() < 3.0 * a.stderr.hypot(b.stderr), "{a:?} {b:?}");
        }
    }
    let udm = empirical_rates(ServiceModel::Udm, &net(), &srwp(), &sim).unwrap();
    assert!(udm[2].mean - udm[0].mean > 3.0 * udm[2].stderr.hypot(udm[0].stderr));
}

#[test]
fn doubling_the_disc_moves_the_rate_by_less_than_one_stderr() {
    let sim = SimConfig::new(50_000.0, 2000, 4, vec![0.0]).unwrap();
    for c in edge_effect_check(ServiceModel::Uim, &net(), &srwp(), &sim).unwrap() {
        assert!(c.passes(), "{c:?}");
    }
}

#[test]
fn net_bearing_is_uniform() {
    let mut rng = trial_rng(1, 0);
    for n in [2, 3, 5] {
        let r = test_psi_uniform(n, 100_000, &mut rng).unwrap();
        assert!(r.p_value > 0.01, "n = {n}: {r:?}");
    }
    assert!(test_psi_uniform(1, 100_000, &mut rng).is_err());
    assert!(test_psi_uniform(2, 100, &mut rng).is_err());
}

#[test]
fn biased_bearings_are_detected() {
    let mut rng = trial_rng(1, 1);
    let r = test_psi_uniform_with(2, 100_000, &mut rng, |r| std::f64::consts::PI * r.random::<f64>()).unwrap();
    assert!(r.p_value < 0.001, "{r:?}");
}

#[test]
fn turn_angle_is_uniform() {
    let mut rng = trial_rng(1, 2);
    for n in [1, 2, 5] {
        let r = test_phi_uniform(n, 100_000, &mut rng).unwrap();
        assert!(r.p_value > 0.01, "n = {n}: {r:?}");
    }
}

#[test]
fn zn_fits() {
    let mut rng = trial_rng(2, 0);
    let z2 = test_zn_fit(2, 250.0, 100_000, &mut rng).unwrap();
    assert!(z2.statistic < z2.critical_01, "{z2:?}");
    let z50 = test_zn_fit(50, 250.0, 100_000, &mut rng).unwrap();
    assert!(z50.statistic < 0.02, "{z50:?}");
    // The truncated Rayleigh stand-in for Z_3 is off by about 0.08 in
    // sup distance, well outside sampling noise.
    let z3 = test_zn_fit(3, 250.0, 100_000, &mut rng).unwrap();
    assert!((0.06..0.1).contains(&z3.statistic), "{z3:?}");
    assert!(z3.p_value < 1e-6);
}

#[test]
fn ppp_counts_are_poisson() {
    let mut rng = trial_rng(3, 0);
    let mean = 1e-5 * std::f64::consts::PI * 1e6;
    let counts: Vec<f64> = (0..20_000)
        .map(|_| sample_ppp(1e-5, 1000.0, &mut rng).unwrap().len() as f64)
        .collect();
    let m = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    assert!((m - mean).abs() < 4.0 * (mean / 20_000.0).sqrt(), "{m} vs {mean}");
    assert!((var / mean - 1.0).abs() < 0.05, "{var} vs {mean}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bins_cover_and_respect_min_area(u_max in 100.0f64..5000.0, frac in 0.01f64..1.0, min_area in 0.0f64..1e6) {
        let width = u_max * frac;
        let edges = density_bins(u_max, width, min_area).unwrap();
        prop_assert_eq!(edges[0], 0.0);
        prop_assert_eq!(*edges.last().unwrap(), u_max);
        prop_assert!(edges.windows(2).all(|w| w[1] > w[0]));
        let total = std::f64::consts::PI * u_max * u_max;
        if total >= min_area {
            for w in edges.windows(2) {
                prop_assert!(std::f64::consts::PI * (w[1] * w[1] - w[0] * w[0]) >= min_area * (1.0 - 1e-12));
            }
        }
    }
}
