use std::f64::consts::PI;

use proptest::prelude::*;
use srwpnet::interference::{
    beta, density_branch, density_profile, displaced_mass, lambda1_direct, udm_density, uim_density, DensityBranch,
    DensityQuery,
};
use srwpnet::model::{MobilityConfig, NetworkConfig};
use srwpnet::quadrature::QuadratureSpec;

fn setup() -> (NetworkConfig, MobilityConfig, QuadratureSpec) {
    (
        NetworkConfig::new(1e-6, 100.0, 3.0).unwrap(),
        MobilityConfig::new(12.5, 5.0, 250.0).unwrap(),
        QuadratureSpec::default(),
    )
}

fn density(t: f64, u_x: f64, u_0: f64) -> f64 {
    let (cfg, m, q) = setup();
    udm_density(&DensityQuery::new(t, u_x, u_0).unwrap(), &cfg, &m, &q).unwrap()
}

#[test]
fn direct_form_complements_density() {
    let (cfg, m, q) = setup();
    let grid = [
        (15.0, 300.0),
        (27.0, 480.0),
        (40.0, 100.0),
        (40.0, 1100.0),
        (40.0, 500.0),
        (52.0, 700.0),
        (70.0, 0.0),
        (70.0, 500.0),
        (70.0, 1200.0),
        (170.0, 250.0),
        (170.0, 1900.0),
        (300.0, 800.0),
        (300.0, 4000.0),
    ];
    let mut branches = [false; 3];
    for (t, u_x) in grid {
        let b = density_branch(t, u_x, 500.0, m.v);
        branches[b as usize] = true;
        let l1 = lambda1_direct(t, u_x, 500.0, &cfg, &m, &q).unwrap();
        let lam = density(t, u_x, 500.0);
        assert!((l1 + lam - 1e-6).abs() <= 1e-9, "t = {t}, u_x = {u_x}: {l1} + {lam}");
    }
    assert!(branches.iter().all(|b| *b));
}

#[test]
fn step_at_time_zero() {
    for u_x in [0.0, 250.0, 499.9, 500.0, 500.1, 900.0] {
        assert_eq!(density(0.0, u_x, 500.0), uim_density(u_x, 500.0, 1e-6));
    }
}

#[test]
fn untouched_beyond_reach() {
    for (t, u_x) in [(40.0, 1000.0), (70.0, 1375.0), (300.0, 4250.0)] {
        assert_eq!(density(t, u_x, 500.0), 1e-6);
    }
}

#[test]
fn branch_three_before_arrival() {
    // t < u_0 / v: nothing has reached the core yet.
    assert_eq!(density(4.0, 300.0, 500.0), 0.0);
    assert_eq!(density(30.0, 100.0, 500.0), 0.0);
    assert_eq!(density_branch(30.0, 100.0, 500.0, 12.5), DensityBranch::Core);
}

#[test]
fn exclusion_mass_is_conserved() {
    for t in [40.0, 300.0] {
        let (cfg, m, q) = setup();
        let mass = displaced_mass(t, 500.0, &cfg, &m, &q).unwrap();
        let expected = 1e-6 * PI * 500.0 * 500.0;
        assert!((mass / expected - 1.0).abs() < 0.01, "t = {t}: {mass} vs {expected}");
    }
}

#[test]
fn slow_homogenisation() {
    // At t = 1000 the centre is still about 10% depleted; the 0.95 level is
    // only reached near t = 2000.
    let (_, m, q) = setup();
    let b = beta(1000.0, 0.0, 500.0, &m, &q).unwrap();
    assert!((0.88..0.93).contains(&b), "{b}");
    let late = beta(2500.0, 0.0, 500.0, &m, &q).unwrap();
    assert!(late > 0.95, "{late}");
}

#[test]
fn profile_is_parallel_map() {
    let (cfg, m, q) = setup();
    let grid: Vec<f64> = (0..12).map(|i| 125.0 * i as f64).collect();
    let p = density_profile(70.0, 500.0, &grid, &cfg, &m, &q).unwrap();
    for (u_x, r) in p.points {
        assert_eq!(r, density(70.0, u_x, 500.0) / 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn density_within_bounds(t in 0.0f64..400.0, u_x in 0.0f64..4000.0, u_0 in 0.0f64..1500.0) {
        let lam = density(t, u_x, u_0);
        prop_assert!((0.0..=1e-6 * (1.0 + 1e-6)).contains(&lam));
    }
}
