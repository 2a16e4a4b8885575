//! Density of the interfering drones seen by the typical user.
//!
//! Under UIM the interferers are the drones beyond the current serving
//! distance. Under UDM the initial exclusion disc b(o′, u0) is gradually
//! refilled by interferers that started outside it; β is the fraction of
//! the density at distance `u_x` made up of such drones.

use std::f64::consts::FRAC_1_PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::displacement::{clamped_acos, displacement_distribution, DisplacementDistribution};
use crate::error::{Error, Result};
use crate::model::{MobilityConfig, NetworkConfig};
use crate::quadrature::{try_integrate_near_singular, try_integrate_with_breakpoints, QuadratureSpec};

/// Raw β outside [−TOL, 1 + TOL] signals a numerical failure.
const BETA_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityQuery {
    pub t: f64,
    pub u_x: f64,
    pub u_0: f64,
}

impl DensityQuery {
    pub fn new(t: f64, u_x: f64, u_0: f64) -> Result<Self> {
        let q = Self { t, u_x, u_0 };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("t", self.t), ("u_x", self.u_x), ("u_0", self.u_0)] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::Domain(format!(
                    "{name} must be non-negative and finite, got {x}"
                )));
            }
        }
        Ok(())
    }
}

/// Normalised density λ/λ0 tabulated over a `u_x` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub t: f64,
    pub u_0: f64,
    /// `(u_x, λ/λ0)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// UIM interferer density: λ0 beyond the current serving distance, zero
/// on and inside it.
pub fn uim_density(u_x: f64, u0_t: f64, lambda0: f64) -> f64 {
    if u_x > u0_t {
        lambda0
    } else {
        0.0
    }
}

/// (1/π) arccos((l² + u_x² − u_0²)/(2 l u_x)): the chance that a drone at
/// distance `l` from its start, in a uniform direction, lands within `u_0`
/// of o′ when it started `u_x` away from it.
pub(crate) fn angular_share(l: f64, u_x: f64, u_0: f64) -> f64 {
    FRAC_1_PI * clamped_acos((l * l + u_x * u_x - u_0 * u_0) / (2.0 * l * u_x))
}

/// β(t, u_x, u_0): probability that a drone now at distance `u_x` from o′
/// started outside the exclusion disc, i.e. λ/λ0 inside the refilled
/// region.
pub fn beta(t: f64, u_x: f64, u_0: f64, mobility: &MobilityConfig, spec: &QuadratureSpec) -> Result<f64> {
    DensityQuery::new(t, u_x, u_0)?;
    let dist = displacement_distribution(t, mobility)?;
    beta_with(&dist, u_x, u_0, mobility.v * t, spec)
}

pub(crate) fn beta_with(
    dist: &DisplacementDistribution,
    u_x: f64,
    u_0: f64,
    reach: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut raw = 1.0 - dist.cdf(u_0 - u_x, spec)?;
    let lo = (u_x - u_0).abs();
    let hi = reach.min(u_x + u_0);
    if hi > lo && u_x > 0.0 {
        for atom in &dist.atoms {
            if atom.location > lo && atom.location < hi {
                raw -= atom.mass * angular_share(atom.location, u_x, u_0);
            }
        }
        raw -= dist.integrate_continuous(|l| Ok(angular_share(l, u_x, u_0)), lo, hi, &[], spec)?;
    }
    if !(-BETA_TOLERANCE..=1.0 + BETA_TOLERANCE).contains(&raw) {
        return Err(Error::NumericalConsistency(format!(
            "beta({}, {u_x}, {u_0}) = {raw} lies outside [0, 1]",
            dist.t
        )));
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// Which branch of the three-way UDM density rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityBranch {
    /// u_x ≥ u_0 + vt: out of reach of every drone from the disc.
    Untouched,
    /// |u_0 − vt| ≤ u_x ≤ u_0 + vt.
    Boundary,
    /// u_x ≤ |u_0 − vt|.
    Core,
}

pub fn density_branch(t: f64, u_x: f64, u_0: f64, v: f64) -> DensityBranch {
    let reach = v * t;
    if u_x >= u_0 + reach {
        DensityBranch::Untouched
    } else if u_x >= (u_0 - reach).abs() {
        DensityBranch::Boundary
    } else {
        DensityBranch::Core
    }
}

/// UDM interferer density λ(t; u_x, u_0). At t = 0 this is the UIM step,
/// with the disc boundary excluded.
pub fn udm_density(
    q: &DensityQuery,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    q.validate()?;
    if q.t == 0.0 {
        return Ok(uim_density(q.u_x, q.u_0, cfg.lambda0));
    }
    let beta = |spec| beta(q.t, q.u_x, q.u_0, mobility, spec);
    Ok(match density_branch(q.t, q.u_x, q.u_0, mobility.v) {
        DensityBranch::Untouched => cfg.lambda0,
        DensityBranch::Boundary => cfg.lambda0 * beta(spec)?,
        DensityBranch::Core => {
            if q.t > q.u_0 / mobility.v {
                cfg.lambda0 * beta(spec)?
            } else {
                0.0
            }
        }
    })
}

/// ∫ over r ∈ [0, u_0] of 2r / √((u_x² − (l − r)²)((l + r)² − u_x²)) dr:
/// the share, times π, of drones displaced by exactly `l` that started
/// inside the disc and now sit at distance `u_x`.
fn disc_kernel(l: f64, u_x: f64, u_0: f64, spec: &QuadratureSpec) -> Result<f64> {
    let lower = (u_x - l).abs();
    let upper = (u_x + l).min(u_0);
    if upper <= lower {
        return Ok(0.0);
    }
    let width = upper - lower;
    let slack = u_x + l - upper;
    // Factors (u_x − l + r)(u_x + l − r)(l + r − u_x)(l + r + u_x): two
    // vanish at `lower` as x(x + 2·lower), one at `upper` as y + slack.
    let kernel = |r: f64, below: f64, above: f64| -> Result<f64> {
        let prod = below * (below + 2.0 * lower) * (above + slack) * (l + r + u_x);
        if prod <= 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * r / prod.sqrt())
    };
    let half = 0.5 * width;
    let low = try_integrate_near_singular(|x| kernel(lower + x, x, width - x), 2.0 * lower, half, spec)?;
    let high = try_integrate_near_singular(|y| kernel(upper - y, width - y, y), slack, half, spec)?;
    Ok(low.value + high.value)
}

/// Density at `u_x` of the drones that started inside b(o′, u_0), from the
/// unsimplified double integral over the initial radius and the
/// displacement. Independent of [`udm_density`]; the two sum to λ0.
pub fn lambda1_direct(
    t: f64,
    u_x: f64,
    u_0: f64,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    DensityQuery::new(t, u_x, u_0)?;
    let dist = displacement_distribution(t, mobility)?;
    let lambda0 = cfg.lambda0;
    if u_x == 0.0 {
        // The angular kernel collapses: every displacement shorter than u_0
        // keeps an initially central drone inside.
        let below: f64 = dist.atoms.iter().filter(|a| a.location < u_0).map(|a| a.mass).sum();
        let cont = match &dist.continuous {
            Some(c) => c.cdf(u_0, spec)?,
            None => 0.0,
        };
        return Ok(lambda0 * (below + cont));
    }
    let inner = spec.tightened(10.0);
    let mut total = 0.0;
    for atom in &dist.atoms {
        if atom.location == 0.0 {
            if u_x <= u_0 {
                total += atom.mass * lambda0;
            }
        } else {
            total += atom.mass * lambda0 * FRAC_1_PI * disc_kernel(atom.location, u_x, u_0, &inner)?;
        }
    }
    let lo = (u_x - u_0).max(0.0);
    let hi = u_x + u_0;
    let kink = [(u_0 - u_x).abs()];
    total +=
        lambda0 * FRAC_1_PI * dist.integrate_continuous(|l| disc_kernel(l, u_x, u_0, &inner), lo, hi, &kink, spec)?;
    Ok(total)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("grid must not be empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// λ/λ0 under UDM over a `u_x` grid, evaluated in parallel.
pub fn density_profile(
    t: f64,
    u_0: f64,
    u_x_grid: &[f64],
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    spec: &QuadratureSpec,
) -> Result<DensityProfile> {
    check_grid(u_x_grid)?;
    let points = u_x_grid
        .par_iter()
        .map(|&u_x| {
            let q = DensityQuery::new(t, u_x, u_0)?;
            Ok((u_x, udm_density(&q, cfg, mobility, spec)? / cfg.lambda0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityProfile { t, u_0, points })
}

/// Interferer mass missing relative to a homogeneous field,
/// ∫ (λ0 − λ(t; u_x)) 2π u_x du_x. Only the disc of radius `u_0 + v t` can
/// differ from λ0. The outer integral runs at `rel_tol ≥ 1e-6` since each
/// of its nodes is itself a quadrature.
pub fn displaced_mass(
    t: f64,
    u_0: f64,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    DensityQuery::new(t, 0.0, u_0)?;
    let reach = mobility.v * t;
    let outer = QuadratureSpec {
        rel_tol: spec.rel_tol.max(1e-6),
        ..*spec
    };
    let mut pts = vec![0.0, (u_0 - reach).abs(), u_0, u_0 + reach];
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Ok(0.0);
    }
    try_integrate_with_breakpoints(
        |u_x| {
            let lam = udm_density(&DensityQuery::new(t, u_x, u_0)?, cfg, mobility, spec)?;
            Ok((cfg.lambda0 - lam) * 2.0 * std::f64::consts::PI * u_x)
        },
        &pts,
        &outer,
    )
    .map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (NetworkConfig, MobilityConfig, QuadratureSpec) {
        (
            NetworkConfig::new(1e-6, 100.0, 3.0).unwrap(),
            MobilityConfig::new(12.5, 5.0, 250.0).unwrap(),
            QuadratureSpec::default(),
        )
    }

    #[test]
    fn uim_branches() {
        assert_eq!(uim_density(600.0, 500.0, 1e-6), 1e-6);
        assert_eq!(uim_density(400.0, 500.0, 1e-6), 0.0);
        assert_eq!(uim_density(500.0, 500.0, 1e-6), 0.0);
    }

    #[test]
    fn beta_during_first_hover() {
        let (_, m, q) = setup();
        assert_eq!(beta(3.0, 600.0, 500.0, &m, &q).unwrap(), 1.0);
        assert_eq!(beta(3.0, 400.0, 500.0, &m, &q).unwrap(), 0.0);
    }

    #[test]
    fn udm_branch_examples() {
        let (cfg, m, q) = setup();
        let at = |t, u_x| udm_density(&DensityQuery::new(t, u_x, 500.0).unwrap(), &cfg, &m, &q).unwrap();
        assert_eq!(at(4.0, 600.0), 1e-6);
        assert_eq!(at(4.0, 300.0), 0.0);
        assert_eq!(density_branch(4.0, 300.0, 500.0, 12.5), DensityBranch::Core);
        assert_eq!(density_branch(4.0, 500.0, 500.0, 12.5), DensityBranch::Boundary);
    }

    #[test]
    fn direct_form_first_hover() {
        let (cfg, m, q) = setup();
        assert_eq!(lambda1_direct(3.0, 400.0, 500.0, &cfg, &m, &q).unwrap(), 1e-6);
        assert_eq!(lambda1_direct(3.0, 600.0, 500.0, &cfg, &m, &q).unwrap(), 0.0);
    }

    #[test]
    fn disc_kernel_full_range_is_pi() {
        let q = QuadratureSpec::default();
        for (l, u_x) in [(100.0, 300.0), (300.0, 100.0), (200.0, 200.0), (1.0, 50.0)] {
            let k = disc_kernel(l, u_x, 1e6, &q).unwrap();
            assert!((k - std::f64::consts::PI).abs() < 1e-8, "{l} {u_x}: {k}");
        }
    }

    #[test]
    fn disc_kernel_closed_form() {
        // With R = r² the radicand is 4l²R − (R + l² − u_x²)², so the
        // integral is an arcsine.
        let q = QuadratureSpec::default();
        let (l, u_x, u_0) = (150.0f64, 400.0f64, 480.0f64);
        let c = l * l - u_x * u_x;
        let m = 2.0 * l * l - c;
        let k = (m * m - c * c).sqrt();
        let lo = (u_x - l).powi(2);
        let exact = ((u_0 * u_0 - m) / k).asin() - ((lo - m) / k).asin();
        let got = disc_kernel(l, u_x, u_0, &q).unwrap();
        assert!((got - exact).abs() < 1e-8, "{got} vs {exact}");
    }

    #[test]
    fn profile_rejects_unsorted_grid() {
        let (cfg, m, q) = setup();
        assert!(density_profile(10.0, 500.0, &[1.0, 1.0], &cfg, &m, &q).is_err());
        assert!(density_profile(10.0, 500.0, &[], &cfg, &m, &q).is_err());
    }
}
