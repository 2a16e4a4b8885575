//! Full network simulation used as an empirical oracle for the analytic
//! layer: SIR samples, interferer density histograms, empirical rates and
//! goodness-of-fit tests for the SRWP displacement laws.
//!
//! Every trial owns a ChaCha8 stream selected by `(seed, trial)`, and
//! results are reduced in trial order, so outputs are identical for any
//! thread count.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::displacement::zn_cdf;
use crate::error::{Error, Result};
use crate::mobility::{bearing_of_net, net_displacement, phase_at, turn_angle, Phase, PhaseKind};
use crate::model::{random_unit_vector, sample_ppp, uniform_in_annulus, MobilityConfig, NetworkConfig, PlanarPoint};
use crate::rate::ServiceModel;

/// Guard band added beyond `r_obs + v·t_max` when sizing the simulated disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum MarginPolicy {
    /// A multiple of the leg length `s`.
    Legs(f64),
    /// A fixed distance in metres.
    Metres(f64),
}

impl Default for MarginPolicy {
    fn default() -> Self {
        MarginPolicy::Legs(10.0)
    }
}

impl MarginPolicy {
    pub fn guard(&self, mobility: &MobilityConfig) -> f64 {
        match *self {
            MarginPolicy::Legs(k) => k * mobility.s,
            MarginPolicy::Metres(m) => m,
        }
    }

    fn validate(&self) -> Result<()> {
        let x = match *self {
            MarginPolicy::Legs(k) => k,
            MarginPolicy::Metres(m) => m,
        };
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("guard margin must be non-negative, got {x}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Radius (m) of the disc in which the network is statistically exact.
    pub r_obs: f64,
    #[serde(default)]
    pub margin: MarginPolicy,
    pub trials: usize,
    pub seed: u64,
    pub time_grid: Vec<f64>,
}

impl SimConfig {
    pub fn new(r_obs: f64, trials: usize, seed: u64, time_grid: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            r_obs,
            margin: MarginPolicy::default(),
            trials,
            seed,
            time_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_obs > 0.0 && self.r_obs.is_finite()) {
            return Err(Error::Domain(format!(
                "observation radius must be positive, got {}",
                self.r_obs
            )));
        }
        if self.trials == 0 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        self.margin.validate()?;
        validate_grid(&self.time_grid, "time grid")
    }

    pub fn t_max(&self) -> f64 {
        self.time_grid.last().copied().unwrap_or(0.0)
    }

    /// No drone starting outside this radius can enter the observation disc
    /// before `t_max`.
    pub fn r_sim(&self, mobility: &MobilityConfig) -> f64 {
        self.r_obs + mobility.v * self.t_max() + self.margin.guard(mobility)
    }

    /// Same configuration evaluated on a different time grid.
    pub fn with_times(&self, time_grid: Vec<f64>) -> Self {
        Self {
            time_grid,
            ..self.clone()
        }
    }
}

/// Non-empty, finite, non-negative and strictly increasing.
pub fn validate_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{what} is empty")));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Domain(format!("{what} must hold finite non-negative values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// One SIR draw at one grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SirSample {
    pub t: f64,
    pub sir: f64,
    /// Slant distance to the serving drone (m).
    pub serving_distance: f64,
    pub interference: f64,
}

impl SirSample {
    /// Zero interference: no finite SIR exists.
    pub fn is_infinite(&self) -> bool {
        self.sir.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub samples: Vec<SirSample>,
    /// PPP draws discarded because they held no drone at all.
    pub redraws: u32,
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// SRWP positions of one drone at a fixed set of increasing times.
struct GridWalk {
    phases: Vec<Phase>,
    s: f64,
    dirs: Vec<(f64, f64)>,
}

impl GridWalk {
    fn new(mobility: &MobilityConfig, times: &[f64]) -> Result<Self> {
        let phases = times
            .iter()
            .map(|&t| phase_at(mobility, t))
            .collect::<Result<Vec<_>>>()?;
        let legs = phases.iter().map(Phase::bearings_drawn).max().unwrap_or(0);
        Ok(Self {
            phases,
            s: mobility.s,
            dirs: Vec::with_capacity(legs),
        })
    }

    /// Positions at each grid time, drawing leg bearings as they are needed.
    fn walk<R: Rng + ?Sized>(&mut self, origin: PlanarPoint, rng: &mut R, out: &mut Vec<PlanarPoint>) {
        out.clear();
        self.dirs.clear();
        let mut at = origin;
        let mut legs = 0usize;
        for phase in &self.phases {
            while self.dirs.len() < phase.bearings_drawn() {
                self.dirs.push(random_unit_vector(rng));
            }
            let n = phase.n as usize;
            while legs < n {
                let (c, s) = self.dirs[legs];
                at = at.offset(self.s * c, self.s * s);
                legs += 1;
            }
            out.push(match phase.kind {
                PhaseKind::Hover => at,
                PhaseKind::Flight { d } => {
                    let (c, s) = self.dirs[n];
                    at.offset(d * c, d * s)
                }
            });
        }
    }
}

/// `d2^{-α/2}` for a squared slant distance.
fn path_gain(d2: f64, half_alpha: f64) -> f64 {
    if half_alpha == 1.5 {
        1.0 / (d2 * d2.sqrt())
    } else if half_alpha == 2.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-half_alpha)
    }
}

fn validate_inputs(cfg: &NetworkConfig, mobility: &MobilityConfig, sim: &SimConfig) -> Result<()> {
    cfg.validate()?;
    mobility.validate()?;
    sim.validate()
}

/// Serving drone placement for a realization.
#[derive(Debug, Clone, Copy)]
enum Serving {
    /// Nearest point of an unconditioned PPP.
    Nearest,
    /// Placed at this horizontal distance, with the disc inside it empty.
    At(f64),
}

/// One network realization sampled at every time of `sim.time_grid`.
///
/// The drone nearest the user at `t = 0` serves. Under UDM it flies
/// straight to the user and hovers there while every other drone follows
/// SRWP; under UIM every drone follows SRWP and the user re-associates
/// with the nearest drone at each grid time. Fading is redrawn per time.
pub fn simulate_realization<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
    model: ServiceModel,
    rng: &mut R,
) -> Result<Realization> {
    validate_inputs(cfg, mobility, sim)?;
    realize(cfg, mobility, sim, model, Serving::Nearest, rng)
}

/// As [`simulate_realization`] with the serving drone placed at horizontal
/// distance `u_0` and no other drone initially inside that distance.
pub fn simulate_conditioned<R: Rng + ?Sized>(
    u_0: f64,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
    model: ServiceModel,
    rng: &mut R,
) -> Result<Realization> {
    validate_inputs(cfg, mobility, sim)?;
    if !(u_0 >= 0.0 && u_0 < sim.r_sim(mobility)) {
        return Err(Error::Domain(format!(
            "serving distance {u_0} outside the simulated disc"
        )));
    }
    realize(cfg, mobility, sim, model, Serving::At(u_0), rng)
}

fn realize<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
    model: ServiceModel,
    serving: Serving,
    rng: &mut R,
) -> Result<Realization> {
    realize_nested(cfg, mobility, sim, model, serving, None, rng).map(|(r, _)| r)
}

/// With `nested = Some(r)`, also returns the samples seen when only drones
/// starting within `r` exist. Both share every random draw.
fn realize_nested<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
    model: ServiceModel,
    serving: Serving,
    nested: Option<f64>,
    rng: &mut R,
) -> Result<(Realization, Vec<SirSample>)> {
    let r_sim = nested.map_or(sim.r_sim(mobility), |r| 2.0 * r);
    let mut redraws = 0u32;
    let (drones, u_0) = match serving {
        Serving::Nearest => loop {
            let mut pts = sample_ppp(cfg.lambda0, r_sim, rng)?;
            if pts.is_empty() {
                redraws += 1;
                continue;
            }
            let nearest = (0..pts.len())
                .min_by(|&a, &b| pts[a].norm_sq().total_cmp(&pts[b].norm_sq()))
                .expect("non-empty");
            pts.swap(0, nearest);
            let u_0 = pts[0].norm();
            break (pts, u_0);
        },
        Serving::At(u_0) => {
            let mut pts = vec![PlanarPoint::from_polar(u_0, TAU * rng.random::<f64>())];
            pts.extend(sample_annulus_ppp(cfg.lambda0, u_0, r_sim, rng)?);
            (pts, u_0)
        }
    };
    let inside: Vec<bool> = match nested {
        Some(r) => drones.iter().map(|p| p.norm() <= r).collect(),
        None => Vec::new(),
    };
    let times = &sim.time_grid;
    let h_sq = cfg.h * cfg.h;
    let half_alpha = 0.5 * cfg.alpha;
    let mut walk = GridWalk::new(mobility, times)?;
    let mut path = Vec::with_capacity(times.len());
    // Squared horizontal distances, drone-major.
    let k = times.len();
    let mut d2 = vec![0.0; k * drones.len()];
    let movers = match model {
        ServiceModel::Uim => 0,
        ServiceModel::Udm => 1,
    };
    for (i, p) in drones.iter().enumerate().skip(movers) {
        walk.walk(*p, rng, &mut path);
        for (j, q) in path.iter().enumerate() {
            d2[i * k + j] = q.norm_sq();
        }
    }
    let nearest = |j: usize, only_inside: bool| {
        (0..drones.len())
            .filter(|&i| !only_inside || inside[i])
            .min_by(|&a, &b| d2[a * k + j].total_cmp(&d2[b * k + j]))
            .expect("serving drone exists")
    };
    let mut samples = Vec::with_capacity(k);
    let mut inner = Vec::new();
    let mut fades = Vec::with_capacity(drones.len());
    for (j, &t) in times.iter().enumerate() {
        let (serving_index, inner_index) = match model {
            ServiceModel::Udm => (0, 0),
            ServiceModel::Uim => {
                let all = nearest(j, false);
                let within = if nested.is_some() && !inside[all] {
                    nearest(j, true)
                } else {
                    all
                };
                (all, within)
            }
        };
        let serving_sq = |index: usize| match model {
            ServiceModel::Udm => {
                let u = (u_0 - mobility.v * t).max(0.0);
                u * u + h_sq
            }
            ServiceModel::Uim => d2[index * k + j] + h_sq,
        };
        fades.clear();
        fades.extend((0..drones.len()).map(|_| -> f64 { Exp1.sample(rng) }));
        let (mut total, mut total_inner) = (0.0, 0.0);
        for i in 0..drones.len() {
            let p = fades[i] * path_gain(d2[i * k + j] + h_sq, half_alpha);
            if i != serving_index {
                total += p;
            }
            if nested.is_some() && inside[i] && i != inner_index {
                total_inner += p;
            }
        }
        let sample = |index: usize, interference: f64| {
            let sq = serving_sq(index);
            let signal = fades[index] * path_gain(sq, half_alpha);
            SirSample {
                t,
                sir: if interference > 0.0 {
                    signal / interference
                } else {
                    f64::INFINITY
                },
                serving_distance: sq.sqrt(),
                interference,
            }
        };
        samples.push(sample(serving_index, total));
        if nested.is_some() {
            inner.push(sample(inner_index, total_inner));
        }
    }
    Ok((Realization { samples, redraws }, inner))
}

/// Paired rates for the configured disc and for one of twice its radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCheck {
    pub t: f64,
    pub rate: f64,
    pub rate_doubled: f64,
    /// Standard error of the configured-disc rate.
    pub stderr: f64,
}

impl EdgeCheck {
    pub fn passes(&self) -> bool {
        (self.rate_doubled - self.rate).abs() < self.stderr
    }
}

/// Simulates on a disc of radius `2·r_sim` and evaluates each realization
/// both in full and restricted to drones that started within `r_sim`.
pub fn edge_effect_check(
    model: ServiceModel,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
) -> Result<Vec<EdgeCheck>> {
    validate_inputs(cfg, mobility, sim)?;
    let r_sim = sim.r_sim(mobility);
    let pairs = (0..sim.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(sim.seed, trial);
            realize_nested(cfg, mobility, sim, model, Serving::Nearest, Some(r_sim), &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let (big, small): (Vec<Realization>, Vec<Realization>) = pairs
        .into_iter()
        .map(|(r, inner)| {
            let small = Realization {
                samples: inner,
                redraws: r.redraws,
            };
            (r, small)
        })
        .unzip();
    let a = rates_from(&small, &sim.time_grid);
    let b = rates_from(&big, &sim.time_grid);
    Ok(a.iter()
        .zip(&b)
        .map(|(a, b)| EdgeCheck {
            t: a.t,
            rate: a.mean,
            rate_doubled: b.mean,
            stderr: a.stderr,
        })
        .collect())
}

/// PPP of density `lambda` on the annulus `inner ≤ |x| ≤ outer`.
fn sample_annulus_ppp<R: Rng + ?Sized>(lambda: f64, inner: f64, outer: f64, rng: &mut R) -> Result<Vec<PlanarPoint>> {
    let mean = lambda * PI * (outer * outer - inner * inner);
    if mean <= 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::Domain(format!("invalid Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    Ok((0..count).map(|_| uniform_in_annulus(inner, outer, rng)).collect())
}

/// Mean of `ln(1 + SIR)` at one time over the finite-SIR samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub t: f64,
    /// Nats per channel use.
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Zero-interference samples, excluded from the mean.
    pub infinite: usize,
    pub redraws: usize,
}

/// Runs `sim.trials` independent realizations in parallel, in trial order.
pub fn run_trials(
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
    model: ServiceModel,
    u_0: Option<f64>,
) -> Result<Vec<Realization>> {
    validate_inputs(cfg, mobility, sim)?;
    (0..sim.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(sim.seed, trial);
            match u_0 {
                None => simulate_realization(cfg, mobility, sim, model, &mut rng),
                Some(u) => simulate_conditioned(u, cfg, mobility, sim, model, &mut rng),
            }
        })
        .collect()
}

/// Empirical rate at every time of `sim.time_grid`.
pub fn empirical_rates(
    model: ServiceModel,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
) -> Result<Vec<RateEstimate>> {
    let runs = run_trials(cfg, mobility, sim, model, None)?;
    Ok(rates_from(&runs, &sim.time_grid))
}

/// Empirical rate at a single time.
pub fn empirical_rate(
    t: f64,
    model: ServiceModel,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
) -> Result<RateEstimate> {
    let sim = sim.with_times(vec![t]);
    Ok(empirical_rates(model, cfg, mobility, &sim)?[0])
}

pub fn rates_from(runs: &[Realization], times: &[f64]) -> Vec<RateEstimate> {
    let redraws = runs.iter().map(|r| r.redraws as usize).sum();
    times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (mut n, mut inf, mut sum, mut sq) = (0usize, 0usize, 0.0, 0.0);
            for r in runs {
                let s = r.samples[j];
                if s.is_infinite() {
                    inf += 1;
                    continue;
                }
                let x = s.sir.ln_1p();
                n += 1;
                sum += x;
                sq += x * x;
            }
            let (mean, stderr) = mean_and_stderr(n, sum, sq);
            RateEstimate {
                t,
                mean,
                stderr,
                samples: n,
                infinite: inf,
                redraws,
            }
        })
        .collect()
}

fn mean_and_stderr(n: usize, sum: f64, sq: f64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = sum / nf;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Fraction of finite-SIR samples above a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfEstimate {
    pub t: f64,
    pub gamma: f64,
    pub p: f64,
    /// Binomial standard error.
    pub stderr: f64,
    pub samples: usize,
}

pub fn ccdf_from(runs: &[Realization], times: &[f64], gammas: &[f64]) -> Vec<CcdfEstimate> {
    let mut out = Vec::with_capacity(times.len() * gammas.len());
    for (j, &t) in times.iter().enumerate() {
        let finite: Vec<f64> = runs
            .iter()
            .map(|r| r.samples[j].sir)
            .filter(|s| s.is_finite())
            .collect();
        let n = finite.len();
        for &gamma in gammas {
            let above = finite.iter().filter(|&&s| s > gamma).count();
            let p = above as f64 / n as f64;
            out.push(CcdfEstimate {
                t,
                gamma,
                p,
                stderr: (p * (1.0 - p) / n as f64).sqrt(),
                samples: n,
            });
        }
    }
    out
}

/// Empirical `P[SIR > γ]` at every grid time, optionally conditioned on
/// the initial serving distance.
pub fn empirical_ccdf(
    gammas: &[f64],
    u_0: Option<f64>,
    model: ServiceModel,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
) -> Result<Vec<CcdfEstimate>> {
    if gammas.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::Domain("SIR thresholds must be positive".into()));
    }
    let runs = run_trials(cfg, mobility, sim, model, u_0)?;
    Ok(ccdf_from(&runs, &sim.time_grid, gammas))
}

/// Annular bin edges from 0 to `u_max`: steps of `width`, merged until
/// each bin covers at least `min_area` m².
pub fn density_bins(u_max: f64, width: f64, min_area: f64) -> Result<Vec<f64>> {
    if !(u_max > 0.0 && width > 0.0 && width <= u_max && min_area >= 0.0) {
        return Err(Error::Domain(format!(
            "need 0 < width ≤ u_max and min_area ≥ 0, got width {width}, u_max {u_max}, min_area {min_area}"
        )));
    }
    let steps = (u_max / width).round().max(1.0) as usize;
    let mut edges = vec![0.0];
    let mut lo = 0.0;
    for i in 1..=steps {
        let hi = if i == steps { u_max } else { i as f64 * width };
        if PI * (hi * hi - lo * lo) >= min_area {
            edges.push(hi);
            lo = hi;
        }
    }
    if *edges.last().expect("non-empty") < u_max {
        // Fold a short remainder into the last full bin.
        if edges.len() > 1 {
            edges.pop();
        }
        edges.push(u_max);
    }
    Ok(edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityBin {
    pub lo: f64,
    pub hi: f64,
    /// Interferer density over λ₀.
    pub ratio: f64,
    pub stderr: f64,
    /// Expected count at density λ₀.
    pub expected: f64,
    pub low_confidence: bool,
}

impl DensityBin {
    pub fn area(&self) -> f64 {
        PI * (self.hi * self.hi - self.lo * self.lo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub t: f64,
    pub u_0: f64,
    pub bins: Vec<DensityBin>,
}

/// Bins whose expected count falls below this are flagged.
pub const MIN_EXPECTED: f64 = 100.0;

/// Interferer density histograms at every grid time. Each trial thins the
/// initial PPP to the outside of b(o′, u₀) and moves every drone by SRWP;
/// counts are normalised by λ₀ · area · trials.
pub fn empirical_density(
    u_0: f64,
    edges: &[f64],
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    sim: &SimConfig,
) -> Result<Vec<DensityHistogram>> {
    validate_inputs(cfg, mobility, sim)?;
    if edges.len() < 2 || edges[0] < 0.0 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "bin edges must be non-negative and strictly increasing".into(),
        ));
    }
    let u_max = *edges.last().expect("checked");
    if u_max > sim.r_obs {
        return Err(Error::Domain(format!(
            "bins reach {u_max} m beyond the observation radius {}",
            sim.r_obs
        )));
    }
    let r_sim = sim.r_sim(mobility);
    if !(u_0 >= 0.0 && u_0 < r_sim) {
        return Err(Error::Domain(format!(
            "exclusion radius {u_0} outside the simulated disc"
        )));
    }
    let nb = edges.len() - 1;
    let k = sim.time_grid.len();
    let counts = (0..sim.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Vec<u64>> {
            let mut rng = trial_rng(sim.seed, trial);
            let mut walk = GridWalk::new(mobility, &sim.time_grid)?;
            let mut path = Vec::with_capacity(k);
            let mut counts = vec![0u64; k * nb];
            for p in sample_annulus_ppp(cfg.lambda0, u_0, r_sim, &mut rng)? {
                walk.walk(p, &mut rng, &mut path);
                for (j, q) in path.iter().enumerate() {
                    let r = q.norm();
                    if r >= u_max {
                        continue;
                    }
                    let b = edges.partition_point(|&e| e <= r);
                    if b >= 1 {
                        counts[j * nb + b - 1] += 1;
                    }
                }
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; k * nb],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let trials = sim.trials as f64;
    Ok(sim
        .time_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| DensityHistogram {
            t,
            u_0,
            bins: (0..nb)
                .map(|b| {
                    let (lo, hi) = (edges[b], edges[b + 1]);
                    let expected = cfg.lambda0 * PI * (hi * hi - lo * lo) * trials;
                    let c = counts[j * nb + b] as f64;
                    DensityBin {
                        lo,
                        hi,
                        ratio: c / expected,
                        stderr: c.sqrt() / expected,
                        expected,
                        low_confidence: expected < MIN_EXPECTED,
                    }
                })
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of `samples` in [0, 2π) against the uniform law on
/// `bins` equal cells.
pub fn chi_square_uniform_angle(samples: &[f64], bins: usize) -> Result<ChiSquareResult> {
    if bins < 2 || samples.is_empty() {
        return Err(Error::Domain(
            "chi-square needs at least two bins and one sample".into(),
        ));
    }
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let b = ((x.rem_euclid(TAU) / TAU) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = bins - 1;
    let law = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: law.sf(statistic),
    })
}

pub const ANGLE_BINS: usize = 36;

fn check_angle_test(n: u32, samples: usize, min_n: u32) -> Result<()> {
    if n < min_n {
        return Err(Error::Domain(format!("need n ≥ {min_n}, got {n}")));
    }
    if samples < 10_000 {
        return Err(Error::Domain(format!("need at least 10⁴ samples, got {samples}")));
    }
    Ok(())
}

/// Uniformity of the net bearing Ψ_n after `n` legs with bearings drawn
/// by `bearing`.
pub fn test_psi_uniform_with<R, B>(n: u32, samples: usize, rng: &mut R, mut bearing: B) -> Result<ChiSquareResult>
where
    R: Rng + ?Sized,
    B: FnMut(&mut R) -> f64,
{
    check_angle_test(n, samples, 2)?;
    let mut legs = vec![0.0; n as usize];
    let mut psi = Vec::with_capacity(samples);
    while psi.len() < samples {
        legs.iter_mut().for_each(|b| *b = bearing(rng));
        match bearing_of_net(&legs) {
            Ok(p) => psi.push(p),
            Err(Error::UndefinedBearing) => continue,
            Err(e) => return Err(e),
        }
    }
    chi_square_uniform_angle(&psi, ANGLE_BINS)
}

pub fn test_psi_uniform<R: Rng + ?Sized>(n: u32, samples: usize, rng: &mut R) -> Result<ChiSquareResult> {
    test_psi_uniform_with(n, samples, rng, |r: &mut R| TAU * r.random::<f64>())
}

/// Uniformity of the turn angle Φ_n into leg `n + 1`.
pub fn test_phi_uniform<R: Rng + ?Sized>(n: u32, samples: usize, rng: &mut R) -> Result<ChiSquareResult> {
    check_angle_test(n, samples, 1)?;
    let mut legs = vec![0.0; n as usize + 1];
    let mut phi = Vec::with_capacity(samples);
    while phi.len() < samples {
        legs.iter_mut().for_each(|b| *b = TAU * rng.random::<f64>());
        match bearing_of_net(&legs[..n as usize]) {
            Ok(psi) => phi.push(turn_angle(legs[n as usize], psi)),
            Err(Error::UndefinedBearing) => continue,
            Err(e) => return Err(e),
        }
    }
    chi_square_uniform_angle(&phi, ANGLE_BINS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub samples: usize,
    /// Asymptotic Kolmogorov p-value.
    pub p_value: f64,
    /// Critical distance at the 0.01 level.
    pub critical_01: f64,
}

/// Sup distance between the empirical CDF of `xs` and `cdf`. Sorts `xs`.
pub fn ks_statistic<F>(xs: &mut [f64], mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    Ok(d)
}

/// P[D_n > d] from the Kolmogorov limit law with the usual small-sample
/// correction.
pub fn kolmogorov_p_value(n: usize, d: f64) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS fit of simulated `Z_n` (exact bearings) against the analytic law.
pub fn test_zn_fit<R: Rng + ?Sized>(n: u32, s: f64, samples: usize, rng: &mut R) -> Result<KsResult> {
    if n < 2 {
        return Err(Error::Domain(format!("need n ≥ 2, got {n}")));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let mut legs = vec![0.0; n as usize];
    let mut zs: Vec<f64> = (0..samples)
        .map(|_| {
            legs.iter_mut().for_each(|b| *b = TAU * rng.random::<f64>());
            net_displacement(&legs, s)
        })
        .collect();
    let statistic = ks_statistic(&mut zs, |z| zn_cdf(n, s, z))?;
    Ok(KsResult {
        statistic,
        samples,
        p_value: kolmogorov_p_value(samples, statistic),
        critical_01: 1.628 / (samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::Trajectory;

    #[test]
    fn grid_walk_follows_the_trajectory() {
        let m = MobilityConfig::new(12.5, 5.0, 250.0).unwrap();
        let times = [0.0, 3.0, 7.5, 25.0, 61.0, 119.9, 300.0];
        let mut walk = GridWalk::new(&m, &times).unwrap();
        let mut rng = trial_rng(9, 4);
        let origin = PlanarPoint::new(120.0, -40.0);
        let mut path = Vec::new();
        walk.walk(origin, &mut rng, &mut path);
        let bearings = walk.dirs.iter().map(|&(c, s)| s.atan2(c)).collect();
        let mut traj = Trajectory::with_bearings(origin, m, bearings);
        for (t, p) in times.iter().zip(&path) {
            let q = traj.position_at(*t).unwrap();
            assert!(p.distance(&q) < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn chi_square_of_exact_counts() {
        let xs: Vec<f64> = (0..3600).map(|i| (i as f64 + 0.5) * TAU / 3600.0).collect();
        let r = chi_square_uniform_angle(&xs, 36).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_tail() {
        // Classical asymptotic critical values: 1.36 at 5%, 1.628 at 1%.
        let n = 1_000_000;
        let sn = (n as f64).sqrt();
        assert!((kolmogorov_p_value(n, 1.358 / sn) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_p_value(n, 1.628 / sn) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_p_value(n, 0.0), 1.0);
    }

    #[test]
    fn margin_and_radius() {
        let m = MobilityConfig::new(12.5, 5.0, 250.0).unwrap();
        let sim = SimConfig::new(3000.0, 10, 0, vec![40.0, 300.0]).unwrap();
        assert_eq!(sim.r_sim(&m), 3000.0 + 3750.0 + 2500.0);
        assert!(SimConfig::new(3000.0, 0, 0, vec![1.0]).is_err());
        assert!(SimConfig::new(3000.0, 1, 0, vec![2.0, 1.0]).is_err());
        assert!(SimConfig::new(-1.0, 1, 0, vec![1.0]).is_err());
    }
}
