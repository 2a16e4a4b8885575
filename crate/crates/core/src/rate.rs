//! Conditional SIR coverage and the average downlink rate under UIM and
//! UDM.
//!
//! With Rayleigh fading the coverage probability conditioned on the initial
//! serving distance is exp(−2π ∫ u λ(u) K(u) du), where
//! K(u) = 1/(1 + γ⁻¹((u² + h²)/(u₀(t)² + h²))^{α/2}). The average rate is
//! ∫ dγ/(1 + γ) ∫ du₀ f(u₀) P[SIR > γ | u₀] with the nearest-neighbour law
//! f(u₀) = 2πλ₀u₀e^{−πλ₀u₀²}.
//!
//! Under UDM the interferers are the homogeneous PPP minus the drones that
//! started inside b(o′, u₀), so λ = λ₀(1 − E[g(L; u, u₀)]), where g is the
//! chance that a drone displaced by L from distance u lands in the disc.
//! Exchanging the u-integral with the expectation over L gives
//! ∫ u λ K du = λ₀(∫₀^∞ u K du − E[H(L)]), with H(l) = ∫ u g(l; u, u₀) K du.
//! H is smooth in l, so E[H(L)] needs only a small fixed rule over the law of
//! L; the u-integral stays innermost.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::displacement::{displacement_distribution, LawQuadrature};
use crate::error::{Error, Result};
use crate::interference::{angular_share, udm_density, DensityQuery};
use crate::model::{MobilityConfig, NetworkConfig};
use crate::quadrature::{
    try_integrate_adaptive, try_integrate_semi_infinite, try_integrate_singular, try_integrate_with_breakpoints,
    QuadratureSpec,
};

/// Kronrod panels per smooth piece of the law of L.
const LAW_PANELS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceModel {
    Uim,
    Udm,
}

impl ServiceModel {
    pub fn name(self) -> &'static str {
        match self {
            ServiceModel::Uim => "uim",
            ServiceModel::Udm => "udm",
        }
    }
}

impl fmt::Display for ServiceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ServiceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uim" => Ok(ServiceModel::Uim),
            "udm" => Ok(ServiceModel::Udm),
            other => Err(Error::Config(format!(
                "unknown service model {other:?}; expected uim or udm"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateQuery {
    pub t: f64,
    pub cfg: NetworkConfig,
    pub mobility: MobilityConfig,
    pub quad: QuadratureSpec,
    pub model: ServiceModel,
}

impl RateQuery {
    pub fn evaluate(&self) -> Result<f64> {
        match self.model {
            ServiceModel::Uim => average_rate_uim(&self.cfg, &self.quad),
            ServiceModel::Udm => average_rate_udm(self.t, &self.cfg, &self.mobility, &self.quad),
        }
    }
}

/// Average rate in nats per channel use over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub model: ServiceModel,
    /// `(t, R)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Coverage and rate evaluation at one time instant. Holds the law of L at
/// `t` and memoises the interference exponent on (γ, u₀).
pub struct RateEvaluator {
    t: f64,
    model: ServiceModel,
    cfg: NetworkConfig,
    v: f64,
    spec: QuadratureSpec,
    law: Option<LawQuadrature>,
    cache: Mutex<HashMap<(u64, u64), f64>>,
}

impl RateEvaluator {
    pub fn new(
        model: ServiceModel,
        t: f64,
        cfg: &NetworkConfig,
        mobility: &MobilityConfig,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        cfg.validate()?;
        mobility.validate()?;
        spec.validate()?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be non-negative, got {t}")));
        }
        let law = match model {
            ServiceModel::Uim => None,
            ServiceModel::Udm => Some(LawQuadrature::new(
                &displacement_distribution(t, mobility)?,
                LAW_PANELS,
                spec,
            )?),
        };
        Ok(Self {
            t,
            model,
            cfg: *cfg,
            v: mobility.v,
            spec: *spec,
            law,
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn serving_distance(&self, u_0: f64) -> f64 {
        match self.model {
            ServiceModel::Uim => u_0,
            ServiceModel::Udm => (u_0 - self.v * self.t).max(0.0),
        }
    }

    /// ∫ u λ(u) K(u) du / λ₀ for the given threshold and initial serving
    /// distance.
    pub fn interference_exponent(&self, gamma: f64, u_0: f64) -> Result<f64> {
        let key = (gamma.to_bits(), u_0.to_bits());
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let value = self.exponent_uncached(gamma, u_0)?;
        self.cache.lock().expect("cache poisoned").insert(key, value);
        Ok(value)
    }

    fn exponent_uncached(&self, gamma: f64, u_0: f64) -> Result<f64> {
        let h = self.cfg.h;
        let u0_t = self.serving_distance(u_0);
        let serving = u0_t * u0_t + h * h;
        let kernel = Kernel {
            gamma,
            serving,
            h_sq: h * h,
            half_alpha: 0.5 * self.cfg.alpha,
        };
        let inner = self.spec.tightened(10.0);
        let scale = serving.sqrt().max(1.0);
        match &self.law {
            None => kernel.tail(u_0, scale, &inner),
            Some(law) => {
                let total = kernel.tail(0.0, scale, &inner)?;
                let captured = law.expect(|l| kernel.captured(l, u_0, &inner))?;
                Ok((total - captured).max(0.0))
            }
        }
    }

    /// P[SIR > γ | u₀].
    pub fn ccdf(&self, gamma: f64, u_0: f64) -> Result<f64> {
        if !(gamma > 0.0) {
            return Err(Error::Domain(format!("SIR threshold must be positive, got {gamma}")));
        }
        if !(u_0 >= 0.0 && u_0.is_finite()) {
            return Err(Error::Domain(format!(
                "serving distance must be non-negative, got {u_0}"
            )));
        }
        if gamma.is_infinite() {
            return Ok(0.0);
        }
        if self.cfg.h == 0.0 && self.serving_distance(u_0) == 0.0 {
            // Serving drone on top of the user at zero altitude.
            return Ok(1.0);
        }
        let e = self.interference_exponent(gamma, u_0)?;
        Ok((-2.0 * PI * self.cfg.lambda0 * e).exp())
    }

    /// ∫ du₀ f(u₀) g(u₀) over the nearest-neighbour law, split where the
    /// UDM serving drone arrives.
    fn decondition<G>(&self, mut g: G, spec: &QuadratureSpec) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        let lambda0 = self.cfg.lambda0;
        let width = 1.0 / (PI * lambda0).sqrt();
        let arrival = match self.model {
            ServiceModel::Uim => 0.0,
            ServiceModel::Udm => self.v * self.t,
        };
        let head = if arrival > 0.0 {
            decay_scale(&mut g, 0.0, width)?
        } else {
            0.0
        };
        let tail = decay_scale(&mut g, arrival, width)?;
        let mut weighted = |u: f64| -> Result<f64> {
            let w = 2.0 * PI * lambda0 * u * (-PI * lambda0 * u * u).exp();
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(w * g(u)?)
        };
        let mut total = 0.0;
        if arrival > 0.0 {
            let pts: &[f64] = if head < arrival {
                &[0.0, head, arrival]
            } else {
                &[0.0, arrival]
            };
            total += try_integrate_with_breakpoints(&mut weighted, pts, spec)?.value;
        }
        total += try_integrate_semi_infinite(&mut weighted, arrival, tail, spec)?.value;
        Ok(total)
    }

    /// P[SIR > γ] averaged over the serving distance.
    pub fn coverage(&self, gamma: f64) -> Result<f64> {
        let spec = self.spec.tightened(10.0);
        self.decondition(|u| self.ccdf(gamma, u), &spec)
    }

    /// E[ln(1 + SIR)] in nats, as ∫ P[SIR > eˣ − 1] dx. The coverage tail
    /// is algebraic in γ but exponential in x.
    pub fn rate(&self) -> Result<f64> {
        if self.model == ServiceModel::Udm && self.cfg.h == 0.0 && self.t > 0.0 {
            return Err(Error::Domain(
                "UDM rate is unbounded at zero altitude once the serving drone can reach the user".into(),
            ));
        }
        let mid = self.spec.tightened(10.0);
        try_integrate_semi_infinite(
            |x| {
                let gamma = x.exp_m1();
                if gamma == 0.0 {
                    return Ok(1.0);
                }
                self.decondition(|u| self.ccdf(gamma, u), &mid)
            },
            0.0,
            1.0,
            &self.spec,
        )
        .map(|r| r.value)
    }
}

/// Shrinks `width` until `g` has not collapsed over [a, a + width]. At large
/// thresholds and low altitude the conditional coverage is a narrow bump at
/// the start of the segment that a panel of the default width never samples.
fn decay_scale<G>(g: &mut G, a: f64, width: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let at_start = g(a)?;
    let mut s = width;
    if at_start > 0.0 {
        while s > 1e-9 * width && g(a + s)? < 1e-3 * at_start {
            s *= 0.25;
        }
    }
    Ok(s)
}

/// K(u) = γ / (γ + ((u² + h²)/S)^{α/2}).
#[derive(Debug, Clone, Copy)]
struct Kernel {
    gamma: f64,
    serving: f64,
    h_sq: f64,
    half_alpha: f64,
}

impl Kernel {
    fn eval(&self, u: f64) -> f64 {
        let ratio = (u * u + self.h_sq) / self.serving;
        let p = if self.half_alpha == 1.5 {
            ratio * ratio.sqrt()
        } else if self.half_alpha == 2.0 {
            ratio * ratio
        } else {
            ratio.powf(self.half_alpha)
        };
        self.gamma / (self.gamma + p)
    }

    /// ∫_a^∞ u K(u) du.
    fn tail(&self, a: f64, scale: f64, spec: &QuadratureSpec) -> Result<f64> {
        try_integrate_semi_infinite(|u| Ok(u * self.eval(u)), a, scale.max(a), spec).map(|r| r.value)
    }

    /// H(l) = ∫ u g(l; u, u₀) K(u) du: the weight of drones displaced by `l`
    /// that started in b(o′, u₀).
    fn captured(&self, l: f64, u_0: f64, spec: &QuadratureSpec) -> Result<f64> {
        if u_0 == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let lo = (u_0 - l).abs();
        if l < u_0 {
            total += try_integrate_adaptive(|u| Ok(u * self.eval(u)), 0.0, lo, spec)?.value;
        }
        if l > 0.0 {
            total +=
                try_integrate_singular(|u| Ok(u * angular_share(l, u, u_0) * self.eval(u)), lo, u_0 + l, spec)?.value;
        }
        Ok(total)
    }
}

/// P[SIR > γ | u₀] at time `t`.
pub fn sir_ccdf_conditional(
    gamma: f64,
    t: f64,
    u_0: f64,
    model: ServiceModel,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    RateEvaluator::new(model, t, cfg, mobility, spec)?.ccdf(gamma, u_0)
}

/// P[SIR > γ | u₀] under UDM integrating the tabulated interferer density
/// λ(t; u, u₀) directly over u. Much slower than
/// [`sir_ccdf_conditional`]; kept as a cross-check.
pub fn sir_ccdf_from_density(
    gamma: f64,
    t: f64,
    u_0: f64,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let h = cfg.h;
    let u0_t = (u_0 - mobility.v * t).max(0.0);
    let kernel = Kernel {
        gamma,
        serving: u0_t * u0_t + h * h,
        h_sq: h * h,
        half_alpha: 0.5 * cfg.alpha,
    };
    let reach = u_0 + mobility.v * t;
    let mut pts = vec![0.0, (u_0 - mobility.v * t).abs(), reach];
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let near = try_integrate_with_breakpoints(
        |u| {
            let lam = udm_density(&DensityQuery::new(t, u, u_0)?, cfg, mobility, spec)?;
            Ok(u * lam * kernel.eval(u))
        },
        &pts,
        spec,
    )?
    .value;
    let far = cfg.lambda0 * kernel.tail(reach, kernel.serving.sqrt().max(1.0), spec)?;
    Ok((-2.0 * PI * (near + far)).exp())
}

/// Average UDM rate at time `t` in nats.
pub fn average_rate_udm(t: f64, cfg: &NetworkConfig, mobility: &MobilityConfig, quad: &QuadratureSpec) -> Result<f64> {
    RateEvaluator::new(ServiceModel::Udm, t, cfg, mobility, quad)?.rate()
}

/// Average UIM rate in nats; independent of time.
pub fn average_rate_uim(cfg: &NetworkConfig, quad: &QuadratureSpec) -> Result<f64> {
    // Mobility never enters the UIM expressions.
    let still = MobilityConfig { v: 1.0, w: 0.0, s: 1.0 };
    RateEvaluator::new(ServiceModel::Uim, 0.0, cfg, &still, quad)?.rate()
}

/// Coverage probability P[SIR > γ] at time `t`.
pub fn coverage_probability(
    gamma: f64,
    t: f64,
    model: ServiceModel,
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    quad: &QuadratureSpec,
) -> Result<f64> {
    RateEvaluator::new(model, t, cfg, mobility, quad)?.coverage(gamma)
}

/// Rate at every grid time. The UIM value is computed once.
pub fn rate_curve(
    model: ServiceModel,
    times: &[f64],
    cfg: &NetworkConfig,
    mobility: &MobilityConfig,
    quad: &QuadratureSpec,
) -> Result<RateCurve> {
    if times.is_empty() {
        return Err(Error::Domain("time grid must not be empty".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("time grid must be strictly increasing".into()));
    }
    let points = match model {
        ServiceModel::Uim => {
            let r = average_rate_uim(cfg, quad)?;
            times.iter().map(|&t| (t, r)).collect()
        }
        ServiceModel::Udm => times
            .par_iter()
            .map(|&t| Ok((t, average_rate_udm(t, cfg, mobility, quad)?)))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(RateCurve { model, points })
}
