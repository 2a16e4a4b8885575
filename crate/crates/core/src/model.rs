//! Static network and mobility parameters, plane geometry and PPP sampling.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static parameters of the drone network.
///
/// The transmit power `power` is carried for completeness; it multiplies
/// both the useful signal and every interference term, so it cancels in
/// the SIR and no rate or coverage output depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Areal density of the initial drone PPP (points per m²).
    pub lambda0: f64,
    /// Drone altitude (m).
    pub h: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    #[serde(default = "unit_power")]
    pub power: f64,
}

fn unit_power() -> f64 {
    1.0
}

impl NetworkConfig {
    pub fn new(lambda0: f64, h: f64, alpha: f64) -> Result<Self> {
        let cfg = Self {
            lambda0,
            h,
            alpha,
            power: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(Error::Config(format!(
                "network.lambda0 must be positive, got {}",
                self.lambda0
            )));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::Config(format!("network.h must be non-negative, got {}", self.h)));
        }
        if self.alpha.is_nan() || self.alpha <= 2.0 || self.alpha.is_infinite() {
            return Err(Error::Divergence { alpha: self.alpha });
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(Error::Config(format!(
                "network.power must be positive, got {}",
                self.power
            )));
        }
        Ok(())
    }

    pub fn with_height(self, h: f64) -> Self {
        Self { h, ..self }
    }
}

/// Parameters of the simplified random-waypoint model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityConfig {
    /// Flight speed (m/s).
    pub v: f64,
    /// Hover time (s).
    pub w: f64,
    /// Flight distance (m).
    pub s: f64,
}

impl MobilityConfig {
    pub fn new(v: f64, w: f64, s: f64) -> Result<Self> {
        let m = Self { v, w, s };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v.is_finite() && self.v > 0.0) {
            return Err(Error::Config(format!("mobility.v must be positive, got {}", self.v)));
        }
        if !(self.w.is_finite() && self.w >= 0.0) {
            return Err(Error::Config(format!(
                "mobility.w must be non-negative, got {}",
                self.w
            )));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::Config(format!("mobility.s must be positive, got {}", self.s)));
        }
        Ok(())
    }

    /// Duration of one hover-plus-flight cycle.
    pub fn cycle(&self) -> f64 {
        self.w + self.s / self.v
    }

    pub fn flight_time(&self) -> f64 {
        self.s / self.v
    }
}

/// A point in the drone plane, relative to the projection of the typical
/// user.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const ORIGIN: PlanarPoint = PlanarPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self {
            x: radius * cos,
            y: radius * sin,
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn offset(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

/// Slant distance from a ground user to a drone at horizontal distance
/// `u` and altitude `h`.
pub fn distance_3d(u: f64, h: f64) -> Result<f64> {
    if !(u >= 0.0 && h >= 0.0) {
        return Err(Error::Domain(format!(
            "distances must be non-negative, got u = {u}, h = {h}"
        )));
    }
    Ok(u.hypot(h))
}

/// Homogeneous PPP of density `lambda` restricted to the disc of the given
/// radius around the origin.
pub fn sample_ppp<R: Rng + ?Sized>(lambda: f64, radius: f64, rng: &mut R) -> Result<Vec<PlanarPoint>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("PPP density must be non-negative, got {lambda}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("PPP radius must be positive, got {radius}")));
    }
    let mean = lambda * PI * radius * radius;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::Domain(format!("invalid Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    Ok((0..count).map(|_| uniform_in_disc(radius, rng)).collect())
}

/// Uniform direction as `(cos, sin)`, by rejection from the square so no
/// trigonometry is needed. Each attempt uses one 64-bit draw split into two
/// 32-bit coordinates.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 31) as f64;
    loop {
        let bits = rng.next_u64();
        let x = ((bits >> 32) as f64 + 0.5) * SCALE - 1.0;
        let y = ((bits & 0xffff_ffff) as f64 + 0.5) * SCALE - 1.0;
        let r2 = x * x + y * y;
        if r2 <= 1.0 {
            let r = r2.sqrt();
            return (x / r, y / r);
        }
    }
}

/// Uniform point in the disc of the given radius.
pub fn uniform_in_disc<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> PlanarPoint {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        if x * x + y * y <= 1.0 {
            return PlanarPoint::new(radius * x, radius * y);
        }
    }
}

/// Uniform point in the annulus `inner ≤ |x| ≤ outer`.
pub fn uniform_in_annulus<R: Rng + ?Sized>(inner: f64, outer: f64, rng: &mut R) -> PlanarPoint {
    let u: f64 = rng.random();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    let (c, s) = random_unit_vector(rng);
    PlanarPoint::new(r * c, r * s)
}
