//! Simplified random-waypoint (SRWP) kinematics.
//!
//! A drone hovers for `w` seconds, flies `s` metres at speed `v` along a
//! fresh uniform bearing, and repeats. After `n` completed flights its net
//! displacement from the start is `Z_n` at bearing `Ψ_n`; while in flight
//! number `n + 1` it has covered `d` metres of that leg and its distance
//! from the start is given by the cosine law in the turn angle
//! `Φ_n = Θ_{n+1} − Ψ_n − π`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{MobilityConfig, PlanarPoint};

/// Resultant-vector lengths below this many unit steps are treated as a
/// return to the start.
const ZERO_RESULTANT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseKind {
    Hover,
    /// In flight `n + 1`, `d` metres into the leg (0 ≤ d < s).
    Flight {
        d: f64,
    },
}

/// Position in the hover/flight cycle at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    /// Completed flights.
    pub n: u32,
    pub kind: PhaseKind,
}

impl Phase {
    pub fn is_hover(&self) -> bool {
        matches!(self.kind, PhaseKind::Hover)
    }

    /// Distance flown in the current leg (0 while hovering).
    pub fn leg_distance(&self) -> f64 {
        match self.kind {
            PhaseKind::Hover => 0.0,
            PhaseKind::Flight { d } => d,
        }
    }

    /// Number of bearings drawn by this time (completed legs plus the one
    /// in progress).
    pub fn bearings_drawn(&self) -> usize {
        self.n as usize + usize::from(!self.is_hover())
    }
}

/// Phase of the SRWP cycle at time `t`. Boundary instants belong to the
/// phase that starts there.
pub fn phase_at(mobility: &MobilityConfig, t: f64) -> Result<Phase> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let cycle = mobility.cycle();
    let n = (t / cycle).floor();
    let into = (t - n * cycle).max(0.0);
    let n = n as u32;
    if into < mobility.w {
        return Ok(Phase {
            n,
            kind: PhaseKind::Hover,
        });
    }
    let d = mobility.v * (into - mobility.w);
    if d >= mobility.s {
        // Rounding pushed us onto the next hover.
        return Ok(Phase {
            n: n + 1,
            kind: PhaseKind::Hover,
        });
    }
    Ok(Phase {
        n,
        kind: PhaseKind::Flight { d },
    })
}

/// Wrap an angle into [−π, π).
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle - TAU * ((angle + PI) / TAU).floor();
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

fn resultant(bearings: &[f64]) -> (f64, f64) {
    bearings.iter().fold((0.0, 0.0), |(cx, cy), &b| {
        let (sin, cos) = b.sin_cos();
        (cx + cos, cy + sin)
    })
}

/// Net displacement `Z_n` after flights along `bearings`, each of length `s`.
/// An empty list is the pre-first-flight state with `Z_0 = 0`.
pub fn net_displacement(bearings: &[f64], s: f64) -> f64 {
    let (cx, cy) = resultant(bearings);
    s * cx.hypot(cy)
}

/// Bearing `Ψ_n` of the net displacement, in [−π, π).
pub fn bearing_of_net(bearings: &[f64]) -> Result<f64> {
    let (cx, cy) = resultant(bearings);
    if bearings.is_empty() || cx.hypot(cy) <= ZERO_RESULTANT * bearings.len() as f64 {
        return Err(Error::UndefinedBearing);
    }
    Ok(wrap_angle(cy.atan2(cx)))
}

/// Turn angle `Φ_n = Θ_{n+1} − Ψ_n − π`, wrapped to [0, 2π).
pub fn turn_angle(next_bearing: f64, net_bearing: f64) -> f64 {
    // Φ − π ≡ Θ − Ψ (mod 2π)
    wrap_angle(next_bearing - net_bearing) + PI
}

/// Net displacement `L(t)` from the cosine law, given `Z_n`, `Φ_n` and `d`.
pub fn cosine_law_displacement(z: f64, d: f64, turn: f64) -> f64 {
    (z * z + d * d - 2.0 * z * d * turn.cos()).max(0.0).sqrt()
}

/// One drone's SRWP path: its start point and its flight bearings.
///
/// Bearings are drawn on demand from the trajectory's own generator and
/// cached, so repeated queries, in any order, see the same path. A
/// trajectory built from a fixed bearing list cannot be extended past it.
#[derive(Debug, Clone)]
pub struct Trajectory {
    origin: PlanarPoint,
    mobility: MobilityConfig,
    bearings: Vec<f64>,
    source: Option<ChaCha8Rng>,
}

impl Trajectory {
    pub fn new<R: Rng + ?Sized>(origin: PlanarPoint, mobility: MobilityConfig, rng: &mut R) -> Self {
        Self {
            origin,
            mobility,
            bearings: Vec::new(),
            source: Some(ChaCha8Rng::seed_from_u64(rng.next_u64())),
        }
    }

    pub fn with_bearings(origin: PlanarPoint, mobility: MobilityConfig, bearings: Vec<f64>) -> Self {
        Self {
            origin,
            mobility,
            bearings,
            source: None,
        }
    }

    pub fn origin(&self) -> PlanarPoint {
        self.origin
    }

    pub fn mobility(&self) -> &MobilityConfig {
        &self.mobility
    }

    /// Bearings materialised so far.
    pub fn bearings(&self) -> &[f64] {
        &self.bearings
    }

    /// Draw every bearing needed to answer queries up to time `t`.
    pub fn materialize(&mut self, t: f64) -> Result<Phase> {
        let phase = phase_at(&self.mobility, t)?;
        let needed = phase.bearings_drawn();
        if self.bearings.len() < needed {
            let Some(source) = self.source.as_mut() else {
                return Err(Error::Domain(format!(
                    "trajectory has {} fixed bearings but t = {t} needs {needed}",
                    self.bearings.len()
                )));
            };
            while self.bearings.len() < needed {
                self.bearings.push(source.random::<f64>() * TAU);
            }
        }
        Ok(phase)
    }

    /// Location at time `t`, as the vector sum of the legs flown so far.
    pub fn position_at(&mut self, t: f64) -> Result<PlanarPoint> {
        let phase = self.materialize(t)?;
        let s = self.mobility.s;
        let n = phase.n as usize;
        let mut p = self.origin;
        for &b in &self.bearings[..n] {
            let (sin, cos) = b.sin_cos();
            p = p.offset(s * cos, s * sin);
        }
        if let PhaseKind::Flight { d } = phase.kind {
            let (sin, cos) = self.bearings[n].sin_cos();
            p = p.offset(d * cos, d * sin);
        }
        Ok(p)
    }

    /// Distance from the start at time `t`, from `Z_n`, `Ψ_n` and the
    /// turn angle rather than from the position.
    pub fn displacement_at(&mut self, t: f64) -> Result<f64> {
        let phase = self.materialize(t)?;
        let n = phase.n as usize;
        let z = net_displacement(&self.bearings[..n], self.mobility.s);
        match phase.kind {
            PhaseKind::Hover => Ok(z),
            PhaseKind::Flight { d } => match bearing_of_net(&self.bearings[..n]) {
                Ok(psi) => Ok(cosine_law_displacement(z, d, turn_angle(self.bearings[n], psi))),
                Err(Error::UndefinedBearing) => Ok(d),
                Err(e) => Err(e),
            },
        }
    }
}

/// Horizontal distance of the UE-dependent serving drone, which flies
/// straight towards the user and then hovers overhead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingTrack {
    pub u0: f64,
    pub v: f64,
}

impl ServingTrack {
    pub fn new(u0: f64, v: f64) -> Result<Self> {
        if !(u0 >= 0.0 && u0.is_finite()) {
            return Err(Error::Domain(format!(
                "serving distance must be non-negative, got {u0}"
            )));
        }
        Ok(Self { u0, v })
    }

    pub fn distance_at(&self, t: f64) -> Result<f64> {
        serving_distance_at(self, t)
    }
}

/// `[u0 − v t]⁺`.
pub fn serving_distance_at(track: &ServingTrack, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    Ok((track.u0 - track.v * t).max(0.0))
}
