//! Distribution of the net displacement `L(t)` of an SRWP drone.
//!
//! While hovering after `n` flights, `L(t) = Z_n`, whose law is a point
//! mass at `s` (n = 1), the exact arcsine law on [0, 2s] (n = 2), or the
//! truncated Rayleigh approximation with σ = s·√(n/2) on [0, n·s] (n ≥ 3).
//! While flying leg `n + 1`, `L(t)` is the cosine-law combination of `Z_n`,
//! the leg distance `d` and a uniform turn angle; its CDF and density are
//! single integrals over the law of `Z_n`.
//!
//! Point masses are kept as explicit atoms throughout so that downstream
//! integrals can add them exactly.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2};

use crate::error::{Error, Result};
use crate::mobility::{phase_at, Phase, PhaseKind};
use crate::model::MobilityConfig;
use crate::quadrature::{kronrod_nodes, try_integrate_near_singular, try_integrate_singular_offsets, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZnLaw {
    PointMass {
        at: f64,
    },
    /// Arcsine law on [0, scale] with scale = 2s.
    Arcsine {
        scale: f64,
    },
    TruncatedRayleigh {
        sigma: f64,
        cutoff: f64,
    },
}

/// Law of the net displacement after `n` flights of length `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZnDistribution {
    pub n: u32,
    pub s: f64,
    pub law: ZnLaw,
}

impl ZnDistribution {
    pub fn new(n: u32, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Z_n is defined for n >= 1".into()));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("flight distance must be positive, got {s}")));
        }
        let law = match n {
            1 => ZnLaw::PointMass { at: s },
            2 => ZnLaw::Arcsine { scale: 2.0 * s },
            _ => ZnLaw::TruncatedRayleigh {
                sigma: s * (n as f64 / 2.0).sqrt(),
                cutoff: n as f64 * s,
            },
        };
        Ok(Self { n, s, law })
    }

    /// Upper end of the support, `n·s`.
    pub fn support_max(&self) -> f64 {
        match self.law {
            ZnLaw::PointMass { at } => at,
            ZnLaw::Arcsine { scale } => scale,
            ZnLaw::TruncatedRayleigh { cutoff, .. } => cutoff,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.law, ZnLaw::PointMass { .. })
    }

    /// Pointwise density; the n = 1 point mass has none.
    pub fn pdf(&self, z: f64) -> Result<f64> {
        match self.law {
            ZnLaw::PointMass { at } => Err(Error::AtomicDistribution { n: self.n, at }),
            ZnLaw::Arcsine { scale } => Ok(if (0.0..scale).contains(&z) {
                arcsine_density(scale - z, scale)
            } else {
                0.0
            }),
            ZnLaw::TruncatedRayleigh { sigma, cutoff } => Ok(if (0.0..=cutoff).contains(&z) {
                let two_var = 2.0 * sigma * sigma;
                2.0 * z / two_var * (-z * z / two_var).exp() / -(-cutoff * cutoff / two_var).exp_m1()
            } else {
                0.0
            }),
        }
    }

    /// Density evaluated from the gap `support_max − z`, which keeps the
    /// arcsine singularity at the top of the support accurate.
    fn pdf_below_top(&self, gap: f64) -> f64 {
        match self.law {
            ZnLaw::Arcsine { scale } => arcsine_density(gap, scale),
            _ => self.pdf(self.support_max() - gap).unwrap_or(0.0),
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        let p = match self.law {
            ZnLaw::PointMass { at } => {
                if z >= at {
                    1.0
                } else {
                    0.0
                }
            }
            ZnLaw::Arcsine { scale } => 2.0 * FRAC_1_PI * (z / scale).min(1.0).asin(),
            ZnLaw::TruncatedRayleigh { sigma, cutoff } => {
                let two_var = 2.0 * sigma * sigma;
                let z = z.min(cutoff);
                (-z * z / two_var).exp_m1() / (-cutoff * cutoff / two_var).exp_m1()
            }
        };
        p.clamp(0.0, 1.0)
    }
}

/// 2 / (π √(scale² − z²)) written in terms of the gap `scale − z`.
fn arcsine_density(gap: f64, scale: f64) -> f64 {
    2.0 * FRAC_1_PI / (gap * (2.0 * scale - gap)).sqrt()
}

/// Density of `Z_n` at `z`.
pub fn zn_pdf(n: u32, s: f64, z: f64) -> Result<f64> {
    if z < 0.0 {
        return Err(Error::Domain(format!("displacement must be non-negative, got {z}")));
    }
    ZnDistribution::new(n, s)?.pdf(z)
}

/// CDF of `Z_n` at `z`.
pub fn zn_cdf(n: u32, s: f64, z: f64) -> Result<f64> {
    Ok(ZnDistribution::new(n, s)?.cdf(z))
}

/// `arccos` with its argument clamped to [−1, 1].
pub(crate) fn clamped_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Law of `L_n(t)` while flying leg `n + 1`, `d > 0` metres in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InFlightLaw {
    pub zn: ZnDistribution,
    pub d: f64,
}

impl InFlightLaw {
    pub fn new(zn: ZnDistribution, d: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Domain(format!("leg distance must be positive, got {d}")));
        }
        Ok(Self { zn, d })
    }

    /// Closed support of the density.
    pub fn support(&self) -> (f64, f64) {
        let top = self.zn.support_max();
        match self.zn.law {
            ZnLaw::PointMass { at } => ((at - self.d).abs(), at + self.d),
            _ => (0.0, top + self.d),
        }
    }

    /// Points where the density is singular or has a kink: the support
    /// ends plus the images `|A − d|` of the top of the `Z_n` support and
    /// `d` (the image of `z = 0`).
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        let top = self.zn.support_max();
        let mut pts = vec![lo, hi];
        if !self.zn.is_atomic() {
            pts.push(self.d);
            pts.push((top - self.d).abs());
        }
        normalise_points(pts, lo, hi)
    }

    pub fn cdf(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        if l <= 0.0 {
            return Ok(0.0);
        }
        if l >= self.support().1 {
            return Ok(1.0);
        }
        let d = self.d;
        if let ZnLaw::PointMass { at } = self.zn.law {
            // P(cos Φ ≥ c) for uniform Φ.
            let c = (at * at + d * d - l * l) / (2.0 * at * d);
            return Ok(clamped_acos(c) * FRAC_1_PI);
        }
        let top = self.zn.support_max();
        let lower = (l - d).abs();
        let upper = (l + d).min(top);
        let mut p = self.zn.cdf(l - d);
        if upper > lower {
            let zn = self.zn;
            let top_gap = top - upper;
            let r = try_integrate_singular_offsets(
                |z, _, above| {
                    let f = zn.pdf_below_top(top_gap + above);
                    if z <= 0.0 {
                        return Ok(0.0);
                    }
                    let c = (z * z + d * d - l * l) / (2.0 * z * d);
                    Ok(FRAC_1_PI * clamped_acos(c) * f)
                },
                lower,
                upper,
                spec,
            )?;
            p += r.value;
        }
        Ok(p.clamp(0.0, 1.0))
    }

    pub fn pdf(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        let (lo, hi) = self.support();
        if l <= lo || l >= hi || l <= 0.0 {
            return Ok(0.0);
        }
        let d = self.d;
        if let ZnLaw::PointMass { .. } = self.zn.law {
            let gap_lo = (l - lo) * (l + lo);
            let gap_hi = (hi - l) * (hi + l);
            return Ok(2.0 * l * FRAC_1_PI / (gap_lo * gap_hi).sqrt());
        }
        let top = self.zn.support_max();
        let lower = (l - d).abs();
        let upper = (l + d).min(top);
        if upper <= lower {
            return Ok(0.0);
        }
        let zn = self.zn;
        let slack = l + d - upper;
        let top_gap = top - upper;
        let width = upper - lower;
        let half = 0.5 * width;
        let kernel = |z: f64, below: f64, above: f64| -> Result<f64> {
            let f = zn.pdf_below_top(top_gap + above);
            // (l² − (z − d)²)((z + d)² − l²) factored so the vanishing
            // terms come straight from the offsets.
            let prod = below * (below + 2.0 * lower) * (slack + above) * (z + d + l);
            if prod <= 0.0 {
                return Ok(0.0);
            }
            Ok(2.0 * l * f * FRAC_1_PI / prod.sqrt())
        };
        // Each half is mapped from its own end, where the integrand behaves
        // like 1/√(x(x + c)). At the upper end one of the kernel and the
        // arcsine density is exactly singular and the other sits `slack`
        // or `top_gap` beyond it.
        let low = try_integrate_near_singular(|x| kernel(lower + x, x, width - x), 2.0 * lower, half, spec)?;
        let high = try_integrate_near_singular(|x| kernel(upper - x, width - x, x), slack + top_gap, half, spec)?;
        Ok(low.value + high.value)
    }
}

fn normalise_points(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    pts
}

/// CDF of the in-flight displacement at time `t`.
pub fn ln_cdf(l: f64, t: f64, mobility: &MobilityConfig, spec: &QuadratureSpec) -> Result<f64> {
    let phase = phase_at(mobility, t)?;
    let PhaseKind::Flight { d } = phase.kind else {
        return Err(hover_error(t, phase));
    };
    if l < 0.0 {
        return Err(Error::Domain(format!("displacement must be non-negative, got {l}")));
    }
    if phase.n == 0 {
        return Ok(if l >= d { 1.0 } else { 0.0 });
    }
    let zn = ZnDistribution::new(phase.n, mobility.s)?;
    if d == 0.0 {
        return Ok(zn.cdf(l));
    }
    InFlightLaw::new(zn, d)?.cdf(l, spec)
}

/// Density of the in-flight displacement at time `t`.
pub fn ln_pdf(l: f64, t: f64, mobility: &MobilityConfig, spec: &QuadratureSpec) -> Result<f64> {
    let phase = phase_at(mobility, t)?;
    let PhaseKind::Flight { d } = phase.kind else {
        return Err(hover_error(t, phase));
    };
    if l < 0.0 {
        return Err(Error::Domain(format!("displacement must be non-negative, got {l}")));
    }
    if phase.n == 0 {
        return Err(Error::AtomicDistribution { n: 0, at: d });
    }
    let zn = ZnDistribution::new(phase.n, mobility.s)?;
    if d == 0.0 {
        return zn.pdf(l);
    }
    InFlightLaw::new(zn, d)?.pdf(l, spec)
}

fn hover_error(t: f64, phase: Phase) -> Error {
    Error::Phase(format!(
        "t = {t} s is a hover after {} flights; use the Z_n distribution",
        phase.n
    ))
}

/// Point mass of a mixed distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousLaw {
    Hover(ZnDistribution),
    InFlight(InFlightLaw),
}

impl ContinuousLaw {
    pub fn support(&self) -> (f64, f64) {
        match self {
            ContinuousLaw::Hover(zn) => (0.0, zn.support_max()),
            ContinuousLaw::InFlight(law) => law.support(),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ContinuousLaw::Hover(zn) => vec![0.0, zn.support_max()],
            ContinuousLaw::InFlight(law) => law.breakpoints(),
        }
    }

    pub fn pdf(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        match self {
            ContinuousLaw::Hover(zn) => zn.pdf(l),
            ContinuousLaw::InFlight(law) => law.pdf(l, spec),
        }
    }

    /// Density evaluated from the distances to the ends of the enclosing
    /// support interval; only used where the hover arcsine singularity sits
    /// exactly at that end.
    pub(crate) fn pdf_offsets(&self, l: f64, above_top: Option<f64>, spec: &QuadratureSpec) -> Result<f64> {
        match (self, above_top) {
            (ContinuousLaw::Hover(zn), Some(gap)) => Ok(zn.pdf_below_top(gap)),
            _ => self.pdf(l, spec),
        }
    }

    pub fn cdf(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        match self {
            ContinuousLaw::Hover(zn) => Ok(zn.cdf(l)),
            ContinuousLaw::InFlight(law) => law.cdf(l, spec),
        }
    }
}

/// Mixed (atomic plus continuous) law of `L(t)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementDistribution {
    pub t: f64,
    pub phase: Phase,
    pub atoms: Vec<Atom>,
    pub continuous: Option<ContinuousLaw>,
}

/// Law of `L(t)`, selected by the phase of the SRWP cycle at `t`.
pub fn displacement_distribution(t: f64, mobility: &MobilityConfig) -> Result<DisplacementDistribution> {
    let phase = phase_at(mobility, t)?;
    let atom = |location| DisplacementDistribution {
        t,
        phase,
        atoms: vec![Atom { location, mass: 1.0 }],
        continuous: None,
    };
    let continuous = |law| DisplacementDistribution {
        t,
        phase,
        atoms: Vec::new(),
        continuous: Some(law),
    };
    let d = phase.leg_distance();
    Ok(match phase.n {
        0 => atom(d),
        n => {
            let zn = ZnDistribution::new(n, mobility.s)?;
            if d == 0.0 {
                // Hovering, or exactly at the start of a leg.
                match zn.law {
                    ZnLaw::PointMass { at } => atom(at),
                    _ => continuous(ContinuousLaw::Hover(zn)),
                }
            } else {
                continuous(ContinuousLaw::InFlight(InFlightLaw::new(zn, d)?))
            }
        }
    })
}

impl DisplacementDistribution {
    /// Largest value `L(t)` can take.
    pub fn support_max(&self) -> f64 {
        let atoms = self.atoms.iter().map(|a| a.location).fold(0.0, f64::max);
        self.continuous.map_or(atoms, |c| atoms.max(c.support().1))
    }

    pub fn continuous_mass(&self) -> f64 {
        1.0 - self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// Kinks and singular points of the continuous density, including its
    /// support ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.continuous.map_or_else(Vec::new, |c| c.breakpoints())
    }

    /// `F_L(x; t)`: total mass at or below `x`, zero for negative `x`.
    pub fn cdf(&self, x: f64, spec: &QuadratureSpec) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        let atoms: f64 = self.atoms.iter().filter(|a| a.location <= x).map(|a| a.mass).sum();
        let cont = match &self.continuous {
            Some(c) => c.cdf(x, spec)?,
            None => 0.0,
        };
        Ok(atoms + cont)
    }

    /// Density of the continuous part (atoms excluded).
    pub fn pdf(&self, l: f64, spec: &QuadratureSpec) -> Result<f64> {
        match &self.continuous {
            Some(c) => c.pdf(l, spec),
            None => Ok(0.0),
        }
    }

    /// ∫_lo^hi f_L(l) g(l) dl over the continuous part, split at the
    /// density's breakpoints and at `kinks` of `g`, with each piece
    /// integrated by the endpoint-singular rule. The inner density
    /// evaluations use a spec ten times tighter than `spec`.
    pub fn integrate_continuous<G>(
        &self,
        mut g: G,
        lo: f64,
        hi: f64,
        kinks: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        let Some(law) = self.continuous else {
            return Ok(0.0);
        };
        let (s_lo, s_hi) = law.support();
        let lo = lo.max(s_lo);
        let hi = hi.min(s_hi);
        if hi <= lo {
            return Ok(0.0);
        }
        let mut pts = law.breakpoints();
        pts.push(lo);
        pts.push(hi);
        pts.extend_from_slice(kinks);
        let pts = normalise_points(pts, lo, hi);
        let inner = spec.tightened(10.0);
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let top_end = b == s_hi;
            let r = try_integrate_singular_offsets(
                |l, _, above| {
                    let f = law.pdf_offsets(l, top_end.then_some(above), &inner)?;
                    Ok(f * g(l)?)
                },
                a,
                b,
                spec,
            )?;
            total += r.value;
        }
        Ok(total)
    }

    /// Atom masses plus the integral of the continuous density.
    pub fn total_mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        Ok(atoms + self.integrate_continuous(|_| Ok(1.0), 0.0, f64::MAX, &[], spec)?)
    }
}

/// Fixed quadrature for expectations E[h(L)] of smooth `h`: the atoms plus
/// sin²-mapped Kronrod panels on every piece between breakpoints, with the
/// weights rescaled to the exact continuous mass.
#[derive(Debug, Clone, PartialEq)]
pub struct LawQuadrature {
    pub atoms: Vec<Atom>,
    /// `(l, weight)` pairs, ascending in `l`.
    pub nodes: Vec<(f64, f64)>,
}

impl LawQuadrature {
    pub fn new(dist: &DisplacementDistribution, panels: usize, spec: &QuadratureSpec) -> Result<Self> {
        let mut nodes = Vec::new();
        if let Some(law) = dist.continuous {
            let top = law.support().1;
            let inner = spec.tightened(10.0);
            for w in law.breakpoints().windows(2) {
                let (a, b) = (w[0], w[1]);
                for (theta, wt) in kronrod_nodes(0.0, FRAC_PI_2, panels) {
                    let (sin, cos) = theta.sin_cos();
                    let above = (b - a) * cos * cos;
                    let l = a + (b - a) * sin * sin;
                    let gap = (b == top).then_some(above);
                    let f = law.pdf_offsets(l, gap, &inner)?;
                    nodes.push((l, f * (b - a) * 2.0 * sin * cos * wt));
                }
            }
            let raw: f64 = nodes.iter().map(|n| n.1).sum();
            if !(raw > 0.0) {
                return Err(Error::NumericalConsistency(format!(
                    "continuous part at t = {} has no mass on its nodes",
                    dist.t
                )));
            }
            let scale = dist.continuous_mass() / raw;
            if (scale - 1.0).abs() > 1e-4 {
                return Err(Error::NumericalConsistency(format!(
                    "node weights at t = {} sum to {raw}",
                    dist.t
                )));
            }
            for n in &mut nodes {
                n.1 *= scale;
            }
        }
        Ok(Self {
            atoms: dist.atoms.clone(),
            nodes,
        })
    }

    pub fn expect<H>(&self, mut h: H) -> Result<f64>
    where
        H: FnMut(f64) -> Result<f64>,
    {
        let mut total = 0.0;
        for a in &self.atoms {
            total += a.mass * h(a.location)?;
        }
        for &(l, w) in &self.nodes {
            total += w * h(l)?;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn srwp() -> MobilityConfig {
        MobilityConfig::new(12.5, 5.0, 250.0).unwrap()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn zn_branches() {
        assert_eq!(
            ZnDistribution::new(1, 250.0).unwrap().law,
            ZnLaw::PointMass { at: 250.0 }
        );
        assert!(matches!(
            zn_pdf(1, 250.0, 250.0),
            Err(Error::AtomicDistribution { n: 1, .. })
        ));
        let p = zn_pdf(2, 250.0, 0.0).unwrap();
        assert!((p - 2.0 / (500.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!((p - 1.2732e-3).abs() < 1e-7);
        assert_eq!(zn_pdf(3, 250.0, 751.0).unwrap(), 0.0);
        assert!(zn_pdf(3, 250.0, -1.0).is_err());
        assert!(ZnDistribution::new(0, 1.0).is_err());
    }

    #[test]
    fn zn_cdf_closed_forms() {
        assert_eq!(zn_cdf(2, 250.0, 500.0).unwrap(), 1.0);
        assert!((zn_cdf(2, 250.0, 250.0 * 2f64.sqrt()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(zn_cdf(1, 250.0, 249.9).unwrap(), 0.0);
        assert_eq!(zn_cdf(1, 250.0, 250.0).unwrap(), 1.0);
        assert_eq!(zn_cdf(7, 250.0, 1750.0).unwrap(), 1.0);
        assert_eq!(zn_cdf(7, 250.0, -3.0).unwrap(), 0.0);
    }

    #[test]
    fn single_leg_cdf_median_and_support() {
        // t = 40: one flight done, 125 m into the second leg.
        let m = srwp();
        let l_med = (250f64 * 250.0 + 125.0 * 125.0).sqrt();
        assert!((ln_cdf(l_med, 40.0, &m, &q()).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(ln_cdf(375.0, 40.0, &m, &q()).unwrap(), 1.0);
        assert_eq!(ln_cdf(500.0, 40.0, &m, &q()).unwrap(), 1.0);
        assert_eq!(ln_cdf(124.0, 40.0, &m, &q()).unwrap(), 0.0);
    }

    #[test]
    fn single_leg_pdf_support() {
        let m = srwp();
        assert_eq!(ln_pdf(124.9, 40.0, &m, &q()).unwrap(), 0.0);
        assert_eq!(ln_pdf(375.1, 40.0, &m, &q()).unwrap(), 0.0);
        assert!(ln_pdf(125.1, 40.0, &m, &q()).unwrap() > 0.0);
        assert!(ln_pdf(374.9, 40.0, &m, &q()).unwrap() > 0.0);
    }

    #[test]
    fn hover_queries_are_phase_errors() {
        let m = srwp();
        assert!(matches!(ln_cdf(10.0, 27.0, &m, &q()), Err(Error::Phase(_))));
        assert!(matches!(ln_pdf(10.0, 3.0, &m, &q()), Err(Error::Phase(_))));
    }

    #[test]
    fn dispatch_examples() {
        let m = srwp();
        let at = |t| displacement_distribution(t, &m).unwrap();
        assert_eq!(
            at(3.0).atoms,
            vec![Atom {
                location: 0.0,
                mass: 1.0
            }]
        );
        assert_eq!(
            at(15.0).atoms,
            vec![Atom {
                location: 125.0,
                mass: 1.0
            }]
        );
        assert_eq!(
            at(27.0).atoms,
            vec![Atom {
                location: 250.0,
                mass: 1.0
            }]
        );
        assert!(matches!(at(52.0).continuous, Some(ContinuousLaw::Hover(_))));
        assert!(matches!(at(70.0).continuous, Some(ContinuousLaw::InFlight(_))));
        for t in [3.0, 15.0, 27.0] {
            assert!(at(t).continuous.is_none());
        }
    }

    #[test]
    fn cdf_treats_negative_as_zero() {
        let dist = displacement_distribution(3.0, &srwp()).unwrap();
        assert_eq!(dist.cdf(-100.0, &q()).unwrap(), 0.0);
        assert_eq!(dist.cdf(0.0, &q()).unwrap(), 1.0);
    }
}
