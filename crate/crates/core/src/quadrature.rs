//! Adaptive Gauss-Kronrod quadrature with endpoint-singularity and
//! semi-infinite front ends.
//!
//! Every analytic quantity in the crate reduces to nested one-dimensional
//! integrals. The integrands come in three flavours: smooth on a finite
//! interval, inverse-square-root singular at one or both ends, and
//! semi-infinite with a decaying tail. Each flavour has a dedicated entry
//! point here; all of them share one globally adaptive bisection driver
//! built on the 15-point Kronrod extension of the 7-point Gauss rule.
//!
//! The `try_*` variants accept fallible integrands so that nested integrals
//! can propagate inner failures instead of smuggling NaNs outward.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances shared by every quadrature entry point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Relative size of the neglected tail at which semi-infinite
    /// integrals are truncated.
    pub tail_epsilon: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_subdivisions: 2000,
            tail_epsilon: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rel_tol) {
            return Err(Error::Config(format!(
                "quad.rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !ok(self.abs_tol) {
            return Err(Error::Config(format!(
                "quad.abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !ok(self.tail_epsilon) {
            return Err(Error::Config(format!(
                "quad.tail_epsilon must be positive, got {}",
                self.tail_epsilon
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("quad.max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    /// Same spec with relative and absolute tolerances divided by `factor`.
    /// Inner integrals of a nest use this so that their error stays below
    /// the resolution the outer level asks for.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: (self.rel_tol / factor).max(1e-14),
            abs_tol: (self.abs_tol / factor).max(f64::MIN_POSITIVE),
            ..*self
        }
    }
}

/// Result of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

impl Integral {
    const ZERO: Integral = Integral {
        value: 0.0,
        abs_error: 0.0,
        evaluations: 0,
    };

    fn add(self, other: Integral) -> Integral {
        Integral {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

// Kronrod abscissae (descending, last is the centre) and weights; the Gauss
// weights belong to the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn checked<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let y = f(x)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NumericalConsistency(format!(
            "integrand returned {y} at x = {x:e}"
        )))
    }
}

/// One 15-point Gauss-Kronrod panel with the QUADPACK error heuristic.
fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_centre = checked(f, centre)?;

    let mut res_k = f_centre * WGK[7];
    let mut res_g = f_centre * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = checked(f, centre - dx)?;
        let f2 = checked(f, centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_centre - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive bisection over an initial partition `points`
/// (ascending, at least two entries).
fn adapt<F>(f: &mut F, points: &[f64], spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(f, w[0], w[1])?);
            evaluations += 15;
        }
    }

    let mut subdivisions = 0;
    loop {
        let value: f64 = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
        let error: f64 = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= tol {
            return Ok(Integral {
                value,
                abs_error: error,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::NoConvergence {
                estimate: value,
                error,
                subdivisions,
            });
        };
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NoConvergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if worst.b - worst.a <= 1e3 * f64::EPSILON * scale || mid <= worst.a || mid >= worst.b {
            // Panel is at the floating-point resolution limit.
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        heap.push(gk15(f, worst.a, mid)?);
        heap.push(gk15(f, mid, worst.b)?);
        evaluations += 30;
        subdivisions += 1;
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a > b {
        return Err(Error::Domain(format!("lower limit {a} exceeds upper limit {b}")));
    }
    Ok(())
}

/// ∫_a^b f for integrands finite on the open interval.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_adaptive(|x| Ok(f(x)), a, b, spec)
}

pub fn try_integrate_adaptive<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_interval(a, b)?;
    if a == b {
        return Ok(Integral::ZERO);
    }
    adapt(&mut f, &[a, b], spec)
}

/// Adaptive quadrature over `[points[0], points[last]]` with the listed
/// interior points as forced panel boundaries (kinks, jumps).
pub fn try_integrate_with_breakpoints<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 {
        return Err(Error::Domain("breakpoint list needs at least the two limits".into()));
    }
    check_interval(points[0], points[points.len() - 1])?;
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("breakpoints must be ascending".into()));
    }
    adapt(&mut f, points, spec)
}

/// ∫_a^b f for integrands with at worst inverse-square-root behaviour at
/// either end, via z = a + (b − a)·sin²θ.
pub fn integrate_singular<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_singular_offsets(|x, _, _| Ok(f(x)), a, b, spec)
}

pub fn try_integrate_singular<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_singular_offsets(|x, _, _| f(x), a, b, spec)
}

/// Like [`try_integrate_singular`], but the integrand also receives the
/// distances `x − a` and `b − x`, computed without cancellation from the
/// substitution. Integrands whose singular factors vanish at the limits
/// should build those factors from the offsets.
pub fn try_integrate_singular_offsets<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64, f64, f64) -> Result<f64>,
{
    check_interval(a, b)?;
    let width = b - a;
    if width == 0.0 {
        return Ok(Integral::ZERO);
    }
    let mapped = |theta: f64| -> Result<f64> {
        let (sin, cos) = theta.sin_cos();
        let below = width * sin * sin;
        let above = width * cos * cos;
        let x = (a + below).min(b);
        Ok(f(x, below, above)? * width * 2.0 * sin * cos)
    };
    let mut mapped = mapped;
    adapt(&mut mapped, &[0.0, FRAC_PI_2], spec)
}

/// Nodes and weights of the 15-point Kronrod rule applied on `panels`
/// equal panels of [a, b].
pub fn kronrod_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(15 * panels);
    let step = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + step * p as f64;
        let centre = lo + 0.5 * step;
        let half = 0.5 * step;
        for j in 0..7 {
            out.push((centre - half * XGK[j], half * WGK[j]));
        }
        out.push((centre, half * WGK[7]));
        for j in (0..7).rev() {
            out.push((centre + half * XGK[j], half * WGK[j]));
        }
    }
    out
}

/// ∫_0^width f(x) dx for integrands behaving like 1/√(x(x + c)) near 0,
/// which is nearly 1/x when `c` is small against `width`. The map
/// x = c·sinh²u turns that factor into a constant. `c` is floored at
/// ε·width, so at c = 0 (a genuinely divergent integral) the result is a
/// large finite value rather than an error.
pub fn try_integrate_near_singular<F>(mut f: F, c: f64, width: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!(
            "singularity offset must be non-negative, got {c}"
        )));
    }
    check_interval(0.0, width)?;
    if width == 0.0 {
        return Ok(Integral::ZERO);
    }
    let c = c.max(f64::EPSILON * width);
    let top = (width / c).sqrt().asinh();
    let mut mapped = |u: f64| -> Result<f64> {
        let (sh, ch) = (u.sinh(), u.cosh());
        let x = (c * sh * sh).min(width);
        Ok(f(x)? * 2.0 * c * sh * ch)
    };
    adapt(&mut mapped, &[0.0, top], spec)
}

/// ∫_a^∞ f for eventually decreasing integrands; the first panel has unit
/// width.
pub fn integrate_semi_infinite<F>(mut f: F, a: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_semi_infinite(|x| Ok(f(x)), a, 1.0, spec)
}

/// ∫_a^∞ f by a doubling scan: panels [a, a+w], [a+w, a+2w], [a+2w, a+4w],
/// … are integrated adaptively until the tail estimate
/// max(|last panel|, (U − a)·|f(U)|) falls below `tail_epsilon` times the
/// partial sum. `width` should be the natural length scale of `f`.
pub fn try_integrate_semi_infinite<F>(mut f: F, a: f64, width: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MAX_UPPER: f64 = 1e300;
    if !a.is_finite() {
        return Err(Error::Domain(format!("lower limit must be finite, got {a}")));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Domain(format!("initial width must be positive, got {width}")));
    }
    let mut total = adapt(&mut f, &[a, a + width], spec)?;
    let mut upper = a + width;
    loop {
        let next = a + 2.0 * (upper - a);
        if !next.is_finite() || next > MAX_UPPER {
            return Err(Error::TailNotConverged {
                partial: total.value,
                tail: total.abs_error,
                upper,
            });
        }
        let panel = adapt(&mut f, &[upper, next], spec)?;
        total = total.add(panel);
        upper = next;
        let edge = (upper - a) * checked(&mut f, upper)?.abs();
        let tail = panel.value.abs().max(edge);
        let target = spec.tail_epsilon * total.value.abs();
        if tail <= target || (total.value == 0.0 && tail == 0.0) {
            total.abs_error += tail;
            total.evaluations += 1;
            return Ok(total);
        }
    }
}
