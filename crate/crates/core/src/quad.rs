//! Adaptive Gauss-Kronrod quadrature on the open unit interval.
//!
//! Integrands in this crate live on `(0, 1)` and are typically singular at
//! one or both ends (quantile functions blow up in the tails). The strategy:
//!
//! 1. integrate on the truncated interval `(eps, 1 - eps)` with a 7/15-point
//!    Gauss-Kronrod pair and global bisection, seeding breakpoints on a
//!    geometric ladder toward each edge;
//! 2. integrate the strips between successive halvings `eps / 2^k`, one edge
//!    at a time;
//! 3. extrapolate each edge's strip sequence geometrically (Aitken) to
//!    estimate the remaining tail, flagging divergence when strips stop
//!    shrinking.
//!
//! The same machinery drives the nested two-dimensional integrals used for
//! the asymptotic variance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerances and truncation settings for integrals over `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Initial truncation of the open interval at each edge.
    pub edge_epsilon: f64,
    /// Bisection budget for a single adaptive run.
    pub max_subdivisions: usize,
    /// Number of `eps` halvings used to extrapolate each tail.
    pub extrapolation_levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            edge_epsilon: 1e-6,
            max_subdivisions: 2000,
            extrapolation_levels: 6,
        }
    }
}

impl QuadratureConfig {
    /// Looser defaults for the double integrals behind the asymptotic
    /// variance.
    pub fn for_variance() -> Self {
        QuadratureConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-5,
            ..QuadratureConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.edge_epsilon > 0.0 && self.edge_epsilon < 1e-2) {
            return Err(invalid(format!("edge_epsilon must lie in (0, 1e-2), got {}", self.edge_epsilon)));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of one adaptive run on a finite interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
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
        self.cmp(other) == Ordering::Equal
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
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        err = f64::INFINITY;
    }
    Panel { a, b, value, error: err }
}

/// Adaptive GK15 over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (strictly increasing). Panels are summed in
/// left-to-right order with compensation, so the result does not depend on
/// the refinement history.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Integral {
    debug_assert!(points.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1]));
            evaluations += 15;
        }
    }
    let mut splits = 0usize;
    loop {
        let total: f64 = heap.iter().chain(done.iter()).map(|p| p.value).sum();
        let err: f64 = heap.iter().chain(done.iter()).map(|p| p.error).sum();
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol || splits >= max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 1e-15 * worst.a.abs().max(worst.b.abs()) {
            done.push(worst);
            continue;
        }
        heap.push(gk15(&mut f, worst.a, mid));
        heap.push(gk15(&mut f, mid, worst.b));
        evaluations += 30;
        splits += 1;
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: CompensatedSum = panels.iter().map(|p| p.value).collect();
    let abs_error: f64 = panels.iter().map(|p| p.error).sum();
    let value = value.total();
    Integral {
        value,
        abs_error,
        intervals: panels.len(),
        evaluations,
        converged: value.is_finite() && abs_error <= abs_tol.max(rel_tol * value.abs()),
    }
}

/// Breakpoints for `[lo, hi] ⊂ (0, 1)` on a decade ladder toward each edge.
pub fn unit_breakpoints(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut ladder: Vec<f64> = Vec::new();
    for k in (1..=15).rev() {
        ladder.push(10f64.powi(-k));
    }
    ladder.push(0.5);
    for k in 1..=15 {
        ladder.push(1.0 - 10f64.powi(-k));
    }
    for p in ladder {
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.push(hi);
    pts
}

/// Which end of the unit interval a tail strip touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
}

/// Strip sequence and extrapolated remainder for one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTail {
    pub strips: Vec<f64>,
    pub ratio: Option<f64>,
    pub correction: f64,
    pub error: f64,
}

/// An integral over the open unit interval (or square) with both tails
/// extrapolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitIntegral {
    pub value: f64,
    pub abs_error: f64,
    /// Integral over the truncated domain at the deepest level.
    pub truncated: f64,
    pub quadrature_error: f64,
    pub evaluations: usize,
    pub left: EdgeTail,
    pub right: EdgeTail,
}

/// Strips shrinking more slowly than this per halving are treated as a
/// divergent tail (the remainder would be at least 30x the last strip).
pub const DIVERGENCE_RATIO: f64 = 0.97;

fn estimate_tail(strips: &[f64], strip_noise: f64, negligible: f64) -> std::result::Result<EdgeTail, f64> {
    let mut tail = EdgeTail {
        strips: strips.to_vec(),
        ratio: None,
        correction: 0.0,
        error: 0.0,
    };
    let l = strips.len();
    if l == 0 {
        return Ok(tail);
    }
    let last = strips[l - 1];
    let resolved = |d: f64| d.abs() > 100.0 * strip_noise;
    if l >= 2 && resolved(last) && resolved(strips[l - 2]) {
        let r = last / strips[l - 2];
        tail.ratio = Some(r);
        if r >= DIVERGENCE_RATIO {
            return Err(r);
        }
    }
    if strips.iter().all(|d| d.abs() <= negligible) {
        tail.error = last.abs();
        return Ok(tail);
    }
    let geometric = |d: f64, r: f64| d * r / (1.0 - r);
    match tail.ratio {
        None if l == 1 => {
            // Single strip: assume the square-root tail implied by the
            // integrability of the weighted quantile process.
            let r = std::f64::consts::FRAC_1_SQRT_2;
            tail.correction = geometric(last, r);
            tail.error = tail.correction.abs();
        }
        None => {
            tail.error = strips.iter().map(|d| d.abs()).fold(0.0, f64::max);
        }
        Some(r) if r <= 0.0 => {
            // Sign change: oscillating noise, no geometric structure.
            tail.error = strips.iter().map(|d| d.abs()).fold(0.0, f64::max);
        }
        Some(r) => {
            tail.correction = geometric(last, r);
            let prev = (l >= 3 && resolved(strips[l - 3]))
                .then(|| strips[l - 2] / strips[l - 3])
                .filter(|&rp| rp > 0.0 && rp < DIVERGENCE_RATIO);
            tail.error = match prev {
                Some(rp) => ((last + tail.correction) - geometric(strips[l - 2], rp)).abs(),
                None => tail.correction.abs(),
            };
            // Power-law tails leave a second, faster component in the
            // strips; a two-ratio fit removes it when enough levels exist.
            if l >= 4 && strips[l - 4..].iter().all(|&d| resolved(d)) {
                if let Some(s2) = two_ratio_remainder(&strips[l - 4..]) {
                    let err2 = match (l >= 5 && resolved(strips[l - 5]))
                        .then(|| two_ratio_remainder(&strips[l - 5..l - 1]))
                        .flatten()
                    {
                        Some(prev) => (prev - (last + s2)).abs(),
                        None => (s2 - tail.correction).abs(),
                    };
                    if err2 < tail.error {
                        tail.correction = s2;
                        tail.error = err2;
                    }
                }
            }
        }
    }
    Ok(tail)
}

/// Remainder `Σ_{k>L} d_k` of a strip sequence modelled as
/// `d_k = A r^k + B q^k`, fitted to its last four terms (Prony). `None`
/// when the fit is ill-conditioned or a ratio is not contracting.
fn two_ratio_remainder(d: &[f64]) -> Option<f64> {
    let [a, b, c, e] = <[f64; 4]>::try_from(d).ok()?;
    let det = b * b - c * a;
    if det.abs() <= 1e-9 * b * b {
        return None;
    }
    // d_{k+2} = p1 d_{k+1} + p0 d_k
    let p1 = (c * b - e * a) / det;
    let p0 = (e * b - c * c) / det;
    let disc = p1 * p1 + 4.0 * p0;
    let modulus = if disc >= 0.0 {
        let sq = disc.sqrt();
        ((p1 + sq) / 2.0).abs().max(((p1 - sq) / 2.0).abs())
    } else {
        (-p0).sqrt()
    };
    if !(modulus < DIVERGENCE_RATIO) {
        return None;
    }
    let s = (p1 * e + p0 * (c + e)) / (1.0 - p1 - p0);
    s.is_finite().then_some(s)
}

/// Truncate-and-extrapolate driver. `core(eps)` integrates the truncated
/// domain; `strip(edge, eps_outer, eps_inner)` integrates the part of the
/// domain added at `edge` when the truncation shrinks from `eps_inner` to
/// `eps_outer < eps_inner`.
pub fn extrapolate_unit<C, S>(what: &str, cfg: &QuadratureConfig, core: C, mut strip: S) -> Result<UnitIntegral>
where
    C: FnOnce(f64) -> Integral,
    S: FnMut(Edge, f64, f64) -> Integral,
{
    cfg.validate()?;
    let base = core(cfg.edge_epsilon);
    if !base.value.is_finite() {
        return Err(Error::NonConvergence {
            what: what.to_string(),
            value: base.value,
            error: base.abs_error,
            reason: "non-finite integrand on the truncated domain".into(),
        });
    }
    let mut truncated = CompensatedSum::new();
    truncated.add(base.value);
    let mut quad_err = base.abs_error;
    let mut evaluations = base.evaluations;
    let mut strips = [Vec::new(), Vec::new()];
    let mut strip_noise = [0.0f64; 2];
    let mut eps = cfg.edge_epsilon;
    for _ in 0..cfg.extrapolation_levels {
        let next = 0.5 * eps;
        for (i, edge) in [Edge::Left, Edge::Right].into_iter().enumerate() {
            let s = strip(edge, next, eps);
            truncated.add(s.value);
            quad_err += s.abs_error;
            evaluations += s.evaluations;
            strip_noise[i] = strip_noise[i].max(s.abs_error);
            strips[i].push(s.value);
        }
        eps = next;
    }
    let truncated = truncated.total();
    let negligible = 0.01 * cfg.tolerance(truncated);
    let mut tails = Vec::with_capacity(2);
    for i in 0..2 {
        match estimate_tail(&strips[i], strip_noise[i], negligible) {
            Ok(t) => tails.push(t),
            Err(r) => {
                return Err(Error::NonConvergence {
                    what: what.to_string(),
                    value: truncated,
                    error: f64::INFINITY,
                    reason: format!(
                        "{} tail strips shrink by only {r:.3} per halving of eps (divergent tail)",
                        if i == 0 { "left" } else { "right" }
                    ),
                });
            }
        }
    }
    let right = tails.pop().expect("two tails");
    let left = tails.pop().expect("two tails");
    let value = truncated + left.correction + right.correction;
    let abs_error = quad_err + left.error + right.error;
    if !value.is_finite() || abs_error > cfg.tolerance(value) {
        return Err(Error::NonConvergence {
            what: what.to_string(),
            value,
            error: abs_error,
            reason: format!(
                "error estimate exceeds tolerance {:e} (tail errors {:e}/{:e})",
                cfg.tolerance(value),
                left.error,
                right.error
            ),
        });
    }
    Ok(UnitIntegral {
        value,
        abs_error,
        truncated,
        quadrature_error: quad_err,
        evaluations,
        left,
        right,
    })
}

/// `∫_0^1 f(u) du` for an integrand possibly singular at both ends.
pub fn integrate_unit<F: Fn(f64) -> f64>(what: &str, f: F, cfg: &QuadratureConfig) -> Result<UnitIntegral> {
    let strip_tol = |cfg: &QuadratureConfig| (1e-3 * cfg.abs_tol, 1e-3 * cfg.rel_tol.max(1e-12));
    let core = |eps: f64| {
        integrate(
            &f,
            &unit_breakpoints(eps, 1.0 - eps),
            // Leave part of the budget for the extrapolated tails.
            0.25 * cfg.abs_tol,
            0.25 * cfg.rel_tol,
            cfg.max_subdivisions,
        )
    };
    let strip = |edge: Edge, outer: f64, inner: f64| {
        let (a, b) = match edge {
            Edge::Left => (outer, inner),
            Edge::Right => (1.0 - inner, 1.0 - outer),
        };
        let (at, rt) = strip_tol(cfg);
        integrate(&f, &[a, b], at, rt, cfg.max_subdivisions)
    };
    extrapolate_unit(what, cfg, core, strip)
}

/// `∫_0^1 ∫_0^1 f(u, v) dv du` for a symmetric integrand `f(u, v) = f(v, u)`,
/// computed as twice the integral over the triangle `v < u` so the
/// diagonal kink of bridge-type kernels sits on the inner boundary.
pub fn integrate_unit_square_symmetric<F: Fn(f64, f64) -> f64>(what: &str, f: F, cfg: &QuadratureConfig) -> Result<UnitIntegral> {
    let inner_rel = (1e-3 * cfg.rel_tol).clamp(1e-12, 1e-7);
    let inner = |u: f64, lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        integrate(|v| f(u, v), &unit_breakpoints(lo, hi), 0.0, inner_rel, 400).value
    };
    // Triangle {eps < v < u < 1 - eps}.
    let core = |eps: f64| {
        let mut r = integrate(
            |u| inner(u, eps, u),
            &unit_breakpoints(eps, 1.0 - eps),
            0.5 * cfg.abs_tol,
            cfg.rel_tol,
            cfg.max_subdivisions,
        );
        r.value *= 2.0;
        r.abs_error *= 2.0;
        r
    };
    let strip = |edge: Edge, outer: f64, inner_eps: f64| {
        let (at, rt) = (1e-3 * cfg.abs_tol, (1e-3 * cfg.rel_tol).max(1e-10));
        let mut r = match edge {
            // v in (outer, inner_eps), u in (v, 1 - inner_eps); by symmetry
            // integrate over the first argument.
            Edge::Left => integrate(
                |v| integrate(|u| f(u, v), &unit_breakpoints(v, 1.0 - inner_eps), 0.0, inner_rel, 400).value,
                &[outer, inner_eps],
                at,
                rt,
                cfg.max_subdivisions,
            ),
            // u in (1 - inner_eps, 1 - outer), v in (outer, u).
            Edge::Right => integrate(
                |u| inner(u, outer, u),
                &[1.0 - inner_eps, 1.0 - outer],
                at,
                rt,
                cfg.max_subdivisions,
            ),
        };
        r.value *= 2.0;
        r.abs_error *= 2.0;
        r
    };
    extrapolate_unit(what, cfg, core, strip)
}
