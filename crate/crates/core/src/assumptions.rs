//! Numerical verification of the tail conditions on `(F, G, c)`.
//!
//! "Bounded on `(ū, 1)`" cannot be decided from finitely many points. It is
//! operationalized as: finite on a grid reaching `u = 1 - 1e-8`, supremum
//! below [`BOUNDED_SUP`], and a log-log slope over the last decade of the
//! grid no larger than [`BOUNDED_SLOPE`]. Reports carry this caveat.

use serde::{Deserialize, Serialize};

use crate::cost::{CostFunction, DEFAULT_TAU1};
use crate::dist::{Distribution, TailClass};
use crate::error::{invalid, Result};

pub const BOUNDED_SUP: f64 = 1e3;
pub const BOUNDED_SLOPE: f64 = 0.05;
/// Deepest upper-tail probability probed by the grids.
pub const Q_MIN: f64 = 1e-8;
pub const DEFAULT_GRID_SIZE: usize = 512;
/// Margin below which (CFG) counts as violated.
pub const CFG_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_ZETA: f64 = 2.5;
/// Lower end of the grid used by the regularly varying branch of the
/// sufficient condition for (FG).
pub const CSFG_U_BAR: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of one condition. A failing check always carries a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub status: Status,
    /// Location (in `u` or `x`, see `note`) of the extreme value.
    pub witness: Option<f64>,
    pub value: Option<f64>,
    pub note: Option<String>,
}

impl Check {
    fn new(pass: bool, witness: f64, value: f64, note: impl Into<String>) -> Self {
        Check {
            status: if pass { Status::Pass } else { Status::Fail },
            witness: Some(witness),
            value: Some(value),
            note: Some(note.into()),
        }
    }

    fn not_applicable(note: impl Into<String>) -> Self {
        Check {
            status: Status::NotApplicable,
            witness: None,
            value: None,
            note: Some(note.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// The `u`-grid used by the (FG) checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UGrid {
    pub u_bar: f64,
    pub u_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgReport {
    pub m: f64,
    /// `true` when `G` has the heavier right tail and the roles of `F` and
    /// `G` were swapped so that `τ = F⁻¹ - G⁻¹` is the right-tail gap.
    pub swapped: bool,
    pub fg1: Check,
    pub fg2: Check,
    pub fg3: Check,
    pub fg4: Check,
    pub fg5: Check,
    /// Inferred separation `τ₀ = min τ(u)` on the grid.
    pub tau0: f64,
    pub grid: UGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfgReport {
    pub check: Check,
    pub theta: f64,
    pub theta1: f64,
    /// Minimum over the grid of `(ψ∘l⁻¹)'(x) - 2 - 2θ/x`.
    pub margin: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsfgReport {
    pub check: Check,
    pub tail_class: TailClass,
}

/// All checks for one triple, both tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub fg_right: FgReport,
    pub fg_left: FgReport,
    pub theta1: f64,
    pub cfg_right: CfgReport,
    pub cfg_left: CfgReport,
    pub tail_sufficient: Check,
    pub zeta: f64,
    /// `None` when the heavier law has no declared tail class.
    pub csfg: Option<CsfgReport>,
    pub status: Status,
    pub caveat: String,
}

const CAVEAT: &str =
    "boundedness is a numerical heuristic: sup below 1e3 on a grid to 1-F = 1e-8 and last-decade log-log slope at most 0.05";

/// Upper-tail probabilities `q = 1 - u` from `q_hi` down to `Q_MIN`,
/// geometrically spaced.
fn q_grid(q_hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (q_hi.ln(), Q_MIN.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Least-squares slope of `ln value` against `ln(1/q)` over the last decade.
fn last_decade_slope(qs: &[f64], values: &[f64]) -> f64 {
    let q_end = qs[qs.len() - 1];
    let pts: Vec<(f64, f64)> = qs
        .iter()
        .zip(values)
        .filter(|(q, v)| **q <= 10.0 * q_end && **v > 0.0)
        .map(|(q, v)| (-q.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Boundedness heuristic over a `q`-grid; the witness is `u = 1 - q` at
/// the supremum.
fn bounded_check(qs: &[f64], values: &[f64], what: &str) -> Check {
    let (mut sup, mut arg) = (f64::NEG_INFINITY, qs[0]);
    for (q, v) in qs.iter().zip(values) {
        if !(v.is_finite()) {
            return Check::new(false, 1.0 - q, f64::INFINITY, format!("{what} is not finite at u = 1 - {q:e}"));
        }
        if *v > sup {
            sup = *v;
            arg = *q;
        }
    }
    let slope = last_decade_slope(qs, values);
    let pass = sup < BOUNDED_SUP && slope <= BOUNDED_SLOPE;
    Check::new(
        pass,
        1.0 - arg,
        sup,
        format!("{what}: sup at u = 1 - {arg:e}, last-decade slope {slope:.4}"),
    )
}

/// `ln h` at `u = 1 - q`.
fn log_h(d: &Distribution, q: f64) -> f64 {
    d.pdf(d.isf_unchecked(q)).ln()
}

/// `(1 - u) |(log h)'(u)|`, which equals `|d log h / dt|` for
/// `t = -ln(1 - u)`; central differences in `t`.
fn fg2_value(d: &Distribution, q: f64) -> f64 {
    let t = -q.ln();
    let step = 1e-4 * t.max(1.0);
    let (qp, qm) = ((-(t + step)).exp(), (-(t - step)).exp());
    ((log_h(d, qp) - log_h(d, qm)) / (2.0 * step)).abs()
}

fn far_quantile(d: &Distribution) -> f64 {
    d.isf_unchecked(Q_MIN)
}

/// Checks (FG1)–(FG5) on the right tail above `m`. `m` defaults to the
/// largest 0.9-quantile, floored at 1. When both laws are bounded above
/// there is no tail to examine and every check is `NotApplicable`.
pub fn check_fg(f: &Distribution, g: &Distribution, m: Option<f64>, grid_size: usize) -> Result<FgReport> {
    f.validate()?;
    g.validate()?;
    if grid_size < 16 {
        return Err(invalid("grid_size must be at least 16"));
    }
    let (fh, gh) = (f.support().1, g.support().1);
    if fh.is_finite() && gh.is_finite() {
        let na = || Check::not_applicable(format!("both laws are bounded above ({fh}, {gh})"));
        return Ok(FgReport {
            m: fh.max(gh),
            swapped: gh > fh,
            fg1: na(),
            fg2: na(),
            fg3: na(),
            fg4: na(),
            fg5: na(),
            tau0: (fh - gh).abs(),
            grid: UGrid {
                u_bar: 1.0,
                u_max: 1.0,
                points: 0,
            },
        });
    }
    let lower = 0f64.max(f.quantile_unchecked(0.5)).max(g.quantile_unchecked(0.5));
    let m = match m {
        Some(m) if m > lower && m.is_finite() => m,
        Some(m) => return Err(invalid(format!("m = {m} must exceed max(0, F^-1(1/2), G^-1(1/2)) = {lower}"))),
        None => f.quantile_unchecked(0.9).max(g.quantile_unchecked(0.9)).max(1.0),
    };
    let swapped = far_quantile(g) > far_quantile(f);
    let (x, y) = if swapped { (g, f) } else { (f, g) };
    let u_bar = f.cdf(m).max(g.cdf(m));
    if !(u_bar < 1.0 - Q_MIN) {
        return Err(invalid(format!("m = {m} is beyond the probed tail (F(m) = {u_bar})")));
    }
    let qs = q_grid(1.0 - u_bar, grid_size);

    // (FG1): positive finite densities along both quantile grids.
    let mut fg1 = Check::new(true, 1.0 - qs[0], 0.0, "f, g > 0 on the grid");
    let mut min_density = f64::INFINITY;
    for &q in &qs {
        for d in [x, y] {
            let h = d.pdf(d.isf_unchecked(q));
            if !(h > 0.0 && h.is_finite()) {
                fg1 = Check::new(false, 1.0 - q, h, format!("density of {d} vanishes or is not finite"));
            }
            min_density = min_density.min(h);
        }
        if fg1.status == Status::Fail {
            break;
        }
    }
    if fg1.status == Status::Pass {
        fg1.value = Some(min_density);
    }

    let worst = |a: Check, b: Check| -> Check {
        match (a.status, b.status) {
            (Status::Fail, _) => a,
            (_, Status::Fail) => b,
            _ if b.value > a.value => b,
            _ => a,
        }
    };
    let fg2_of = |d: &Distribution| {
        let vals: Vec<f64> = qs.iter().map(|&q| fg2_value(d, q)).collect();
        bounded_check(&qs, &vals, &format!("(1-u)|(log h)'| for {d}"))
    };
    let h_of = |d: &Distribution| -> Vec<f64> { qs.iter().map(|&q| d.companion_upper(q).unwrap_or(f64::INFINITY)).collect() };
    let fg2 = worst(fg2_of(x), fg2_of(y));
    let (hx, hy) = (h_of(x), h_of(y));
    let fg3 = worst(
        bounded_check(&qs, &hx, &format!("H for {x}")),
        bounded_check(&qs, &hy, &format!("H for {y}")),
    );
    // (FG5) is the sum of the two previous quantities in density form.
    let fg5_of = |d: &Distribution, h: &[f64]| {
        let vals: Vec<f64> = qs.iter().zip(h).map(|(&q, hv)| hv + fg2_value(d, q)).collect();
        bounded_check(&qs, &vals, &format!("(1-F)/f (1/x + |f'|/f) for {d}"))
    };
    let fg5 = worst(fg5_of(x, &hx), fg5_of(y, &hy));

    // (FG4): τ(u) bounded away from zero.
    let (mut tau0, mut arg) = (f64::INFINITY, qs[0]);
    for &q in &qs {
        let t = x.isf_unchecked(q) - y.isf_unchecked(q);
        if t < tau0 {
            tau0 = t;
            arg = q;
        }
    }
    let scale = 1.0 + x.isf_unchecked(arg).abs();
    let fg4 = Check::new(tau0 > 1e-12 * scale, 1.0 - arg, tau0, format!("min tau(u) at u = 1 - {arg:e}"));

    Ok(FgReport {
        m,
        swapped,
        fg1,
        fg2,
        fg3,
        fg4,
        fg5,
        tau0,
        grid: UGrid {
            u_bar,
            u_max: 1.0 - Q_MIN,
            points: grid_size,
        },
    })
}

/// Default (CFG) grid in `l`-space: from `l` at the `1 - 1e-8` quantile of
/// `F` to `l` at the `1 - 1e-250` quantile, never below `l(τ₁)`.
pub fn default_cfg_grid(f: &Distribution, c: &CostFunction, points: usize) -> Vec<f64> {
    let lo_x = f.isf_unchecked(Q_MIN).max(DEFAULT_TAU1);
    let hi_x = f.isf_unchecked(1e-250).max(lo_x * 2.0);
    let (a, b) = (c.l(lo_x).max(c.l(DEFAULT_TAU1)).max(1e-3), c.l(hi_x));
    let b = if b > a { b } else { a + 1.0 };
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            if a > 0.0 {
                a * (b / a).powf(t)
            } else {
                a + (b - a) * t
            }
        })
        .collect()
}

/// `φ(x) = ψ_F(l⁻¹(x))`, infinite beyond a bounded right end.
fn phi(f: &Distribution, c: &CostFunction, x: f64) -> f64 {
    f.tail_exponent(c.l_inverse(x)).unwrap_or(f64::INFINITY)
}

/// (CFG): `(ψ_F∘l⁻¹)'(x) ≥ 2 + 2θ/x` on the `l`-space grid.
pub fn check_cfg(f: &Distribution, c: &CostFunction, theta: f64, x_grid: Option<&[f64]>) -> Result<CfgReport> {
    f.validate()?;
    c.validate()?;
    let theta1 = c.theta1();
    if !(theta > 1.0 + theta1) {
        return Err(invalid(format!("theta = {theta} must exceed 1 + theta1 = {}", 1.0 + theta1)));
    }
    let owned;
    let grid = match x_grid {
        Some(g) => g,
        None => {
            owned = default_cfg_grid(f, c, DEFAULT_GRID_SIZE);
            &owned
        }
    };
    if grid.is_empty() {
        return Err(invalid("empty grid"));
    }
    let right_end = f.support().1;
    if right_end.is_finite() {
        return Ok(CfgReport {
            check: Check::not_applicable(format!("{f} is bounded above by {right_end}")),
            theta,
            theta1,
            margin: f64::INFINITY,
            grid_lo: grid[0],
            grid_hi: grid[grid.len() - 1],
            points: grid.len(),
        });
    }
    let floor = c.l(DEFAULT_TAU1);
    if let Some(bad) = grid.iter().find(|&&x| !(x >= floor) || x <= 0.0) {
        return Err(invalid(format!("grid point {bad} is below l(tau1) = {floor} or not positive")));
    }
    let (mut margin, mut arg) = (f64::INFINITY, grid[0]);
    for &x in grid {
        let h = 1e-5 * x.abs().max(1.0);
        let (p, m) = (phi(f, c, x + h), phi(f, c, x - h));
        let deriv = if p.is_infinite() { f64::INFINITY } else { (p - m) / (2.0 * h) };
        let mg = deriv - 2.0 - 2.0 * theta / x;
        if mg < margin {
            margin = mg;
            arg = x;
        }
    }
    let check = Check::new(
        margin >= -CFG_TOLERANCE,
        arg,
        margin,
        format!("min of (psi o l^-1)' - 2 - 2 theta/x over the l-grid, at l = {arg:.6e}"),
    );
    Ok(CfgReport {
        check,
        theta,
        theta1,
        margin,
        grid_lo: grid[0],
        grid_hi: grid[grid.len() - 1],
        points: grid.len(),
    })
}

/// Default data-space grid for the sufficient condition: geometric from
/// the 0.9-quantile (at least `τ₁`) to the `1 - 1e-8` quantile.
pub fn default_x_grid(f: &Distribution, points: usize) -> Vec<f64> {
    let lo = f.quantile_unchecked(0.9).max(DEFAULT_TAU1).max(1e-3);
    let hi = f.isf_unchecked(Q_MIN).max(2.0 * lo);
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

/// `ψ_F(x) ≥ ζ l(x)` at every grid point, `ζ > 2`.
pub fn check_tail_sufficient(f: &Distribution, c: &CostFunction, zeta: f64, x_grid: Option<&[f64]>) -> Result<Check> {
    f.validate()?;
    c.validate()?;
    if !(zeta > 2.0) {
        return Err(invalid(format!("zeta must exceed 2, got {zeta}")));
    }
    let owned;
    let grid = match x_grid {
        Some(g) => g,
        None => {
            owned = default_x_grid(f, DEFAULT_GRID_SIZE);
            &owned
        }
    };
    if grid.is_empty() {
        return Err(invalid("empty grid"));
    }
    let (mut worst, mut arg) = (f64::INFINITY, grid[0]);
    for &x in grid {
        let psi = f.tail_exponent(x).unwrap_or(f64::INFINITY);
        let gap = psi - zeta * c.l(x);
        if gap < worst {
            worst = gap;
            arg = x;
        }
    }
    Ok(Check::new(worst >= 0.0, arg, worst, "min of psi(x) - zeta l(x) over the x-grid"))
}

/// Sufficient condition for (FG) from the declared tail class of `F`.
/// Slowly varying tails need `x ψ'(x) ≥ 1`; regularly varying tails of
/// index `γ₁ > 0` need `H(u) ≤ 1/(γ₀ log(1/(1-u)))` with `γ₀ = γ₁/2`.
pub fn check_csfg(f: &Distribution) -> Result<CsfgReport> {
    f.validate()?;
    let class = f.tail_class()?;
    let check = match class {
        TailClass::SlowlyVarying { .. } => {
            let grid = default_x_grid(f, DEFAULT_GRID_SIZE);
            let (mut worst, mut arg) = (f64::INFINITY, grid[0]);
            for &x in &grid {
                let h = 1e-5 * x;
                let d = (f.tail_exponent(x + h)? - f.tail_exponent(x - h)?) / (2.0 * h);
                if x * d < worst {
                    worst = x * d;
                    arg = x;
                }
            }
            Check::new(
                worst >= 1.0 - 1e-6,
                arg,
                worst,
                "slowly varying branch: min of x psi'(x), must be at least 1",
            )
        }
        TailClass::RegularlyVarying { index } => {
            let gamma0 = index / 2.0;
            let qs = q_grid(1.0 - CSFG_U_BAR, DEFAULT_GRID_SIZE);
            let (mut worst, mut arg) = (f64::NEG_INFINITY, qs[0]);
            for &q in &qs {
                let h = f.companion_upper(q)?;
                let ratio = h * gamma0 * (-q.ln());
                if ratio > worst {
                    worst = ratio;
                    arg = q;
                }
            }
            Check::new(
                worst <= 1.0 + 1e-9,
                1.0 - arg,
                worst,
                format!("regularly varying branch: max of H(u) gamma0 log(1/(1-u)) with gamma0 = {gamma0}"),
            )
        }
    };
    Ok(CsfgReport { check, tail_class: class })
}

/// Options for [`check_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Defaults to `1 + θ₁ + 0.01`.
    pub theta: Option<f64>,
    pub zeta: f64,
    pub m: Option<f64>,
    pub grid_size: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            theta: None,
            zeta: DEFAULT_ZETA,
            m: None,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// The law with the larger far right quantile.
pub(crate) fn heavier<'a>(f: &'a Distribution, g: &'a Distribution) -> &'a Distribution {
    if far_quantile(g) > far_quantile(f) {
        g
    } else {
        f
    }
}

/// Runs every checker on both tails. Left tails are handled by reflecting
/// the laws, `(c(-x,-y), -X, -Y)`.
pub fn check_all(f: &Distribution, g: &Distribution, c: &CostFunction, opts: &CheckOptions) -> Result<AssumptionReport> {
    c.validate()?;
    let theta1 = c.theta1();
    let theta = opts.theta.unwrap_or(1.0 + theta1 + 0.01);
    let (fr, gr) = (f.reflect(), g.reflect());
    let fg_right = check_fg(f, g, opts.m, opts.grid_size)?;
    let fg_left = check_fg(&fr, &gr, opts.m, opts.grid_size)?;
    let heavy_right = heavier(f, g);
    let heavy_left = heavier(&fr, &gr);
    let cfg_right = check_cfg(heavy_right, c, theta, None)?;
    let cfg_left = check_cfg(heavy_left, c, theta, None)?;
    let tail_sufficient = check_tail_sufficient(heavy_right, c, opts.zeta, None)?;
    let csfg = match check_csfg(heavy_right) {
        Ok(r) => Some(r),
        Err(crate::Error::UnknownTailClass(_)) => None,
        Err(e) => return Err(e),
    };
    let required = [
        &fg_right.fg1,
        &fg_right.fg2,
        &fg_right.fg3,
        &fg_right.fg4,
        &fg_left.fg1,
        &fg_left.fg2,
        &fg_left.fg3,
        &fg_left.fg4,
        &cfg_right.check,
        &cfg_left.check,
    ];
    let status = if required.iter().all(|c| c.passed()) {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(AssumptionReport {
        fg_right,
        fg_left,
        theta1,
        cfg_right,
        cfg_left,
        tail_sufficient,
        zeta: opts.zeta,
        csfg,
        status,
        caveat: CAVEAT.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Distribution {
        s.parse().unwrap()
    }

    fn c(s: &str) -> CostFunction {
        s.parse().unwrap()
    }

    #[test]
    fn fg_translation_model() {
        let r = check_fg(&d("locscale(pareto(3),1,1)"), &d("pareto(3)"), None, 256).unwrap();
        assert_eq!(r.fg4.status, Status::Pass);
        assert!((r.tau0 - 1.0).abs() < 1e-9, "{}", r.tau0);
        assert!(!r.swapped);
        // Same pair in the other order is reoriented.
        let r = check_fg(&d("pareto(3)"), &d("locscale(pareto(3),1,1)"), None, 256).unwrap();
        assert!(r.swapped && r.fg4.status == Status::Pass);
    }

    #[test]
    fn fg2_pareto_and_fg3_weibull() {
        let r = check_fg(&d("pareto(2)"), &d("locscale(pareto(2),1,-0.5)"), None, 256).unwrap();
        assert_eq!(r.fg2.status, Status::Pass);
        let x_only = check_fg(&d("pareto(2)"), &d("pareto(4)"), None, 256).unwrap();
        // h(u) = p q^(1+1/p) for Pareto(p), so |d log h/dt| = 1 + 1/p; the
        // report keeps the larger of the two laws.
        assert!((x_only.fg2.value.unwrap() - 1.5).abs() < 1e-6, "{:?}", x_only.fg2);
        let w = check_fg(&d("weibull(2)"), &d("locscale(weibull(2),1,-1)"), None, 256).unwrap();
        assert_eq!(w.fg3.status, Status::Pass);
        assert_eq!(w.fg1.status, Status::Pass);
    }

    #[test]
    fn fg4_fails_for_identical_laws() {
        let r = check_fg(&d("gaussian(0,1)"), &d("gaussian(0,1)"), None, 128).unwrap();
        assert_eq!(r.fg4.status, Status::Fail);
        assert_eq!(r.fg4.value, Some(0.0));
        assert!(r.fg4.witness.is_some());
    }

    #[test]
    fn fg_rejects_small_m() {
        assert!(check_fg(&d("gaussian(3,1)"), &d("gaussian(0,1)"), Some(2.0), 64).is_err());
    }

    #[test]
    fn cfg_examples() {
        let w2 = c("power(2)");
        assert_eq!(check_cfg(&d("pareto(5)"), &w2, 1.01, None).unwrap().check.status, Status::Pass);
        let bad = check_cfg(&d("pareto(3)"), &w2, 1.01, None).unwrap();
        assert_eq!(bad.check.status, Status::Fail);
        assert!(bad.check.witness.is_some());
        assert_eq!(check_cfg(&d("gaussian(0,1)"), &w2, 1.01, None).unwrap().check.status, Status::Pass);
        assert!(check_cfg(&d("gaussian(0,1)"), &w2, 1.0, None).is_err());
        assert!(check_cfg(&d("gaussian(0,1)"), &c("exppower(2)"), 1.5, None).is_err());
    }

    #[test]
    fn tail_sufficient_examples() {
        let w2 = c("power(2)");
        let grid: Vec<f64> = (0..=60).map(|i| 2.0 + 0.1 * i as f64).collect();
        assert_eq!(
            check_tail_sufficient(&d("gaussian(0,1)"), &w2, 2.5, Some(&grid)).unwrap().status,
            Status::Pass
        );
        assert_eq!(check_tail_sufficient(&d("pareto(4)"), &w2, 2.5, None).unwrap().status, Status::Fail);
        assert_eq!(
            check_tail_sufficient(&d("pareto(10)"), &w2, 2.5, None).unwrap().status,
            Status::Pass
        );
        assert!(check_tail_sufficient(&d("pareto(10)"), &w2, 2.0, None).is_err());
    }

    #[test]
    fn csfg_examples() {
        let w = check_csfg(&d("weibull(2)")).unwrap();
        assert_eq!(w.check.status, Status::Pass);
        // H(u) = 1/(q log(1/(1-u))) makes the ratio exactly gamma0/q = 1/2.
        assert!((w.check.value.unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(check_csfg(&d("pareto(3)")).unwrap().check.status, Status::Pass);
        assert_eq!(check_csfg(&d("pareto(0.5)")).unwrap().check.status, Status::Fail);
        assert_eq!(check_csfg(&d("gaussian(0,1)")).unwrap().check.status, Status::Pass);
        assert!(matches!(
            check_csfg(&d("reflect(pareto(3))")),
            Err(crate::Error::UnknownTailClass(_))
        ));
    }

    #[test]
    fn full_report_for_gaussian_pair() {
        let r = check_all(&d("gaussian(0,1)"), &d("gaussian(2,1)"), &c("power(2)"), &CheckOptions::default()).unwrap();
        assert_eq!(r.status, Status::Pass, "{r:#?}");
        assert!(r.fg_right.swapped);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["fg_right"]["fg4"]["status"], "pass");
        assert!(json["cfg_right"]["check"]["value"].is_number());
    }
}
