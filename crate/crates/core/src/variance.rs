//! The asymptotic variance `σ²(Π, c)` of `√n (W_c(F_n, G_n) - W_c(F, G))`,
//! its closed-form special cases, a data-only plug-in estimate and the
//! resulting normal confidence intervals.
//!
//! With `a_x(u) = ∂_x c(F⁻¹(u), G⁻¹(u)) / h_X(u)` and `a_y` likewise,
//!
//! ```text
//! σ² = ∬ (a_x(u) a_x(v) + a_y(u) a_y(v)) (u∧v - uv)
//!      + a_x(u) a_y(v) (Π(u,v) - uv) + a_y(u) a_x(v) (Π(v,u) - uv)  du dv.
//! ```

use serde::{Deserialize, Serialize};

use crate::cost::CostFunction;
use crate::coupling::Coupling;
use crate::dist::Distribution;
use crate::error::{check_open_unit, invalid, Error, Result};
use crate::estimate::{sorted, PairedSample};
use crate::quad::{integrate_unit, integrate_unit_square_symmetric, QuadratureConfig, UnitIntegral};
use crate::special::{norm_pdf, norm_ppf};

/// How a variance value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    Quadrature,
    ClosedFormGaussian,
    ClosedFormLocationScale,
    ClosedFormW2Independent,
    PlugIn,
}

/// One separately integrated piece of the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub name: String,
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    /// Observed strip ratios per halving of the truncation, when resolved.
    pub left_ratio: Option<f64>,
    pub right_ratio: Option<f64>,
}

impl TermReport {
    fn from_integral(name: &str, r: &UnitIntegral) -> Self {
        TermReport {
            name: name.to_string(),
            value: r.value,
            abs_error: r.abs_error,
            evaluations: r.evaluations,
            left_ratio: r.left.ratio,
            right_ratio: r.right.ratio,
        }
    }

    fn exact(name: &str, value: f64, abs_error: f64) -> Self {
        TermReport {
            name: name.to_string(),
            value,
            abs_error,
            evaluations: 0,
            left_ratio: None,
            right_ratio: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlugInDiagnostics {
    pub grid_points: usize,
    pub eps: f64,
    pub bandwidth_x: f64,
    pub bandwidth_y: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub terms: Vec<TermReport>,
    pub edge_epsilon: Option<f64>,
    pub extrapolation_levels: Option<usize>,
    /// Magnitude of a small negative total that was clamped to zero.
    pub clamped: f64,
    pub warnings: Vec<String>,
    pub plug_in: Option<PlugInDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub value: f64,
    pub est_error: f64,
    pub method: VarianceMethod,
    pub diagnostics: Diagnostics,
}

/// Which marginal fluctuates in a one-sample limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    X,
    Y,
}

/// Negative totals within this floor (or the error estimate, if larger)
/// are treated as round-off and clamped to zero.
pub const CLAMP_FLOOR: f64 = 1e-8;

fn finalize(method: VarianceMethod, value: f64, est_error: f64, mut diagnostics: Diagnostics, what: &str) -> Result<VarianceResult> {
    if value < 0.0 {
        if value < -CLAMP_FLOOR.max(est_error) {
            return Err(Error::NonConvergence {
                what: what.to_string(),
                value,
                error: est_error,
                reason: "variance integral is negative beyond its error estimate".into(),
            });
        }
        diagnostics.clamped = -value;
    }
    Ok(VarianceResult {
        value: value.max(0.0),
        est_error,
        method,
        diagnostics,
    })
}

/// Bridge kernel `u∧v - uv` in the stable form `lo (1 - hi)`.
#[inline]
fn bridge(u: f64, v: f64) -> f64 {
    if u <= v {
        u * (1.0 - v)
    } else {
        v * (1.0 - u)
    }
}

/// Quantile-scale weights `a_x`, `a_y` for a gradient field.
struct Weights<'a, G> {
    f: &'a Distribution,
    g: &'a Distribution,
    grad: G,
}

impl<G: Fn(f64, f64) -> (f64, f64)> Weights<'_, G> {
    #[inline]
    fn at(&self, u: f64) -> (f64, f64) {
        let x = self.f.quantile_unchecked(u);
        let y = self.g.quantile_unchecked(u);
        let (gx, gy) = (self.grad)(x, y);
        let ax = if gx == 0.0 { 0.0 } else { gx / self.f.pdf(x) };
        let ay = if gy == 0.0 { 0.0 } else { gy / self.g.pdf(y) };
        (ax, ay)
    }
}

fn guard_config(q: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-6,
        rel_tol: 1e-3,
        ..*q
    }
}

/// Finiteness guard: `∫ |a(u)| √(u(1-u)) du` bounds the square root of
/// each diagonal term, so a divergent guard means the double integral
/// cannot be trusted.
fn tail_guard(what: &str, a: impl Fn(f64) -> f64, q: &QuadratureConfig) -> Result<f64> {
    integrate_unit(what, |u| a(u).abs() * (u * (1.0 - u)).sqrt(), &guard_config(q))
        .map(|r| r.value)
        .map_err(|e| match e {
            Error::NonConvergence {
                what,
                value,
                error,
                reason,
            } => Error::NonConvergence {
                what,
                value,
                error,
                reason: format!("tail guard failed, variance is likely infinite: {reason}"),
            },
            other => other,
        })
}

fn degenerate_warning(f: &Distribution, g: &Distribution) -> Option<String> {
    let max_gap = (1..100)
        .map(|i| {
            let u = i as f64 / 100.0;
            (f.quantile_unchecked(u) - g.quantile_unchecked(u)).abs()
        })
        .fold(0.0, f64::max);
    (max_gap < 1e-12).then(|| "identical marginals: the limit is degenerate (F = G)".to_string())
}

fn checked_gradient(c: &CostFunction) -> Result<impl Fn(f64, f64) -> (f64, f64) + '_> {
    if !c.is_differentiable() {
        return Err(Error::Nondifferentiable(c.to_string()));
    }
    Ok(move |x: f64, y: f64| c.gradient(x, y).unwrap_or((f64::NAN, f64::NAN)))
}

/// `σ²(Π, c)` by 2D quadrature.
pub fn sigma2(f: &Distribution, g: &Distribution, c: &CostFunction, cp: &Coupling, q: &QuadratureConfig) -> Result<VarianceResult> {
    c.validate()?;
    sigma2_with_gradient(f, g, checked_gradient(c)?, cp, q)
}

/// `σ²` for an arbitrary gradient field `(x, y) ↦ (∂_x c, ∂_y c)`.
pub fn sigma2_with_gradient<G>(f: &Distribution, g: &Distribution, grad: G, cp: &Coupling, q: &QuadratureConfig) -> Result<VarianceResult>
where
    G: Fn(f64, f64) -> (f64, f64),
{
    f.validate()?;
    g.validate()?;
    cp.validate()?;
    q.validate()?;
    let w = Weights { f, g, grad };
    let what = format!("sigma2({f}, {g}; {cp})");
    let mut diagnostics = Diagnostics {
        edge_epsilon: Some(q.edge_epsilon),
        extrapolation_levels: Some(q.extrapolation_levels),
        ..Default::default()
    };
    diagnostics.warnings.extend(degenerate_warning(f, g));

    tail_guard(&format!("{what} guard on X"), |u| w.at(u).0, q)?;
    tail_guard(&format!("{what} guard on Y"), |u| w.at(u).1, q)?;

    let xx = integrate_unit_square_symmetric(&format!("{what} xx term"), |u, v| w.at(u).0 * w.at(v).0 * bridge(u, v), q)?;
    let yy = integrate_unit_square_symmetric(&format!("{what} yy term"), |u, v| w.at(u).1 * w.at(v).1 * bridge(u, v), q)?;
    diagnostics.terms.push(TermReport::from_integral("xx", &xx));
    diagnostics.terms.push(TermReport::from_integral("yy", &yy));
    let mut value = xx.value + yy.value;
    let mut err = xx.abs_error + yy.abs_error;
    if *cp != Coupling::Independent {
        let cross = integrate_unit_square_symmetric(
            &format!("{what} cross term"),
            |u, v| {
                let (axu, ayu) = w.at(u);
                let (axv, ayv) = w.at(v);
                axu * ayv * cp.copula_excess_unchecked(u, v) + ayu * axv * cp.copula_excess_unchecked(v, u)
            },
            q,
        )?;
        diagnostics.terms.push(TermReport::from_integral("cross", &cross));
        value += cross.value;
        err += cross.abs_error;
    } else {
        diagnostics.terms.push(TermReport::exact("cross", 0.0, 0.0));
    }
    finalize(VarianceMethod::Quadrature, value, err, diagnostics, &what)
}

/// The full integrand of `σ²` at `(u, v)`, symmetric in its arguments.
pub fn variance_kernel(f: &Distribution, g: &Distribution, c: &CostFunction, cp: &Coupling, u: f64, v: f64) -> Result<f64> {
    check_open_unit(u)?;
    check_open_unit(v)?;
    let w = Weights {
        f,
        g,
        grad: checked_gradient(c)?,
    };
    let ((axu, ayu), (axv, ayv)) = (w.at(u), w.at(v));
    Ok(
        (axu * axv + ayu * ayv) * bridge(u, v)
            + axu * ayv * cp.copula_excess_unchecked(u, v)
            + ayu * axv * cp.copula_excess_unchecked(v, u),
    )
}

/// One-sample variance `σ_x²` (side `X`) or `σ_y²`: the limit of
/// `√n (W_c(F_n, G) - W_c(F, G))` and its mirror.
pub fn sigma2_one_sample(f: &Distribution, g: &Distribution, c: &CostFunction, side: Side, q: &QuadratureConfig) -> Result<VarianceResult> {
    c.validate()?;
    sigma2_one_sample_with_gradient(f, g, checked_gradient(c)?, side, q)
}

pub fn sigma2_one_sample_with_gradient<G>(
    f: &Distribution,
    g: &Distribution,
    grad: G,
    side: Side,
    q: &QuadratureConfig,
) -> Result<VarianceResult>
where
    G: Fn(f64, f64) -> (f64, f64),
{
    f.validate()?;
    g.validate()?;
    q.validate()?;
    let w = Weights { f, g, grad };
    let pick = |u: f64| match side {
        Side::X => w.at(u).0,
        Side::Y => w.at(u).1,
    };
    let what = format!("sigma2_{}({f}, {g})", if side == Side::X { "x" } else { "y" });
    tail_guard(&format!("{what} guard"), pick, q)?;
    let r = integrate_unit_square_symmetric(&what, |u, v| pick(u) * pick(v) * bridge(u, v), q)?;
    let diagnostics = Diagnostics {
        terms: vec![TermReport::from_integral(if side == Side::X { "xx" } else { "yy" }, &r)],
        edge_epsilon: Some(q.edge_epsilon),
        extrapolation_levels: Some(q.extrapolation_levels),
        ..Default::default()
    };
    finalize(VarianceMethod::Quadrature, r.value, r.abs_error, diagnostics, &what)
}

/// The independent-samples `W₂²` variance
/// `4 ∬ (u∧v - uv)(1/(f f) + 1/(g g)) τ(u) τ(v) du dv`, `τ = F⁻¹ - G⁻¹`.
pub fn sigma2_w2_independent(f: &Distribution, g: &Distribution, q: &QuadratureConfig) -> Result<VarianceResult> {
    f.validate()?;
    g.validate()?;
    q.validate()?;
    let what = format!("sigma2_w2({f}, {g})");
    let tau_over = |u: f64| {
        let x = f.quantile_unchecked(u);
        let y = g.quantile_unchecked(u);
        let t = x - y;
        if t == 0.0 {
            (0.0, 0.0)
        } else {
            (t / f.pdf(x), t / g.pdf(y))
        }
    };
    let mut diagnostics = Diagnostics {
        edge_epsilon: Some(q.edge_epsilon),
        extrapolation_levels: Some(q.extrapolation_levels),
        ..Default::default()
    };
    diagnostics.warnings.extend(degenerate_warning(f, g));
    tail_guard(
        &format!("{what} guard"),
        |u| {
            let (a, b) = tau_over(u);
            a.abs() + b.abs()
        },
        q,
    )?;
    let r = integrate_unit_square_symmetric(
        &what,
        |u, v| {
            let (fu, gu) = tau_over(u);
            let (fv, gv) = tau_over(v);
            4.0 * bridge(u, v) * (fu * fv + gu * gv)
        },
        q,
    )?;
    diagnostics.terms.push(TermReport::from_integral("kernel", &r));
    finalize(VarianceMethod::ClosedFormW2Independent, r.value, r.abs_error, diagnostics, &what)
}

/// Gaussian special case for `N(ν, ζ²)` against `N(μ, ξ²)`, `c = |x-y|²`,
/// independent samples.
pub fn sigma2_gaussian(nu: f64, zeta: f64, mu: f64, xi: f64) -> Result<VarianceResult> {
    if !(zeta > 0.0 && xi > 0.0) || !(nu.is_finite() && mu.is_finite()) {
        return Err(invalid("gaussian parameters must be finite with positive sds"));
    }
    let s = zeta * zeta + xi * xi;
    let value = 4.0 * s * (nu - mu).powi(2) + 2.0 * s * (zeta - xi).powi(2);
    finalize(
        VarianceMethod::ClosedFormGaussian,
        value,
        0.0,
        Diagnostics::default(),
        "sigma2_gaussian",
    )
}

/// Location-scale family `F((x - b)/a)` against `F((x - b')/a')` for a
/// symmetric base `F` of unit variance:
/// `4 (a² + a'²)((b - b')² + V₄ (a - a')² / 4)` with `V₄ = Var(X²)`.
pub fn sigma2_location_scale(base: &Distribution, a: f64, b: f64, a2: f64, b2: f64) -> Result<VarianceResult> {
    base.validate()?;
    if !(a > 0.0 && a2 > 0.0 && a.is_finite() && a2.is_finite()) || !(b.is_finite() && b2.is_finite()) {
        return Err(invalid("scales must be positive and shifts finite"));
    }
    // Deep tail extrapolation: the fourth moment feeds the result directly.
    let q = QuadratureConfig {
        abs_tol: 1e-8,
        rel_tol: 1e-8,
        extrapolation_levels: 12,
        ..QuadratureConfig::default()
    };
    let moment =
        |k: i32| -> Result<UnitIntegral> { integrate_unit(&format!("E X^{k} under {base}"), |u| base.quantile_unchecked(u).powi(k), &q) };
    let m1 = moment(1)?;
    let m2 = moment(2)?;
    let m4 = moment(4)?;
    let var = m2.value - m1.value * m1.value;
    if m1.value.abs() >= 1e-6 {
        return Err(invalid(format!("base law {base} is not centered (mean {:e})", m1.value)));
    }
    if (var - 1.0).abs() >= 1e-6 {
        return Err(invalid(format!("base law {base} does not have unit variance (variance {var})")));
    }
    let v4 = m4.value - m2.value * m2.value;
    let v4_err = m4.abs_error + 2.0 * m2.value.abs() * m2.abs_error;
    let scale = 4.0 * (a * a + a2 * a2);
    let value = scale * ((b - b2).powi(2) + 0.25 * v4 * (a - a2).powi(2));
    let est_error = scale * 0.25 * (a - a2).powi(2) * v4_err;
    let mut diagnostics = Diagnostics::default();
    diagnostics.terms.push(TermReport::from_integral(
        "v4",
        &UnitIntegral {
            value: v4,
            abs_error: v4_err,
            ..m4
        },
    ));
    if a == a2 && b == b2 {
        diagnostics.warnings.push("identical laws: the limit is degenerate (F = G)".into());
    }
    finalize(
        VarianceMethod::ClosedFormLocationScale,
        value,
        est_error,
        diagnostics,
        "sigma2_location_scale",
    )
}

/// Number of grid points in the plug-in double sum.
pub const PLUG_IN_GRID: usize = 256;

/// Data-only estimate of `σ²`: empirical quantiles, Gaussian-kernel
/// density quantiles and the empirical copula on a logit-spaced grid over
/// `(eps, 1 - eps)`. `eps` defaults to `1/n` and the bandwidth to
/// `1.06 sd n^(-1/5)` per column. The reported error is the change
/// against a half-size grid.
pub fn plug_in_sigma2(s: &PairedSample, c: &CostFunction, bandwidth: Option<f64>, eps: Option<f64>) -> Result<VarianceResult> {
    let n = s.n();
    if n < 50 {
        return Err(invalid(format!("plug-in variance needs n >= 50, got {n}")));
    }
    c.validate()?;
    let grad = checked_gradient(c)?;
    let eps = eps.unwrap_or(1.0 / n as f64);
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("plug-in eps must lie in (0, 1/2), got {eps}")));
    }
    let xs = sorted(s.xs());
    let ys = sorted(s.ys());
    for (name, col) in [("x", &xs), ("y", &ys)] {
        if col[0] == col[n - 1] {
            return Err(Error::DegenerateSample(format!("column {name} is constant")));
        }
    }
    let bw = |col: &[f64]| -> Result<f64> {
        match bandwidth {
            Some(b) if b > 0.0 && b.is_finite() => Ok(b),
            Some(b) => Err(invalid(format!("bandwidth must be positive, got {b}"))),
            None => Ok(1.06 * sd(col) * (n as f64).powf(-0.2)),
        }
    };
    let (bx, by) = (bw(&xs)?, bw(&ys)?);
    let ranks_x = ranks(s.xs());
    let ranks_y = ranks(s.ys());
    let fine = plug_in_grid_sum(&xs, &ys, &ranks_x, &ranks_y, bx, by, &grad, eps, PLUG_IN_GRID);
    let coarse = plug_in_grid_sum(&xs, &ys, &ranks_x, &ranks_y, bx, by, &grad, eps, PLUG_IN_GRID / 2);
    let mut diagnostics = Diagnostics {
        plug_in: Some(PlugInDiagnostics {
            grid_points: PLUG_IN_GRID,
            eps,
            bandwidth_x: bx,
            bandwidth_y: by,
        }),
        ..Default::default()
    };
    for (name, (v, vc)) in ["xx", "yy", "cross"].iter().zip(fine.iter().zip(&coarse)) {
        diagnostics.terms.push(TermReport::exact(name, *v, (v - vc).abs()));
    }
    let value: f64 = fine.iter().sum();
    let est_error = (value - coarse.iter().sum::<f64>()).abs();
    // Grid effects can push a near-zero quadratic form slightly negative.
    if value < 0.0 {
        diagnostics.clamped = -value;
    }
    Ok(VarianceResult {
        value: value.max(0.0),
        est_error,
        method: VarianceMethod::PlugIn,
        diagnostics,
    })
}

fn sd(col: &[f64]) -> f64 {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// One-based ranks, ties broken by position.
fn ranks(col: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..col.len()).collect();
    idx.sort_by(|&i, &j| col[i].total_cmp(&col[j]));
    let mut r = vec![0; col.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        r[i] = rank + 1;
    }
    r
}

fn kde(sorted_col: &[f64], x: f64, b: f64) -> f64 {
    // Kernel mass beyond 9 bandwidths is below 1e-17 relative.
    let lo = sorted_col.partition_point(|&v| v < x - 9.0 * b);
    let hi = sorted_col.partition_point(|&v| v <= x + 9.0 * b);
    let s: f64 = sorted_col[lo..hi].iter().map(|&v| norm_pdf((x - v) / b)).sum();
    s / (sorted_col.len() as f64 * b)
}

/// Returns the `(xx, yy, cross)` parts of the plug-in double sum.
#[allow(clippy::too_many_arguments)]
fn plug_in_grid_sum<G: Fn(f64, f64) -> (f64, f64)>(
    xs: &[f64],
    ys: &[f64],
    ranks_x: &[usize],
    ranks_y: &[usize],
    bx: f64,
    by: f64,
    grad: &G,
    eps: f64,
    m: usize,
) -> [f64; 3] {
    let n = xs.len();
    let nf = n as f64;
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let (t_lo, t_hi) = (logit(eps), logit(1.0 - eps));
    let dt = (t_hi - t_lo) / m as f64;
    let mut us = Vec::with_capacity(m);
    let mut wts = Vec::with_capacity(m);
    let mut ut = Vec::with_capacity(m);
    let mut counts = Vec::with_capacity(m);
    let mut ax = Vec::with_capacity(m);
    let mut ay = Vec::with_capacity(m);
    for i in 0..m {
        let t = t_lo + (i as f64 + 0.5) * dt;
        let u = 1.0 / (1.0 + (-t).exp());
        let k = (u * nf).floor() as usize;
        us.push(u);
        wts.push(u * (1.0 - u) * dt);
        ut.push(k as f64 / nf);
        counts.push(k);
        let j = crate::estimate::quantile_index(n, u);
        let (x, y) = (xs[j], ys[j]);
        let (gx, gy) = grad(x, y);
        ax.push(if gx == 0.0 { 0.0 } else { gx / kde(xs, x, bx) });
        ay.push(if gy == 0.0 { 0.0 } else { gy / kde(ys, y, by) });
    }
    // Empirical copula at (k_i/n, k_j/n): bin each observation by the
    // first grid index whose rank threshold covers it, then cumulate.
    let bin = |r: usize| counts.partition_point(|&k| k < r);
    let mut hist = vec![0u32; (m + 1) * (m + 1)];
    for (&rx, &ry) in ranks_x.iter().zip(ranks_y) {
        hist[bin(rx) * (m + 1) + bin(ry)] += 1;
    }
    let mut cum = vec![0u32; (m + 1) * (m + 1)];
    for i in 0..=m {
        let mut row = 0u32;
        for j in 0..=m {
            row += hist[i * (m + 1) + j];
            cum[i * (m + 1) + j] = row + if i > 0 { cum[(i - 1) * (m + 1) + j] } else { 0 };
        }
    }
    let excess = |i: usize, j: usize| cum[i * (m + 1) + j] as f64 / nf - ut[i] * ut[j];
    let (mut xx, mut yy, mut cross) = (0.0, 0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let w = wts[i] * wts[j];
            let k = ut[i].min(ut[j]) - ut[i] * ut[j];
            xx += w * ax[i] * ax[j] * k;
            yy += w * ay[i] * ay[j] * k;
            cross += w * (ax[i] * ay[j] * excess(i, j) + ay[i] * ax[j] * excess(j, i));
        }
    }
    [xx, yy, cross]
}

/// `point ∓ z_{(1+level)/2} √(σ²/n)`.
pub fn confidence_interval(point: f64, sigma2: f64, n: usize, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level must lie in (0,1), got {level}")));
    }
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !(sigma2 >= 0.0) {
        return Err(invalid(format!("variance must be nonnegative, got {sigma2}")));
    }
    let z = norm_ppf(0.5 * (1.0 + level));
    let half = z * (sigma2 / n as f64).sqrt();
    Ok((point - half, point + half))
}
