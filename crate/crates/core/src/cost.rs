//! Good transport costs `c(x, y)` and their tail representation
//! `c = ρ(|x - y|) = exp(l(|x - y|))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::descriptor::{self, parse_error};
use crate::error::{invalid, Error, Result};

/// Distance below which the tail representation is not relied upon.
pub const DEFAULT_TAU1: f64 = 1e-3;

/// Absolute slack allowed on rectangle increments in the measure check.
pub const MEASURE_SLACK: f64 = 1e-12;

/// Supported costs. `LogPower` is `exp(log(1 + t)^(1+β)) - 1` and `ExpPower`
/// is `exp(t^β) - 1`, both in the distance `t = |x - y|`. `Quantile` is the
/// asymmetric check loss `(x - y)(α - 1{x < y})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFunction {
    Power { alpha: f64 },
    LogPower { beta: f64 },
    ExpPower { beta: f64 },
    Quantile { alpha: f64 },
}

/// Result of the brute-force rectangle scan for property 𝒫.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureCheck {
    pub holds: bool,
    /// Largest increment `c(x',y') - c(x',y) - c(x,y') + c(x,y)` found.
    pub worst_increment: f64,
    /// Rectangle `[x, x'] × [y, y']` attaining it.
    pub worst_rectangle: [f64; 4],
}

impl CostFunction {
    /// `|x - y|^α`, `α > 1`. The Wasserstein-1 case `α = 1` is rejected
    /// because its derivative does not vanish on the diagonal.
    pub fn power(alpha: f64) -> Result<Self> {
        let c = CostFunction::Power { alpha };
        c.validate()?;
        Ok(c)
    }

    pub fn log_power(beta: f64) -> Result<Self> {
        let c = CostFunction::LogPower { beta };
        c.validate()?;
        Ok(c)
    }

    pub fn exp_power(beta: f64) -> Result<Self> {
        let c = CostFunction::ExpPower { beta };
        c.validate()?;
        Ok(c)
    }

    pub fn quantile(alpha: f64) -> Result<Self> {
        let c = CostFunction::Quantile { alpha };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CostFunction::Power { alpha } => {
                if alpha == 1.0 {
                    Err(invalid("power(1) is W1, which fails the diagonal contraction condition"))
                } else if alpha > 1.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("power exponent must exceed 1, got {alpha}")))
                }
            }
            CostFunction::LogPower { beta } | CostFunction::ExpPower { beta } => {
                if beta > 0.0 && beta.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("cost parameter beta must be positive, got {beta}")))
                }
            }
            CostFunction::Quantile { alpha } => {
                if alpha > 0.0 && alpha < 1.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("quantile level must lie in (0,1), got {alpha}")))
                }
            }
        }
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        match *self {
            CostFunction::Quantile { alpha } => {
                let d = x - y;
                if d < 0.0 {
                    (alpha - 1.0) * d
                } else {
                    alpha * d
                }
            }
            _ => self.rho((x - y).abs()),
        }
    }

    /// `ρ(t)` for `t ≥ 0`; for `Quantile` this is the cost of a positive gap.
    pub fn rho(&self, t: f64) -> f64 {
        match *self {
            CostFunction::Power { alpha } => t.powf(alpha),
            CostFunction::LogPower { beta } => t.ln_1p().powf(1.0 + beta).exp_m1(),
            CostFunction::ExpPower { beta } => t.powf(beta).exp_m1(),
            CostFunction::Quantile { alpha } => alpha * t,
        }
    }

    /// `ρ'(t)` for `t ≥ 0`.
    pub fn rho_prime(&self, t: f64) -> f64 {
        match *self {
            CostFunction::Power { alpha } => alpha * t.powf(alpha - 1.0),
            CostFunction::LogPower { beta } => {
                let lg = t.ln_1p();
                lg.powf(1.0 + beta).exp() * (1.0 + beta) * lg.powf(beta) / (1.0 + t)
            }
            CostFunction::ExpPower { beta } => {
                let tb = t.powf(beta);
                beta * t.powf(beta - 1.0) * tb.exp()
            }
            CostFunction::Quantile { alpha } => alpha,
        }
    }

    /// `l(t)` with `ρ = exp(l)` away from the diagonal. The offset costs use
    /// `log(1 + ρ)`, which differs from `log ρ` only near `t = 0`.
    pub fn l(&self, t: f64) -> f64 {
        match *self {
            CostFunction::Power { alpha } => alpha * t.ln(),
            CostFunction::LogPower { beta } => t.ln_1p().powf(1.0 + beta),
            CostFunction::ExpPower { beta } => t.powf(beta),
            CostFunction::Quantile { alpha } => (alpha * t).ln(),
        }
    }

    pub fn l_prime(&self, t: f64) -> f64 {
        match *self {
            CostFunction::Power { alpha } => alpha / t,
            CostFunction::LogPower { beta } => (1.0 + beta) * t.ln_1p().powf(beta) / (1.0 + t),
            CostFunction::ExpPower { beta } => beta * t.powf(beta - 1.0),
            CostFunction::Quantile { .. } => 1.0 / t,
        }
    }

    /// Closed-form inverse of `l`.
    pub fn l_inverse(&self, y: f64) -> f64 {
        match *self {
            CostFunction::Power { alpha } => (y / alpha).exp(),
            CostFunction::LogPower { beta } => y.powf(1.0 / (1.0 + beta)).exp_m1(),
            CostFunction::ExpPower { beta } => y.powf(1.0 / beta),
            CostFunction::Quantile { alpha } => y.exp() / alpha,
        }
    }

    /// Regular-variation index of `l`.
    pub fn gamma(&self) -> f64 {
        match *self {
            CostFunction::ExpPower { beta } => beta,
            _ => 0.0,
        }
    }

    /// Limit of `log(x l'(x)) / log l(x)`, set to 1 when `γ > 0`.
    pub fn theta1(&self) -> f64 {
        match *self {
            CostFunction::Power { .. } | CostFunction::Quantile { .. } => 0.0,
            CostFunction::LogPower { beta } => beta / (1.0 + beta),
            CostFunction::ExpPower { .. } => 1.0,
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, CostFunction::Quantile { .. })
    }

    /// `(∂c/∂x, ∂c/∂y)`.
    pub fn gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let d = x - y;
        match *self {
            CostFunction::Quantile { .. } => Err(Error::Nondifferentiable(self.to_string())),
            CostFunction::ExpPower { beta } if d == 0.0 && beta <= 1.0 => Err(Error::Nondifferentiable(self.to_string())),
            _ if d == 0.0 => Ok((0.0, 0.0)),
            _ => {
                let g = d.signum() * self.rho_prime(d.abs());
                Ok((g, -g))
            }
        }
    }

    /// A Lipschitz modulus `d(m, τ)` of `c` on
    /// `D_m(τ) = {max(|x|,|y|) ≤ m, |x - y| ≤ τ}` in the `ℓ¹` metric.
    ///
    /// The band is convex, so the modulus is the supremum of the partials,
    /// here `sup ρ'` over gaps `[0, min(τ, 2m)]`.
    pub fn diagonal_contraction(&self, m: f64, tau: f64) -> Result<f64> {
        if !(m > 0.0 && tau > 0.0) {
            return Err(invalid(format!("m and tau must be positive, got m={m}, tau={tau}")));
        }
        let t_max = tau.min(2.0 * m);
        match *self {
            CostFunction::Power { alpha } => Ok(alpha * t_max.powf(alpha - 1.0)),
            CostFunction::Quantile { .. } => Err(Error::Unsupported(format!(
                "{self} has a kink on the diagonal, so no contraction modulus vanishes with tau"
            ))),
            CostFunction::ExpPower { beta } if beta <= 1.0 => Err(Error::Unsupported(format!(
                "{self} has rho'(0) > 0, so no contraction modulus vanishes with tau"
            ))),
            _ => {
                const N: usize = 256;
                Ok((1..=N).map(|i| self.rho_prime(t_max * i as f64 / N as f64)).fold(0.0, f64::max))
            }
        }
    }

    /// Brute-force scan of all grid rectangles for property 𝒫.
    pub fn check_measure_property(&self, grid: &[f64]) -> Result<MeasureCheck> {
        check_measure_property_with(|x, y| self.evaluate(x, y), grid)
    }
}

/// Property 𝒫 scan for an arbitrary cost callable: every rectangle
/// increment over grid points must be `≤ MEASURE_SLACK`.
///
/// Cost is quartic in the grid size.
pub fn check_measure_property_with(c: impl Fn(f64, f64) -> f64, grid: &[f64]) -> Result<MeasureCheck> {
    if grid.len() < 2 {
        return Err(invalid("measure check needs at least two grid points"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("measure check grid must be strictly increasing"));
    }
    let g = grid.len();
    let table: Vec<f64> = (0..g * g).map(|k| c(grid[k / g], grid[k % g])).collect();
    let at = |i: usize, j: usize| table[i * g + j];
    let mut worst = f64::NEG_INFINITY;
    let mut rect = [0.0; 4];
    for i in 0..g {
        for i2 in i + 1..g {
            for j in 0..g {
                for j2 in j + 1..g {
                    let inc = at(i2, j2) - at(i2, j) - at(i, j2) + at(i, j);
                    if inc > worst {
                        worst = inc;
                        rect = [grid[i], grid[i2], grid[j], grid[j2]];
                    }
                }
            }
        }
    }
    Ok(MeasureCheck {
        holds: worst <= MEASURE_SLACK,
        worst_increment: worst,
        worst_rectangle: rect,
    })
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostFunction::Power { alpha } => write!(f, "power({alpha})"),
            CostFunction::LogPower { beta } => write!(f, "logpower({beta})"),
            CostFunction::ExpPower { beta } => write!(f, "exppower({beta})"),
            CostFunction::Quantile { alpha } => write!(f, "quantile({alpha})"),
        }
    }
}

impl FromStr for CostFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const KIND: &str = "cost";
        let t = descriptor::parse(KIND, s)?;
        let p = t.numbers(KIND, s, 1)?[0];
        let c = match t.name.as_str() {
            "power" => CostFunction::Power { alpha: p },
            "logpower" => CostFunction::LogPower { beta: p },
            "exppower" => CostFunction::ExpPower { beta: p },
            "quantile" => CostFunction::Quantile { alpha: p },
            other => return Err(parse_error(KIND, s, format!("unknown cost `{other}`"))),
        };
        c.validate().map_err(|e| parse_error(KIND, s, e.to_string()))?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> CostFunction {
        s.parse().unwrap()
    }

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(c("power(2)").evaluate(1.0, 3.0), 4.0);
        assert!((c("exppower(1)").evaluate(0.0, 1.0) - (1f64.exp() - 1.0)).abs() < 1e-15);
        assert!((c("quantile(0.3)").evaluate(2.0, 5.0) - 2.1).abs() < 1e-15);
        for k in ["power(1.5)", "logpower(0.5)", "exppower(2)", "quantile(0.3)"] {
            assert_eq!(c(k).evaluate(1.7, 1.7), 0.0);
        }
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(c("power(2)").gradient(3.0, 1.0).unwrap(), (4.0, -4.0));
        let (gx, gy) = c("power(3)").gradient(2.0, 0.0).unwrap();
        assert!((gx - 12.0).abs() < 1e-12 && (gy + 12.0).abs() < 1e-12);
        let fd = central(|x| c("power(3)").evaluate(x, 0.0), 2.0);
        assert!((fd - 12.0).abs() < 1e-6 * 12.0);
        let e = 1f64.exp();
        let (gx, gy) = c("exppower(1)").gradient(1.0, 0.0).unwrap();
        assert!((gx - e).abs() < 1e-14 && (gy + e).abs() < 1e-14);
        let fd = central(|y| c("exppower(1)").evaluate(1.0, y), 0.0);
        assert!((fd + e).abs() < 1e-6 * e);
        assert!(matches!(c("quantile(0.5)").gradient(1.0, 0.0), Err(Error::Nondifferentiable(_))));
    }

    #[test]
    fn measure_property_examples() {
        let grid: Vec<f64> = (0..=20).map(|i| -5.0 + 0.5 * i as f64).collect();
        assert!(c("power(2)").check_measure_property(&grid).unwrap().holds);
        let grid: Vec<f64> = (0..=8).map(|i| -2.0 + 0.5 * i as f64).collect();
        let bad = check_measure_property_with(|x, y| x * y, &grid).unwrap();
        assert!(!bad.holds);
        // Largest increment of xy is the full square.
        assert_eq!(bad.worst_increment, 16.0);
        assert_eq!(bad.worst_rectangle, [-2.0, 2.0, -2.0, 2.0]);
        let grid: Vec<f64> = (0..=12).map(|i| -3.0 + 0.5 * i as f64).collect();
        assert!(c("quantile(0.5)").check_measure_property(&grid).unwrap().holds);
        assert!(c("power(2)").check_measure_property(&[1.0]).is_err());
    }

    #[test]
    fn theta1_and_gamma() {
        assert_eq!(c("power(2)").theta1(), 0.0);
        assert_eq!(c("exppower(2)").theta1(), 1.0);
        assert_eq!(c("logpower(1)").theta1(), 0.5);
        assert_eq!(c("power(3)").gamma(), 0.0);
        assert_eq!(c("logpower(2)").gamma(), 0.0);
        assert_eq!(c("exppower(1.5)").gamma(), 1.5);
    }

    #[test]
    fn log_power_theta1_limit() {
        // log(x l'(x)) / log l(x) creeps towards β/(1+β) on a log scale;
        // evaluate at log x = 1e6 and 1e9 through ln l and ln l'.
        let beta = 1.0;
        for log_x in [1e6f64, 1e9] {
            // For large x: l = (log x)^(1+β), x l'(x) ≈ (1+β)(log x)^β.
            let ln_l = (1.0 + beta) * log_x.ln();
            let ln_xlp = (1.0 + beta).ln() + beta * log_x.ln();
            let ratio = ln_xlp / ln_l;
            assert!((ratio - 0.5).abs() < 0.05, "log x = {log_x}: {ratio}");
        }
        // At moderate x the exact formulas agree with the asymptotic forms.
        let cf = c("logpower(1)");
        let x = 1e6;
        let exact = (x * cf.l_prime(x)).ln() / cf.l(x).ln();
        let approx = ((1.0 + beta).ln() + beta * x.ln().ln()) / ((1.0 + beta) * x.ln().ln());
        assert!((exact - approx).abs() < 1e-4);
    }

    #[test]
    fn l_inverse_round_trip() {
        for k in ["power(2)", "logpower(0.5)", "exppower(2)", "exppower(0.5)"] {
            let cf = c(k);
            for t in [0.01, 0.5, 3.0, 40.0] {
                let back = cf.l_inverse(cf.l(t));
                assert!((back - t).abs() < 1e-10 * t.max(1.0), "{k} t={t}");
                assert!((cf.l_prime(t) - central(|s| cf.l(s), t)).abs() < 1e-5 * cf.l_prime(t).abs().max(1.0));
            }
        }
    }

    #[test]
    fn diagonal_contraction_examples() {
        assert!((c("power(2)").diagonal_contraction(10.0, 0.1).unwrap() - 0.2).abs() < 1e-15);
        let small = c("power(2)").diagonal_contraction(10.0, 1e-9).unwrap();
        assert!(small < 1e-8);
        assert!(matches!(
            c("quantile(0.5)").diagonal_contraction(1.0, 0.1),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            c("exppower(1)").diagonal_contraction(1.0, 0.1),
            Err(Error::Unsupported(_))
        ));
        let lp = c("logpower(1)");
        let d = lp.diagonal_contraction(10.0, 0.1).unwrap();
        assert!((d - lp.rho_prime(0.1)).abs() < 1e-15);
        assert!(lp.diagonal_contraction(10.0, 1e-6).unwrap() < 1e-5);
    }

    #[test]
    fn rejects_w1_and_bad_descriptors() {
        assert!("power(1)".parse::<CostFunction>().is_err());
        assert!("power(0.5)".parse::<CostFunction>().is_err());
        assert!("quantile(1)".parse::<CostFunction>().is_err());
        assert!("logpower(-1)".parse::<CostFunction>().is_err());
        assert!("sqeuclid(2)".parse::<CostFunction>().is_err());
        for s in ["power(2)", "logpower(0.5)", "exppower(1)", "quantile(0.3)"] {
            assert_eq!(c(s).to_string(), s);
            let json = serde_json::to_string(&c(s)).unwrap();
            assert_eq!(serde_json::from_str::<CostFunction>(&json).unwrap(), c(s));
        }
    }
}
