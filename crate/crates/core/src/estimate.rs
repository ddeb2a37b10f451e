//! Point estimators of `W_c`: the order-statistic plug-in, its trimmed
//! variant, and the population value by quadrature.

use serde::{Deserialize, Serialize};

use crate::cost::CostFunction;
use crate::dist::Distribution;
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_unit, CompensatedSum, QuadratureConfig, UnitIntegral};

/// `n` paired observations `(x_i, y_i)`, possibly dependent within a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    /// Rejects empty input, mismatched lengths and non-finite values.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid(format!("column lengths differ: {} vs {}", xs.len(), ys.len())));
        }
        if xs.is_empty() {
            return Err(invalid("sample is empty"));
        }
        if let Some(i) = xs.iter().zip(&ys).position(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(invalid(format!("non-finite value in row {}", i + 1)));
        }
        Ok(PairedSample { xs, ys })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Both columns sorted ascending, independently.
    pub fn sorted_columns(&self) -> (Vec<f64>, Vec<f64>) {
        (sorted(&self.xs), sorted(&self.ys))
    }
}

pub(crate) fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Which estimator produced a point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    Full,
    Trimmed { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
}

/// A point estimate with optional asymptotic inference attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub variant: Variant,
    pub n: usize,
    pub cost: CostFunction,
    /// Asymptotic variance used for the interval and where it came from.
    pub sigma2: Option<f64>,
    pub sigma_source: Option<String>,
    pub ci: Option<ConfidenceInterval>,
}

impl EstimateReport {
    pub fn new(sample: &PairedSample, c: &CostFunction, variant: Variant) -> Result<Self> {
        let estimate = match variant {
            Variant::Full => empirical_cost(sample, c),
            Variant::Trimmed { eps } => trimmed_empirical_cost(sample, c, eps)?,
        };
        Ok(EstimateReport {
            estimate,
            variant,
            n: sample.n(),
            cost: *c,
            sigma2: None,
            sigma_source: None,
            ci: None,
        })
    }
}

/// `(1/n) Σ c(x_(i), y_(i))` over independently sorted columns.
pub fn empirical_cost(s: &PairedSample, c: &CostFunction) -> f64 {
    let (xs, ys) = s.sorted_columns();
    sorted_cost(&xs, &ys, c, 0.0)
}

/// `∫_eps^(1-eps) c(F_n⁻¹(u), G_n⁻¹(u)) du`, exact for the step quantiles.
/// Not renormalized by the window length.
pub fn trimmed_empirical_cost(s: &PairedSample, c: &CostFunction, eps: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) {
        return Err(invalid(format!("trimming eps must lie in [0, 1/2), got {eps}")));
    }
    let (xs, ys) = s.sorted_columns();
    Ok(sorted_cost(&xs, &ys, c, eps))
}

/// Cell `i` covers `[i-1, i]` in units of `1/n`; weights are clipped cell
/// lengths, which are exactly 1 when `eps = 0`.
pub(crate) fn sorted_cost(xs: &[f64], ys: &[f64], c: &CostFunction, eps: f64) -> f64 {
    let n = xs.len() as f64;
    let (lo, hi) = (eps * n, n - eps * n);
    let mut acc = CompensatedSum::new();
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let w = if eps == 0.0 {
            1.0
        } else {
            ((i as f64 + 1.0).min(hi) - (i as f64).max(lo)).clamp(0.0, 1.0)
        };
        if w > 0.0 {
            acc.add(w * c.evaluate(x, y));
        }
    }
    acc.total() / n
}

/// Left-continuous empirical quantile `x_(⌈un⌉)`.
pub fn empirical_quantile(column: &[f64], u: f64) -> Result<f64> {
    if column.is_empty() {
        return Err(invalid("empty column"));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidProbability(u));
    }
    let s = sorted(column);
    Ok(s[quantile_index(s.len(), u)])
}

/// Zero-based index of `x_(⌈un⌉)`.
pub(crate) fn quantile_index(n: usize, u: f64) -> usize {
    ((u * n as f64).ceil() as usize).clamp(1, n) - 1
}

/// `W_c(F, G) = ∫_0^1 c(F⁻¹(u), G⁻¹(u)) du` by adaptive quadrature with
/// extrapolated edge strips. Fails with `NonConvergence` when the tails do
/// not settle, which is the typical signature of an infinite cost.
pub fn exact_cost(f: &Distribution, g: &Distribution, c: &CostFunction, q: &QuadratureConfig) -> Result<UnitIntegral> {
    f.validate()?;
    g.validate()?;
    c.validate()?;
    let what = format!("W_c({f}, {g}; {c})");
    integrate_unit(&what, |u| c.evaluate(f.quantile_unchecked(u), g.quantile_unchecked(u)), q)
}
