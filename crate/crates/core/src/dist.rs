//! Parametric univariate laws with the quantile-side machinery: quantile
//! `F⁻¹`, density quantile `h = f∘F⁻¹`, companion `H(u) = (1-u)/(F⁻¹(u) h(u))`
//! and the tail exponent `ψ(x) = -log P(X > x)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::descriptor::{self, parse_error, Arg};
use crate::error::{check_open_unit, invalid, Error, Result};
use crate::special::{norm_isf, norm_log_cdf, norm_log_sf, norm_pdf, norm_ppf, norm_sf};

/// A univariate law. `Pareto` is supported on `(1, ∞)`; `Weibull` and
/// `Exponential` on `(0, ∞)`; shifted and rescaled variants are built with
/// `LocationScale`, and `Reflected` is the law of `-X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    Gaussian { mean: f64, sd: f64 },
    Pareto { shape: f64 },
    Weibull { shape: f64 },
    Exponential { rate: f64 },
    LocationScale { base: Box<Distribution>, scale: f64, shift: f64 },
    Reflected { base: Box<Distribution> },
}

/// Asymptotic class of the right-tail exponent `ψ`, as used by the
/// sufficient conditions for regular tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TailClass {
    /// `ψ(x) = p log x`: slowly varying with `x ψ'(x) = p`.
    SlowlyVarying { log_slope: f64 },
    /// `ψ` regularly varying with positive index (up to a slowly varying
    /// factor).
    RegularlyVarying { index: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Distribution {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        let d = Distribution::Gaussian { mean, sd };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(shape: f64) -> Result<Self> {
        positive("pareto shape", shape)?;
        Ok(Distribution::Pareto { shape })
    }

    pub fn weibull(shape: f64) -> Result<Self> {
        positive("weibull shape", shape)?;
        Ok(Distribution::Weibull { shape })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive("exponential rate", rate)?;
        Ok(Distribution::Exponential { rate })
    }

    /// Law of `scale * X + shift`, i.e. `F((x - shift) / scale)`.
    pub fn location_scale(base: Distribution, scale: f64, shift: f64) -> Result<Self> {
        let d = Distribution::LocationScale {
            base: Box::new(base),
            scale,
            shift,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Gaussian { mean, sd } => {
                if !mean.is_finite() {
                    return Err(invalid("gaussian mean must be finite"));
                }
                positive("gaussian sd", *sd)
            }
            Distribution::Pareto { shape } => positive("pareto shape", *shape),
            Distribution::Weibull { shape } => positive("weibull shape", *shape),
            Distribution::Exponential { rate } => positive("exponential rate", *rate),
            Distribution::LocationScale { base, scale, shift } => {
                positive("location-scale scale", *scale)?;
                if !shift.is_finite() {
                    return Err(invalid("location-scale shift must be finite"));
                }
                base.validate()
            }
            Distribution::Reflected { base } => base.validate(),
        }
    }

    /// Law of `-X`. Gaussians stay Gaussian and double reflections cancel.
    pub fn reflect(&self) -> Distribution {
        match self {
            Distribution::Gaussian { mean, sd } => Distribution::Gaussian { mean: -mean, sd: *sd },
            Distribution::Reflected { base } => (**base).clone(),
            Distribution::LocationScale { base, scale, shift } => Distribution::LocationScale {
                base: Box::new(base.reflect()),
                scale: *scale,
                shift: -shift,
            },
            other => Distribution::Reflected {
                base: Box::new(other.clone()),
            },
        }
    }

    /// Closure of the support as `(lo, hi)`; infinite ends are `±∞`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::Pareto { .. } => (1.0, f64::INFINITY),
            Distribution::Weibull { .. } | Distribution::Exponential { .. } => (0.0, f64::INFINITY),
            Distribution::LocationScale { base, scale, shift } => {
                let (lo, hi) = base.support();
                (scale * lo + shift, scale * hi + shift)
            }
            Distribution::Reflected { base } => {
                let (lo, hi) = base.support();
                (-hi, -lo)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Gaussian { mean, sd } => norm_sf(-(x - mean) / sd),
            Distribution::Pareto { shape } => {
                if x <= 1.0 {
                    0.0
                } else {
                    -(-shape * x.ln()).exp_m1()
                }
            }
            Distribution::Weibull { shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x.powf(*shape)).exp_m1()
                }
            }
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Distribution::LocationScale { base, scale, shift } => base.cdf((x - shift) / scale),
            Distribution::Reflected { base } => base.sf(-x),
        }
    }

    /// Survival function `P(X > x)`.
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Distribution::Gaussian { mean, sd } => norm_sf((x - mean) / sd),
            Distribution::Pareto { shape } => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-shape)
                }
            }
            Distribution::Weibull { shape } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x.powf(*shape)).exp()
                }
            }
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Distribution::LocationScale { base, scale, shift } => base.sf((x - shift) / scale),
            Distribution::Reflected { base } => base.cdf(-x),
        }
    }

    pub(crate) fn log_sf(&self, x: f64) -> f64 {
        match self {
            Distribution::Gaussian { mean, sd } => norm_log_sf((x - mean) / sd),
            Distribution::Pareto { shape } => {
                if x <= 1.0 {
                    0.0
                } else {
                    -shape * x.ln()
                }
            }
            Distribution::Weibull { shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -x.powf(*shape)
                }
            }
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -rate * x
                }
            }
            Distribution::LocationScale { base, scale, shift } => base.log_sf((x - shift) / scale),
            Distribution::Reflected { base } => base.log_cdf(-x),
        }
    }

    pub(crate) fn log_cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Gaussian { mean, sd } => norm_log_cdf((x - mean) / sd),
            Distribution::LocationScale { base, scale, shift } => base.log_cdf((x - shift) / scale),
            Distribution::Reflected { base } => base.log_sf(-x),
            _ => {
                let s = self.sf(x);
                (-s).ln_1p()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Gaussian { mean, sd } => norm_pdf((x - mean) / sd) / sd,
            Distribution::Pareto { shape } => {
                if x <= 1.0 {
                    0.0
                } else {
                    shape * x.powf(-shape - 1.0)
                }
            }
            Distribution::Weibull { shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let xq = x.powf(*shape);
                    shape * xq / x * (-xq).exp()
                }
            }
            Distribution::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Distribution::LocationScale { base, scale, shift } => base.pdf((x - shift) / scale) / scale,
            Distribution::Reflected { base } => base.pdf(-x),
        }
    }

    /// Quantile `F⁻¹(u)` for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        Ok(self.quantile_unchecked(u))
    }

    /// Upper quantile `F⁻¹(1 - q)`, accurate for small `q`.
    pub fn isf(&self, q: f64) -> Result<f64> {
        check_open_unit(q)?;
        Ok(self.isf_unchecked(q))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        match self {
            Distribution::Gaussian { mean, sd } => mean + sd * norm_ppf(u),
            Distribution::Pareto { shape } => (-(-u).ln_1p() / shape).exp(),
            Distribution::Weibull { shape } => (-(-u).ln_1p()).powf(1.0 / shape),
            Distribution::Exponential { rate } => -(-u).ln_1p() / rate,
            Distribution::LocationScale { base, scale, shift } => scale * base.quantile_unchecked(u) + shift,
            Distribution::Reflected { base } => -base.isf_unchecked(u),
        }
    }

    pub(crate) fn isf_unchecked(&self, q: f64) -> f64 {
        match self {
            Distribution::Gaussian { mean, sd } => mean + sd * norm_isf(q),
            Distribution::Pareto { shape } => q.powf(-1.0 / shape),
            Distribution::Weibull { shape } => (-q.ln()).powf(1.0 / shape),
            Distribution::Exponential { rate } => -q.ln() / rate,
            Distribution::LocationScale { base, scale, shift } => scale * base.isf_unchecked(q) + shift,
            Distribution::Reflected { base } => -base.quantile_unchecked(q),
        }
    }

    /// `h(u) = f(F⁻¹(u))`.
    pub fn density_quantile(&self, u: f64) -> Result<f64> {
        Ok(self.pdf(self.quantile(u)?))
    }

    /// `H(u) = (1 - u) / (F⁻¹(u) h(u))`.
    pub fn companion(&self, u: f64) -> Result<f64> {
        let x = self.quantile(u)?;
        if x == 0.0 {
            return Err(Error::SingularPoint(u));
        }
        Ok((1.0 - u) / (x * self.pdf(x)))
    }

    /// Companion function in upper-tail coordinates, `q = 1 - u`.
    pub(crate) fn companion_upper(&self, q: f64) -> Result<f64> {
        check_open_unit(q)?;
        let x = self.isf_unchecked(q);
        if x == 0.0 {
            return Err(Error::SingularPoint(1.0 - q));
        }
        Ok(q / (x * self.pdf(x)))
    }

    /// `ψ(x) = -log(1 - F(x))`.
    pub fn tail_exponent(&self, x: f64) -> Result<f64> {
        let ls = self.log_sf(x);
        if ls == f64::NEG_INFINITY || ls.is_nan() {
            return Err(Error::InfiniteTail(x));
        }
        Ok((-ls).max(0.0))
    }

    /// Inverse of the tail exponent on the right tail.
    pub fn psi_inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(invalid(format!("tail exponent must be finite and nonnegative, got {y}")));
        }
        if y == 0.0 {
            let lo = self.support().0;
            return if lo.is_finite() {
                Ok(lo)
            } else {
                Err(invalid("tail exponent 0 corresponds to -infinity"))
            };
        }
        match self {
            Distribution::Gaussian { mean, sd } => Ok(mean + sd * standard_normal_psi_inverse(y)),
            Distribution::Pareto { shape } => Ok((y / shape).exp()),
            Distribution::Weibull { shape } => Ok(y.powf(1.0 / shape)),
            Distribution::Exponential { rate } => Ok(y / rate),
            Distribution::LocationScale { base, scale, shift } => Ok(scale * base.psi_inverse(y)? + shift),
            Distribution::Reflected { base } => {
                let q = (-y).exp();
                if q <= 0.0 {
                    return Err(invalid(format!("tail exponent {y} underflows")));
                }
                Ok(-base.quantile(q)?)
            }
        }
    }

    /// Declared right-tail class, when the family has one.
    pub fn tail_class(&self) -> Result<TailClass> {
        match self {
            Distribution::Gaussian { .. } => Ok(TailClass::RegularlyVarying { index: 2.0 }),
            Distribution::Pareto { shape } => Ok(TailClass::SlowlyVarying { log_slope: *shape }),
            Distribution::Weibull { shape } => Ok(TailClass::RegularlyVarying { index: *shape }),
            Distribution::Exponential { .. } => Ok(TailClass::RegularlyVarying { index: 1.0 }),
            Distribution::LocationScale { base, .. } => base.tail_class(),
            Distribution::Reflected { .. } => Err(Error::UnknownTailClass(self.to_string())),
        }
    }
}

fn standard_normal_psi_inverse(y: f64) -> f64 {
    if y < 700.0 {
        return norm_isf((-y).exp());
    }
    // Newton on ln P(Z > z) = -y; d/dz ln sf = -pdf/sf.
    let mut z = (2.0 * y).sqrt();
    for _ in 0..50 {
        let ls = norm_log_sf(z);
        let hazard = (-0.5 * z * z - 0.918_938_533_204_672_8 - ls).exp();
        let step = (ls + y) / hazard;
        z += step;
        if step.abs() <= 1e-15 * z {
            break;
        }
    }
    z
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Gaussian { mean, sd } => write!(f, "gaussian({mean},{sd})"),
            Distribution::Pareto { shape } => write!(f, "pareto({shape})"),
            Distribution::Weibull { shape } => write!(f, "weibull({shape})"),
            Distribution::Exponential { rate } => write!(f, "exponential({rate})"),
            Distribution::LocationScale { base, scale, shift } => write!(f, "locscale({base},{scale},{shift})"),
            Distribution::Reflected { base } => write!(f, "reflect({base})"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const KIND: &str = "distribution";
        fn build(t: &descriptor::Term, input: &str) -> Result<Distribution> {
            let d = match t.name.as_str() {
                "gaussian" | "normal" => {
                    let a = t.numbers(KIND, input, 2)?;
                    Distribution::Gaussian { mean: a[0], sd: a[1] }
                }
                "pareto" => Distribution::Pareto {
                    shape: t.numbers(KIND, input, 1)?[0],
                },
                "weibull" => Distribution::Weibull {
                    shape: t.numbers(KIND, input, 1)?[0],
                },
                "exponential" | "exp" => Distribution::Exponential {
                    rate: t.numbers(KIND, input, 1)?[0],
                },
                "locscale" => {
                    let (base, rest) = match t.args.split_first() {
                        Some((Arg::Term(b), rest)) if rest.len() == 2 => (b, rest),
                        _ => return Err(parse_error(KIND, input, "locscale expects (distribution, scale, shift)")),
                    };
                    let nums: Vec<f64> = rest
                        .iter()
                        .map(|a| match a {
                            Arg::Num(x) => Ok(*x),
                            Arg::Term(_) => Err(parse_error(KIND, input, "locscale scale/shift must be numbers")),
                        })
                        .collect::<Result<_>>()?;
                    Distribution::LocationScale {
                        base: Box::new(build(base, input)?),
                        scale: nums[0],
                        shift: nums[1],
                    }
                }
                "reflect" => match t.args.as_slice() {
                    [Arg::Term(b)] => build(b, input)?.reflect(),
                    _ => return Err(parse_error(KIND, input, "reflect expects one distribution")),
                },
                other => return Err(parse_error(KIND, input, format!("unknown family `{other}`"))),
            };
            d.validate().map_err(|e| parse_error(KIND, input, e.to_string()))?;
            Ok(d)
        }
        let term = descriptor::parse(KIND, s)?;
        build(&term, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Distribution {
        s.parse().unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(d("pareto(2)").cdf(1.0), 0.0);
        assert!(close(d("pareto(2)").cdf(2.0), 0.75, 1e-15));
        assert_eq!(d("gaussian(0,1)").cdf(0.0), 0.5);
    }

    #[test]
    fn quantile_examples() {
        assert!(close(d("pareto(1)").quantile(0.5).unwrap(), 2.0, 1e-15));
        let u = 1.0 - (-1f64).exp();
        assert!(close(d("weibull(1)").quantile(u).unwrap(), 1.0, 1e-14));
        assert_eq!(d("locscale(gaussian(0,1),2,3)").quantile(0.5).unwrap(), 3.0);
        assert!(matches!(d("pareto(1)").quantile(1.0), Err(Error::InvalidProbability(_))));
        assert!(d("pareto(1)").quantile(0.0).is_err());
    }

    #[test]
    fn density_quantile_examples() {
        assert!(close(d("pareto(2)").density_quantile(0.5).unwrap(), 2.0 * 0.5f64.powf(1.5), 1e-14));
        for u in [0.1, 0.5, 0.9, 0.999] {
            assert!(close(d("weibull(1)").density_quantile(u).unwrap(), 1.0 - u, 1e-12));
        }
        assert!(close(
            d("gaussian(0,1)").density_quantile(0.5).unwrap(),
            0.398_942_280_401_432_7,
            1e-15
        ));
    }

    #[test]
    fn companion_examples() {
        for u in [0.01, 0.3, 0.9, 1.0 - 1e-6] {
            assert!(close(d("pareto(3)").companion(u).unwrap(), 1.0 / 3.0, 1e-9));
        }
        let u = 1.0 - (-1f64).exp();
        assert!(close(d("weibull(2)").companion(u).unwrap(), 0.5, 1e-12));
        assert_eq!(d("gaussian(0,1)").companion(0.5), Err(Error::SingularPoint(0.5)));
    }

    #[test]
    fn tail_exponent_examples() {
        let e = 1f64.exp();
        assert!(close(d("pareto(2)").tail_exponent(e).unwrap(), 2.0, 1e-14));
        assert!(close(d("weibull(3)").tail_exponent(2.0).unwrap(), 8.0, 1e-14));
        assert!(close(d("exponential(1)").psi_inverse(5.0).unwrap(), 5.0, 1e-15));
        let refl = d("reflect(pareto(2))");
        assert_eq!(refl.tail_exponent(-0.5), Err(Error::InfiniteTail(-0.5)));
    }

    #[test]
    fn psi_inverse_round_trip() {
        for s in [
            "gaussian(1,2)",
            "pareto(3)",
            "weibull(0.7)",
            "exponential(2)",
            "locscale(weibull(2),3,-1)",
            "reflect(pareto(2))",
        ] {
            let dist = d(s);
            for y in [0.5, 2.0, 10.0, 40.0] {
                // The reflected law's right end sits at -1, where y = 40 is
                // below the spacing of doubles.
                if s.starts_with("reflect") && y > 10.0 {
                    continue;
                }
                let x = dist.psi_inverse(y).unwrap();
                let back = dist.tail_exponent(x).unwrap();
                assert!(close(back, y, 1e-9), "{s}: y={y} x={x} back={back}");
            }
        }
        // Beyond the underflow threshold of exp(-y).
        let z = d("gaussian(0,1)").psi_inverse(1000.0).unwrap();
        assert!(close(norm_log_sf(z), -1000.0, 1e-12));
    }

    #[test]
    fn reflection() {
        let g = d("gaussian(2,3)");
        assert_eq!(g.reflect(), Distribution::Gaussian { mean: -2.0, sd: 3.0 });
        let p = d("pareto(2)");
        let r = p.reflect();
        assert_eq!(r.reflect(), p);
        assert_eq!(r.support(), (f64::NEG_INFINITY, -1.0));
        for u in [0.1, 0.5, 0.9] {
            assert!(close(r.quantile(u).unwrap(), -p.quantile(1.0 - u).unwrap(), 1e-12));
            assert!(close(r.cdf(r.quantile(u).unwrap()), u, 1e-12));
        }
        let ls = d("locscale(pareto(2),2,5)").reflect();
        assert!(close(
            ls.quantile(0.25).unwrap(),
            -d("locscale(pareto(2),2,5)").quantile(0.75).unwrap(),
            1e-12
        ));
    }

    #[test]
    fn descriptors_round_trip_and_reject() {
        for s in [
            "gaussian(0,1)",
            "pareto(3)",
            "weibull(2)",
            "exponential(0.5)",
            "locscale(gaussian(0,1),2,3)",
            "reflect(weibull(2))",
        ] {
            let parsed = d(s);
            assert_eq!(parsed.to_string(), s);
            let json = serde_json::to_string(&parsed).unwrap();
            let back: Distribution = serde_json::from_str(&json).unwrap();
            assert_eq!(back, parsed);
        }
        assert!("gaussian(0,-1)".parse::<Distribution>().is_err());
        assert!("pareto(0)".parse::<Distribution>().is_err());
        assert!("cauchy(0,1)".parse::<Distribution>().is_err());
        assert!("locscale(pareto(2),0,1)".parse::<Distribution>().is_err());
    }

    #[test]
    fn json_mirrors_fields() {
        let v = serde_json::to_value(d("locscale(pareto(3),1,1)")).unwrap();
        assert_eq!(v["family"], "location_scale");
        assert_eq!(v["base"]["family"], "pareto");
        assert_eq!(v["base"]["shape"], 3.0);
        assert_eq!(v["scale"], 1.0);
    }

    #[test]
    fn tail_classes() {
        assert_eq!(d("pareto(3)").tail_class().unwrap(), TailClass::SlowlyVarying { log_slope: 3.0 });
        assert_eq!(
            d("locscale(weibull(2),2,1)").tail_class().unwrap(),
            TailClass::RegularlyVarying { index: 2.0 }
        );
        assert!(matches!(d("reflect(pareto(3))").tail_class(), Err(Error::UnknownTailClass(_))));
    }
}
