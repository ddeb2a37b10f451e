//! Copulas `Π(u, v)` and reproducible paired sampling with fixed marginals.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptor::{self, parse_error};
use crate::dist::Distribution;
use crate::error::{invalid, Error, Result};
use crate::estimate::PairedSample;
use crate::special::{bvn_cdf, bvn_excess, norm_cdf, norm_ppf, norm_sf};

/// Dependence between the two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coupling {
    Independent,
    Comonotone,
    Countermonotone,
    #[serde(rename = "gauss")]
    Gaussian {
        r: f64,
    },
}

fn check_closed_unit(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(u))
    }
}

/// Uniform on `(0, 1)` from the top 52 bits, never touching either end.
#[inline]
pub(crate) fn open_uniform(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

impl Coupling {
    pub fn gaussian(r: f64) -> Result<Self> {
        let c = Coupling::Gaussian { r };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Coupling::Gaussian { r } if !(r > -1.0 && r < 1.0) => {
                Err(invalid(format!("gaussian copula correlation must lie in (-1,1), got {r}")))
            }
            _ => Ok(()),
        }
    }

    /// `Π(u, v) = P(U ≤ u, V ≤ v)`.
    pub fn copula_cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_closed_unit(u)?;
        check_closed_unit(v)?;
        // Margins are exact for every copula.
        if u == 1.0 || v == 0.0 {
            return Ok(v);
        }
        if v == 1.0 || u == 0.0 {
            return Ok(u);
        }
        Ok(match *self {
            Coupling::Independent => u * v,
            Coupling::Comonotone => u.min(v),
            Coupling::Countermonotone => (u + v - 1.0).max(0.0),
            Coupling::Gaussian { r } => bvn_cdf(norm_ppf(u), norm_ppf(v), r),
        })
    }

    /// `Π(u, v) - uv`, evaluated without cancellation where possible.
    pub fn copula_excess(&self, u: f64, v: f64) -> Result<f64> {
        check_closed_unit(u)?;
        check_closed_unit(v)?;
        Ok(self.copula_excess_unchecked(u, v))
    }

    pub(crate) fn copula_excess_unchecked(&self, u: f64, v: f64) -> f64 {
        match *self {
            Coupling::Independent => 0.0,
            Coupling::Comonotone => {
                let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
                lo * (1.0 - hi)
            }
            Coupling::Countermonotone => {
                if u + v <= 1.0 {
                    -u * v
                } else {
                    -(1.0 - u) * (1.0 - v)
                }
            }
            Coupling::Gaussian { r } => {
                if u <= 0.0 || v <= 0.0 || u >= 1.0 || v >= 1.0 {
                    0.0
                } else {
                    bvn_excess(norm_ppf(u), norm_ppf(v), r)
                }
            }
        }
    }

    /// Draws `n` copula pairs `(U, V)`; two generator outputs per pair.
    pub fn sample_uniform_pairs(&self, n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| match self.draw(&mut rng) {
                Draw::Uniform(u, v) => (u, v),
                Draw::Normal(u, z) => (u, norm_cdf(z)),
            })
            .collect()
    }

    /// `n` i.i.d. pairs `(F⁻¹(U), G⁻¹(V))`. Identical seeds give identical
    /// output.
    pub fn sample_pairs(&self, f: &Distribution, g: &Distribution, n: usize, seed: u64) -> Result<PairedSample> {
        if n == 0 {
            return Err(invalid("sample size must be at least 1"));
        }
        self.validate()?;
        f.validate()?;
        g.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let (x, y) = match self.draw(&mut rng) {
                Draw::Uniform(u, v) => (f.quantile_unchecked(u), g.quantile_unchecked(v)),
                Draw::Normal(u, z) => {
                    // Read the upper half through the survival side.
                    let y = if z > 0.0 {
                        g.isf_unchecked(norm_sf(z))
                    } else {
                        g.quantile_unchecked(norm_cdf(z))
                    };
                    (f.quantile_unchecked(u), y)
                }
            };
            xs.push(x);
            ys.push(y);
        }
        PairedSample::new(xs, ys)
    }

    fn draw(&self, rng: &mut impl RngCore) -> Draw {
        let u1 = open_uniform(rng);
        let u2 = open_uniform(rng);
        match *self {
            Coupling::Independent => Draw::Uniform(u1, u2),
            Coupling::Comonotone => Draw::Uniform(u1, u1),
            // Exact: u1 is an odd multiple of 2^-53.
            Coupling::Countermonotone => Draw::Uniform(u1, 1.0 - u1),
            Coupling::Gaussian { r } => {
                let z = r * norm_ppf(u1) + (1.0 - r * r).sqrt() * norm_ppf(u2);
                Draw::Normal(u1, z)
            }
        }
    }
}

enum Draw {
    Uniform(f64, f64),
    /// First uniform and the latent normal score of the second coordinate.
    Normal(f64, f64),
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Independent => f.write_str("independent"),
            Coupling::Comonotone => f.write_str("comonotone"),
            Coupling::Countermonotone => f.write_str("countermonotone"),
            Coupling::Gaussian { r } => write!(f, "gauss({r})"),
        }
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const KIND: &str = "coupling";
        let t = descriptor::parse(KIND, s)?;
        let c = match t.name.as_str() {
            "independent" => {
                t.numbers(KIND, s, 0)?;
                Coupling::Independent
            }
            "comonotone" => {
                t.numbers(KIND, s, 0)?;
                Coupling::Comonotone
            }
            "countermonotone" => {
                t.numbers(KIND, s, 0)?;
                Coupling::Countermonotone
            }
            "gauss" | "gaussian" => Coupling::Gaussian {
                r: t.numbers(KIND, s, 1)?[0],
            },
            other => return Err(parse_error(KIND, s, format!("unknown coupling `{other}`"))),
        };
        c.validate().map_err(|e| parse_error(KIND, s, e.to_string()))?;
        Ok(c)
    }
}
