use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use wclt::assumptions::Status;
use wclt::estimate::{ConfidenceInterval, Variant};
use wclt::variance::{sigma2_gaussian, sigma2_location_scale, sigma2_w2_independent};
use wclt::{
    check_all, confidence_interval, plug_in_sigma2, run_clt_experiment, sigma2, sigma2_one_sample, CheckOptions, CostFunction, Coupling,
    Distribution, EstimateReport, MCConfig, PairedSample, QuadratureConfig, Side,
};

use crate::error::{exit, CliError, CliResult};
use crate::io::{emit, fmt_float, read_sample, write_column, write_sample, write_to};

fn parse<T: std::str::FromStr<Err = wclt::Error>>(s: &str) -> CliResult<T> {
    Ok(s.parse()?)
}

fn parse_num<T: std::str::FromStr>(what: &str, s: &str) -> CliResult<T> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("{what} `{s}` is not a valid number")))
}

/// A generator spec `F G COUPLING N SEED`.
#[derive(Debug, Clone, Serialize)]
pub struct Generate {
    pub f: Distribution,
    pub g: Distribution,
    pub coupling: Coupling,
    pub n: usize,
    pub seed: u64,
}

impl Generate {
    fn from_args(v: &[String]) -> CliResult<Self> {
        let [f, g, c, n, seed] = v else {
            return Err(CliError::Usage("a generator needs F G COUPLING N SEED".into()));
        };
        Ok(Generate {
            f: parse(f)?,
            g: parse(g)?,
            coupling: parse(c)?,
            n: parse_num("N", n)?,
            seed: parse_num("SEED", seed)?,
        })
    }

    fn draw(&self) -> CliResult<PairedSample> {
        Ok(self.coupling.sample_pairs(&self.f, &self.g, self.n, self.seed)?)
    }
}

#[derive(Args)]
pub struct EstimateArgs {
    /// CSV file with an `x,y` header; `-` reads standard input.
    #[arg(required_unless_present = "generate", conflicts_with = "generate")]
    input: Option<PathBuf>,

    /// Draw the sample instead of reading it.
    #[arg(long, num_args = 5, value_names = ["F", "G", "COUPLING", "N", "SEED"])]
    generate: Option<Vec<String>>,

    #[arg(long, default_value = "power(2)")]
    cost: String,

    /// Use the trimmed estimator with this `eps` in [0, 1/2).
    #[arg(long, value_name = "EPS")]
    trim: Option<f64>,

    /// Attach a confidence interval at this level.
    #[arg(long, value_name = "LEVEL")]
    ci: Option<f64>,

    /// Variance source: `plugin`, or `oracle [F G COUPLING]`. The oracle
    /// defaults to the generator's laws.
    #[arg(long, num_args = 1..=4, value_names = ["SOURCE", "F", "G", "COUPLING"])]
    sigma: Option<Vec<String>>,

    /// Also write the sample used as CSV.
    #[arg(long, value_name = "PATH")]
    dump_sample: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SigmaSpec {
    PlugIn,
    Oracle {
        f: Distribution,
        g: Distribution,
        coupling: Coupling,
    },
}

#[derive(Serialize)]
struct EstimateConfig {
    input: Option<String>,
    generate: Option<Generate>,
    cost: CostFunction,
    variant: Variant,
    ci_level: Option<f64>,
    sigma: Option<SigmaSpec>,
    quadrature: Option<QuadratureConfig>,
}

fn sigma_spec(raw: Option<&[String]>, generate: Option<&Generate>, ci: bool) -> CliResult<Option<SigmaSpec>> {
    let raw = match raw {
        Some(r) => r,
        None if ci => return Ok(Some(SigmaSpec::PlugIn)),
        None => return Ok(None),
    };
    match raw {
        [s] if s == "plugin" => Ok(Some(SigmaSpec::PlugIn)),
        [s] if s == "oracle" => match generate {
            Some(g) => Ok(Some(SigmaSpec::Oracle {
                f: g.f.clone(),
                g: g.g.clone(),
                coupling: g.coupling,
            })),
            None => Err(CliError::Usage("`--sigma oracle` on a CSV input needs F G COUPLING".into())),
        },
        [s, f, g, c] if s == "oracle" => Ok(Some(SigmaSpec::Oracle {
            f: parse(f)?,
            g: parse(g)?,
            coupling: parse(c)?,
        })),
        _ => Err(CliError::Usage("--sigma expects `plugin` or `oracle [F G COUPLING]`".into())),
    }
}

pub fn estimate(a: EstimateArgs, out: Option<&Path>) -> CliResult<u8> {
    let cost: CostFunction = parse(&a.cost)?;
    cost.validate()?;
    let generate = a.generate.as_deref().map(Generate::from_args).transpose()?;
    let sample = match (&generate, &a.input) {
        (Some(g), _) => g.draw()?,
        (None, Some(p)) => read_sample(p)?,
        (None, None) => return Err(CliError::Usage("give an input CSV or --generate".into())),
    };
    if let Some(p) = &a.dump_sample {
        write_to(Some(p), |w| write_sample(&sample, w))?;
    }
    let variant = match a.trim {
        Some(eps) => Variant::Trimmed { eps },
        None => Variant::Full,
    };
    let sigma = sigma_spec(a.sigma.as_deref(), generate.as_ref(), a.ci.is_some())?;
    let mut report = EstimateReport::new(&sample, &cost, variant)?;
    let mut quadrature = None;
    if let Some(spec) = &sigma {
        let s2 = match spec {
            SigmaSpec::PlugIn => plug_in_sigma2(&sample, &cost, None, None)?.value,
            SigmaSpec::Oracle { f, g, coupling } => {
                let q = QuadratureConfig::for_variance();
                quadrature = Some(q);
                sigma2(f, g, &cost, coupling, &q)?.value
            }
        };
        report.sigma2 = Some(s2);
        report.sigma_source = Some(match spec {
            SigmaSpec::PlugIn => "plug_in".into(),
            SigmaSpec::Oracle { .. } => "oracle".into(),
        });
        if let Some(level) = a.ci {
            let (lo, hi) = confidence_interval(report.estimate, s2, report.n, level)?;
            report.ci = Some(ConfidenceInterval { level, lo, hi });
        }
    }
    let config = EstimateConfig {
        input: a.input.map(|p| p.display().to_string()),
        generate,
        cost,
        variant,
        ci_level: a.ci,
        sigma,
        quadrature,
    };
    emit(out, "estimate", config, report)?;
    Ok(exit::OK)
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Double integral for any cost and coupling.
    Quadrature,
    /// Closed form for two Gaussians, power(2), independent samples.
    Gaussian,
    /// Moment form for power(2) with independent samples.
    W2Independent,
    /// Closed form for a location-scale pair: BASE A B A2 B2.
    LocationScale,
    /// Only the first sample is random.
    OneSampleX,
    /// Only the second sample is random.
    OneSampleY,
}

#[derive(Args)]
pub struct VarianceArgs {
    /// `F G [COST] [COUPLING]`, or `BASE A B A2 B2` with
    /// `--method location-scale`. COST defaults to power(2) and COUPLING
    /// to independent.
    #[arg(required = true, num_args = 2..=5, value_name = "ARGS")]
    args: Vec<String>,

    #[arg(long, value_enum, default_value_t = Method::Quadrature)]
    method: Method,

    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    edge_epsilon: Option<f64>,
    #[arg(long)]
    max_subdivisions: Option<usize>,
    #[arg(long)]
    extrapolation_levels: Option<usize>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum VarianceConfig {
    Pair {
        method: Method,
        f: Distribution,
        g: Distribution,
        cost: CostFunction,
        coupling: Coupling,
        quadrature: Option<QuadratureConfig>,
    },
    LocationScale {
        method: Method,
        base: Distribution,
        a: f64,
        b: f64,
        a2: f64,
        b2: f64,
    },
}

pub fn variance(a: VarianceArgs, out: Option<&Path>) -> CliResult<u8> {
    let mut q = QuadratureConfig::for_variance();
    q.abs_tol = a.abs_tol.unwrap_or(q.abs_tol);
    q.rel_tol = a.rel_tol.unwrap_or(q.rel_tol);
    q.edge_epsilon = a.edge_epsilon.unwrap_or(q.edge_epsilon);
    q.max_subdivisions = a.max_subdivisions.unwrap_or(q.max_subdivisions);
    q.extrapolation_levels = a.extrapolation_levels.unwrap_or(q.extrapolation_levels);
    q.validate()?;

    if let Method::LocationScale = a.method {
        let [base, sa, sb, sa2, sb2] = a.args.as_slice() else {
            return Err(CliError::Usage("location-scale expects BASE A B A2 B2".into()));
        };
        let base: Distribution = parse(base)?;
        let (sa, sb, sa2, sb2) = (
            parse_num("A", sa)?,
            parse_num("B", sb)?,
            parse_num("A2", sa2)?,
            parse_num("B2", sb2)?,
        );
        let r = sigma2_location_scale(&base, sa, sb, sa2, sb2)?;
        let config = VarianceConfig::LocationScale {
            method: a.method,
            base,
            a: sa,
            b: sb,
            a2: sa2,
            b2: sb2,
        };
        emit(out, "variance", config, r)?;
        return Ok(exit::OK);
    }

    if a.args.len() > 4 {
        return Err(CliError::Usage("expected F G [COST] [COUPLING]".into()));
    }
    let f: Distribution = parse(&a.args[0])?;
    let g: Distribution = parse(&a.args[1])?;
    let cost: CostFunction = parse(a.args.get(2).map_or("power(2)", String::as_str))?;
    let coupling: Coupling = parse(a.args.get(3).map_or("independent", String::as_str))?;
    let w2_independent = || -> CliResult<()> {
        if cost != (CostFunction::Power { alpha: 2.0 }) || coupling != Coupling::Independent {
            return Err(CliError::Usage(format!(
                "{:?} needs power(2) cost and independent samples",
                a.method
            )));
        }
        Ok(())
    };
    let (r, used_q) = match a.method {
        Method::Quadrature => (sigma2(&f, &g, &cost, &coupling, &q)?, true),
        Method::OneSampleX => (sigma2_one_sample(&f, &g, &cost, Side::X, &q)?, true),
        Method::OneSampleY => (sigma2_one_sample(&f, &g, &cost, Side::Y, &q)?, true),
        Method::W2Independent => {
            w2_independent()?;
            (sigma2_w2_independent(&f, &g, &q)?, true)
        }
        Method::Gaussian => {
            w2_independent()?;
            match (&f, &g) {
                (Distribution::Gaussian { mean: m1, sd: s1 }, Distribution::Gaussian { mean: m2, sd: s2 }) => {
                    (sigma2_gaussian(*m1, *s1, *m2, *s2)?, false)
                }
                _ => return Err(CliError::Usage("the gaussian method needs two gaussian laws".into())),
            }
        }
        Method::LocationScale => unreachable!("handled above"),
    };
    let config = VarianceConfig::Pair {
        method: a.method,
        f,
        g,
        cost,
        coupling,
        quadrature: used_q.then_some(q),
    };
    emit(out, "variance", config, r)?;
    Ok(exit::OK)
}

#[derive(Args)]
pub struct CheckArgs {
    f: String,
    g: String,
    #[arg(default_value = "power(2)")]
    cost: String,

    /// (CFG) exponent; defaults to 1 + θ₁ + 0.01 for the cost.
    #[arg(long)]
    theta: Option<f64>,

    /// Exponent for the sufficient tail condition, > 2.
    #[arg(long, default_value_t = CheckOptions::default().zeta)]
    zeta: f64,

    /// Tail threshold for the (FG) checks.
    #[arg(long)]
    m: Option<f64>,

    #[arg(long, default_value_t = CheckOptions::default().grid_size)]
    grid_size: usize,
}

#[derive(Serialize)]
struct CheckConfig {
    f: Distribution,
    g: Distribution,
    cost: CostFunction,
    options: CheckOptions,
}

pub fn check(a: CheckArgs, out: Option<&Path>) -> CliResult<u8> {
    let f: Distribution = parse(&a.f)?;
    let g: Distribution = parse(&a.g)?;
    let cost: CostFunction = parse(&a.cost)?;
    let options = CheckOptions {
        theta: Some(a.theta.unwrap_or(1.0 + cost.theta1() + 0.01)),
        zeta: a.zeta,
        m: a.m,
        grid_size: a.grid_size,
    };
    let report = check_all(&f, &g, &cost, &options)?;
    let code = if report.status == Status::Fail {
        exit::ASSUMPTION_FAIL
    } else {
        exit::OK
    };
    emit(out, "check", CheckConfig { f, g, cost, options }, report)?;
    Ok(code)
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(num_args = 5, required = true, value_names = ["F", "G", "COUPLING", "N", "SEED"])]
    spec: Vec<String>,
}

pub fn sample(a: SampleArgs, out: Option<&Path>) -> CliResult<u8> {
    let s = Generate::from_args(&a.spec)?.draw()?;
    write_to(out, |w| write_sample(&s, w))?;
    Ok(exit::OK)
}

#[derive(Args)]
pub struct McArgs {
    /// JSON experiment config.
    config: PathBuf,

    /// Write the standardized replicates as CSV.
    #[arg(long, value_name = "PATH")]
    z_csv: Option<PathBuf>,
}

pub fn mc(a: McArgs, out: Option<&Path>) -> CliResult<u8> {
    let text = fs::read_to_string(&a.config).map_err(|source| CliError::Io {
        path: a.config.clone(),
        source,
    })?;
    let cfg: MCConfig = serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: a.config.display().to_string(),
        reason: e.to_string(),
    })?;
    let report = run_clt_experiment(&cfg)?;
    if let Some(p) = &a.z_csv {
        write_to(Some(p), |w| match &report.trimmed {
            Some(t) => {
                writeln!(w, "z,z_trimmed")?;
                for (z, zt) in report.full.z.iter().zip(&t.standardized.z) {
                    writeln!(w, "{},{}", fmt_float(*z), fmt_float(*zt))?;
                }
                w.flush()
            }
            None => write_column("z", &report.full.z, w),
        })?;
    }
    emit(out, "mc", &cfg, &report)?;
    Ok(exit::OK)
}
