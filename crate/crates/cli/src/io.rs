//! CSV input and output for paired samples, and JSON emission.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use wclt::PairedSample;

use crate::error::{CliError, CliResult};

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads an `x,y` CSV. `-` reads standard input.
pub fn read_sample(path: &Path) -> CliResult<PairedSample> {
    let name = path.display().to_string();
    let reader: Box<dyn Read> = if path == Path::new("-") {
        Box::new(io::stdin().lock())
    } else {
        Box::new(File::open(path).map_err(io_err(path))?)
    };
    parse_sample(reader, &name)
}

pub fn parse_sample(reader: impl Read, name: &str) -> CliResult<PairedSample> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(name, &e))?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(CliError::Csv {
            path: name.into(),
            line: 1,
            reason: format!("expected header `x,y`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(name, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> CliResult<f64> {
            let raw = &record[i];
            let v: f64 = raw.parse().map_err(|_| CliError::Csv {
                path: name.into(),
                line,
                reason: format!("`{raw}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(CliError::Csv {
                    path: name.into(),
                    line,
                    reason: format!("non-finite value `{raw}`"),
                });
            }
            Ok(v)
        };
        xs.push(field(0)?);
        ys.push(field(1)?);
    }
    if xs.is_empty() {
        return Err(CliError::Input {
            path: name.into(),
            reason: "no data rows".into(),
        });
    }
    Ok(PairedSample::new(xs, ys)?)
}

fn csv_error(name: &str, e: &csv::Error) -> CliError {
    CliError::Csv {
        path: name.into(),
        line: e.position().map_or(0, |p| p.line()),
        reason: match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("expected {expected_len} fields, found {len}")
            }
            _ => e.to_string(),
        },
    }
}

/// `%.16e` keeps 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_sample(s: &PairedSample, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "x,y")?;
    for (x, y) in s.xs().iter().zip(s.ys()) {
        writeln!(out, "{},{}", fmt_float(*x), fmt_float(*y))?;
    }
    out.flush()
}

pub fn write_column(header: &str, values: &[f64], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for v in values {
        writeln!(out, "{}", fmt_float(*v))?;
    }
    out.flush()
}

/// Opens `path` for writing, or standard output when `path` is `None`.
pub fn sink(path: Option<&Path>) -> CliResult<(Box<dyn Write>, PathBuf)> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(io_err(p))?;
            Ok((Box::new(io::BufWriter::new(f)), p.to_path_buf()))
        }
        None => Ok((Box::new(io::stdout().lock()), PathBuf::from("<stdout>"))),
    }
}

pub fn write_to(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    let (mut w, name) = sink(path)?;
    f(&mut *w).map_err(|source| CliError::Io { path: name, source })
}

/// Every command prints the same envelope: the command name, the fully
/// resolved configuration and the result.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: C,
    pub result: R,
}

pub fn emit<C: Serialize, R: Serialize>(path: Option<&Path>, command: &str, config: C, result: R) -> CliResult<()> {
    let env = Envelope {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        result,
    };
    let text = serde_json::to_string_pretty(&env)?;
    write_to(path, |w| writeln!(w, "{text}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_small_file() {
        let s = parse_sample("x,y\n3,0\n1, 2\n".as_bytes(), "t").unwrap();
        assert_eq!(s.xs(), &[3.0, 1.0]);
        assert_eq!(s.ys(), &[0.0, 2.0]);
    }

    #[test]
    fn reports_the_offending_line() {
        let err = parse_sample("x,y\n1,2\n3,abc\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, CliError::Csv { line: 3, .. }), "{err}");
        let err = parse_sample("x,y\n1,2\n3\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, CliError::Csv { line: 3, .. }), "{err}");
        let err = parse_sample("x,y\nNaN,2\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, CliError::Csv { line: 2, .. }), "{err}");
        let err = parse_sample("a,b\n1,2\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, CliError::Csv { line: 1, .. }), "{err}");
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(parse_sample("x,y\n".as_bytes(), "t"), Err(CliError::Input { .. })));
        assert!(parse_sample("".as_bytes(), "t").is_err());
    }

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, 5e-324] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
