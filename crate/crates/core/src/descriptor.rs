//! Compact text descriptors such as `locscale(gaussian(0,1),2,3)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Arg {
    Num(f64),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Term {
    pub name: String,
    pub args: Vec<Arg>,
}

impl Term {
    pub fn numbers(&self, kind: &'static str, input: &str, arity: usize) -> Result<Vec<f64>> {
        if self.args.len() != arity {
            return Err(parse_error(
                kind,
                input,
                format!("`{}` takes {arity} argument(s), got {}", self.name, self.args.len()),
            ));
        }
        self.args
            .iter()
            .map(|a| match a {
                Arg::Num(x) => Ok(*x),
                Arg::Term(t) => Err(parse_error(kind, input, format!("expected a number, found `{}`", t.name))),
            })
            .collect()
    }
}

pub(crate) fn parse_error(kind: &'static str, input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        kind,
        input: input.to_string(),
        reason: reason.into(),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn term(&mut self) -> std::result::Result<Term, String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("expected a name at offset {start}"));
        }
        let name = String::from_utf8_lossy(&self.src[start..self.pos]).to_ascii_lowercase();
        let mut args = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            if self.peek() == Some(b')') {
                self.pos += 1;
                return Ok(Term { name, args });
            }
            loop {
                args.push(self.arg()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    other => {
                        return Err(format!(
                            "expected `,` or `)` at offset {}, found {:?}",
                            self.pos,
                            other.map(char::from)
                        ))
                    }
                }
            }
        }
        Ok(Term { name, args })
    }

    fn arg(&mut self) -> std::result::Result<Arg, String> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                // `inf`/`nan` are not meaningful parameters; names start terms.
                self.term().map(Arg::Term)
            }
            Some(_) => {
                let start = self.pos;
                while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                text.parse::<f64>()
                    .map(Arg::Num)
                    .map_err(|_| format!("bad number `{text}` at offset {start}"))
            }
            None => Err("unexpected end of input".into()),
        }
    }
}

pub(crate) fn parse(kind: &'static str, input: &str) -> Result<Term> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    let term = p.term().map_err(|r| parse_error(kind, input, r))?;
    if p.peek().is_some() {
        return Err(parse_error(kind, input, format!("trailing input at offset {}", p.pos)));
    }
    Ok(term)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_terms() {
        let t = parse("distribution", " locscale( gaussian(0, 1), 2,-3.5e0 )").unwrap();
        assert_eq!(t.name, "locscale");
        assert_eq!(t.args.len(), 3);
        assert_eq!(
            t.args[0],
            Arg::Term(Term {
                name: "gaussian".into(),
                args: vec![Arg::Num(0.0), Arg::Num(1.0)]
            })
        );
        assert_eq!(t.args[2], Arg::Num(-3.5));
    }

    #[test]
    fn bare_names_and_errors() {
        assert_eq!(parse("coupling", "independent").unwrap().args, vec![]);
        assert!(parse("coupling", "gauss(0.5").is_err());
        assert!(parse("coupling", "gauss(0.5))").is_err());
        assert!(parse("coupling", "gauss(abc)").is_ok());
        assert!(parse("coupling", "gauss(1..2)").is_err());
    }
}
