use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One ERGM statistic. Decay parameters are fixed constants.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelTerm {
    Edges,
    /// Geometrically weighted edgewise shared partners with decay `φ_v`.
    Gwesp { decay: f64 },
    /// Geometrically weighted degree with decay `φ_u`.
    Gwd { decay: f64 },
    /// Edges whose endpoints agree on every listed covariate.
    Nodematch { covariates: Vec<String> },
}

impl fmt::Display for ModelTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelTerm::Edges => write!(f, "edges"),
            ModelTerm::Gwesp { decay } => write!(f, "gwesp({decay:?})"),
            ModelTerm::Gwd { decay } => write!(f, "gwd({decay:?})"),
            ModelTerm::Nodematch { covariates } => write!(f, "nodematch({})", covariates.join(",")),
        }
    }
}

/// Ordered term list; the order fixes the coordinates of θ and `s(y)`.
///
/// Parses the mini-grammar `edges + gwesp(0.2) + gwd(0.8) + nodematch(smoke,drugs)`.
/// Terms are separated by `+` or a top-level `,`; decay arguments accept a
/// number, `log(x)` or `log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModelSpec {
    terms: Vec<ModelTerm>,
}

impl ModelSpec {
    pub fn new(terms: Vec<ModelTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("model needs at least one term".into()));
        }
        for t in &terms {
            match t {
                ModelTerm::Gwesp { decay } | ModelTerm::Gwd { decay }
                    if !(decay.is_finite() && *decay > 0.0) =>
                {
                    return Err(Error::Invalid(format!("decay must be positive, got {decay}")))
                }
                ModelTerm::Nodematch { covariates } if covariates.is_empty() => {
                    return Err(Error::Invalid("nodematch needs a covariate".into()))
                }
                _ => {}
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[ModelTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl From<ModelSpec> for String {
    fn from(s: ModelSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for ModelSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let mut terms = vec![p.term()?];
        loop {
            p.skip_ws();
            match p.peek() {
                None => break,
                Some('+') | Some(',') => {
                    p.pos += 1;
                    terms.push(p.term()?);
                }
                Some(c) => return Err(p.error(format!("expected `+` or end of input, found `{c}`"))),
            }
        }
        ModelSpec::new(terms).map_err(|e| Error::ModelSpec {
            column: 1,
            message: e.to_string(),
        })
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self, message: String) -> Error {
        Error::ModelSpec {
            column: self.src[..self.pos].chars().count() + 1,
            message,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '.' || c == '-')
        {
            self.pos += self.peek().unwrap().len_utf8();
        }
        if start == self.pos {
            return Err(self.error("expected a name".into()));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if self.src[self.pos..].starts_with("log") {
            self.pos += 3;
            self.skip_ws();
            let paren = self.peek() == Some('(');
            if paren {
                self.pos += 1;
            }
            let x = self.number()?;
            if paren {
                self.expect(')')?;
            }
            if x <= 0.0 {
                self.pos = start;
                return Err(self.error("log of a non-positive number".into()));
            }
            return Ok(x.ln());
        }
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'))
        {
            // a `+` only belongs to the number right after an exponent marker
            if self.peek() == Some('+') && !self.src[..self.pos].ends_with(['e', 'E']) {
                break;
            }
            self.pos += 1;
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| {
                let mut e = Parser { src: self.src, pos: start };
                e.skip_ws();
                e.error("expected a number".into())
            })
    }

    fn term(&mut self) -> Result<ModelTerm> {
        self.skip_ws();
        let start = self.pos;
        let name = self.ident()?;
        let term = match name.as_str() {
            "edges" => ModelTerm::Edges,
            "gwesp" | "gwd" | "gwdegree" => {
                self.expect('(')?;
                let decay = self.number()?;
                self.expect(')')?;
                if !(decay > 0.0) {
                    self.pos = start;
                    return Err(self.error(format!("{name} decay must be positive")));
                }
                if name == "gwesp" {
                    ModelTerm::Gwesp { decay }
                } else {
                    ModelTerm::Gwd { decay }
                }
            }
            "nodematch" => {
                self.expect('(')?;
                let mut covariates = vec![self.ident()?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => {
                            self.pos += 1;
                            covariates.push(self.ident()?);
                        }
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.error("expected `,` or `)`".into())),
                    }
                }
                ModelTerm::Nodematch { covariates }
            }
            other => {
                self.pos = start;
                return Err(self.error(format!("unknown term `{other}`")));
            }
        };
        Ok(term)
    }
}
