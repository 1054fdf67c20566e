//! Text, LaTeX and JSON renderings of operators.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::OperatorPoly;
use crate::error::{Result, SteinError};
use crate::scalar::{self, Scalar};

/// Wire form: `{"terms":[{"m":i,"d":j,"coeff":"p/q"}]}`, sorted by `(m, d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub m: usize,
    pub d: usize,
    pub coeff: String,
}

fn power(sym: &str, e: usize, sep: &str) -> String {
    match e {
        0 => String::new(),
        1 => sym.to_string(),
        _ if sep.is_empty() && e >= 10 => format!("{sym}^{{{e}}}"),
        _ => format!("{sym}^{e}"),
    }
}

fn latex_scalar(c: &Scalar) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

/// Joins signed pieces as `a + b - c`; each piece is (negative?, magnitude text).
fn join_signed(pieces: &[(bool, String)]) -> String {
    let mut out = String::new();
    for (n, (neg, body)) in pieces.iter().enumerate() {
        match (n, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(body);
    }
    out
}

impl OperatorPoly {
    /// Plain text such as `M D^3 - M D^2 + D^2 - 2 D + M - 1`, terms in
    /// descending `(i, j)` order.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let pieces: Vec<(bool, String)> = self
            .terms()
            .rev()
            .map(|(i, j, c)| {
                let mag = c.abs();
                let syms: Vec<String> = [power("M", i, " "), power("D", j, " ")]
                    .into_iter()
                    .filter(|s| !s.is_empty())
                    .collect();
                let body = if syms.is_empty() {
                    scalar::fmt(&mag)
                } else if mag.is_one() {
                    syms.join(" ")
                } else {
                    format!("{} {}", scalar::fmt(&mag), syms.join(" "))
                };
                (c.is_negative(), body)
            })
            .collect();
        join_signed(&pieces)
    }

    /// LaTeX grouped by powers of `D`, e.g. `MD^3 - (M - I)D^2 - (M + 2I)D + M - I`.
    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut groups: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
        for (i, j, c) in self.terms() {
            groups.entry(j).or_default().push((i, c.clone()));
        }
        let mut pieces = Vec::new();
        for (&j, inner) in groups.iter().rev() {
            let dpart = power("D", j, "");
            let monomial = |i: usize, mag: &Scalar| -> String {
                let mpart = power("M", i, "");
                let sym = if mpart.is_empty() && j == 0 {
                    "I".to_string()
                } else {
                    mpart
                };
                if mag.is_one() {
                    if sym.is_empty() {
                        "I".to_string()
                    } else {
                        sym
                    }
                } else {
                    format!("{}{}", latex_scalar(mag), sym)
                }
            };
            let mut inner = inner.clone();
            inner.sort_by_key(|t| std::cmp::Reverse(t.0));
            if j == 0 {
                for (i, c) in &inner {
                    pieces.push((c.is_negative(), monomial(*i, &c.abs())));
                }
            } else if inner.len() == 1 {
                let (i, c) = &inner[0];
                let mpart = power("M", *i, "");
                let coef = if c.abs().is_one() {
                    String::new()
                } else {
                    latex_scalar(&c.abs())
                };
                pieces.push((c.is_negative(), format!("{coef}{mpart}{dpart}")));
            } else {
                let flip = inner[0].1.is_negative();
                let sub: Vec<(bool, String)> = inner
                    .iter()
                    .map(|(i, c)| {
                        let c = if flip { -c } else { c.clone() };
                        let body = if *i == 0 {
                            if c.abs().is_one() {
                                "I".to_string()
                            } else {
                                format!("{}I", latex_scalar(&c.abs()))
                            }
                        } else {
                            monomial(*i, &c.abs())
                        };
                        (c.is_negative(), body)
                    })
                    .collect();
                pieces.push((flip, format!("({}){dpart}", join_signed(&sub))));
            }
        }
        join_signed(&pieces)
    }

    pub fn to_json_value(&self) -> OperatorJson {
        OperatorJson {
            terms: self
                .terms()
                .map(|(m, d, c)| TermJson {
                    m,
                    d,
                    coeff: scalar::fmt(c),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("operator json")
    }

    pub fn from_json_value(v: &OperatorJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(v.terms.len());
        for t in &v.terms {
            let c = scalar::parse(&t.coeff)?;
            if !c.is_zero() {
                terms.push((t.m, t.d, c));
            }
        }
        Ok(OperatorPoly::from_terms(terms))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: OperatorJson =
            serde_json::from_str(s).map_err(|e| SteinError::Parse(e.to_string()))?;
        Self::from_json_value(&v)
    }
}

impl OperatorPoly {
    /// Parses text such as `M D^2 + D - M`, `3/2 x D - 1` or `(M D + I)^2`.
    ///
    /// `M` and `x` both denote multiplication by `x`, `I` the identity.
    /// Juxtaposition or `*` multiplies in the written order, so `D M` is `M D + 1`.
    pub fn parse_text(s: &str) -> Result<Self> {
        let mut p = Parser {
            chars: s
                .chars()
                .filter(|c| !c.is_whitespace() || *c == ' ')
                .collect(),
            pos: 0,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.err("unexpected character"));
        }
        Ok(out)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, what: &str) -> SteinError {
        SteinError::Parse(format!("{what} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos) == Some(&' ') {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<OperatorPoly> {
        let mut acc = OperatorPoly::zero();
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    false
                }
                Some('-') => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                _ => break,
            };
            let t = self.term()?;
            acc = if neg { &acc - &t } else { &acc + &t };
            first = false;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<OperatorPoly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(c) if c.is_ascii_digit() || c == '.' || "MDIx(".contains(c) => {
                    acc = &acc * &self.factor()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<OperatorPoly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let e: u32 = digits.parse().map_err(|_| self.err("expected exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<OperatorPoly> {
        match self.peek() {
            Some('M') | Some('x') => {
                self.pos += 1;
                Ok(OperatorPoly::m())
            }
            Some('D') => {
                self.pos += 1;
                Ok(OperatorPoly::d())
            }
            Some('I') => {
                self.pos += 1;
                Ok(OperatorPoly::identity())
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_digit() || *c == '.' || *c == '/')
                {
                    self.pos += 1;
                }
                let lit: String = self.chars[start..self.pos].iter().collect();
                Ok(OperatorPoly::constant(scalar::parse(&lit)?))
            }
            _ => Err(self.err("expected M, x, D, I, a number or '('")),
        }
    }
}

impl std::fmt::Display for OperatorPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn op(terms: &[(usize, usize, i64)]) -> OperatorPoly {
        OperatorPoly::from_terms(terms.iter().map(|&(i, j, c)| (i, j, int(c))))
    }

    #[test]
    fn text_examples() {
        assert_eq!(op(&[(1, 1, 1), (0, 0, 1)]).to_text(), "M D + 1");
        assert_eq!(op(&[(0, 1, 1), (1, 0, -1)]).to_text(), "-M + D");
        assert_eq!(OperatorPoly::zero().to_text(), "0");
        let c = OperatorPoly::monomial(2, 3, ratio(-3, 4));
        assert_eq!(c.to_text(), "-3/4 M^2 D^3");
    }

    #[test]
    fn json_examples() {
        assert_eq!(
            OperatorPoly::d().to_json(),
            r#"{"terms":[{"m":0,"d":1,"coeff":"1"}]}"#
        );
        let a = op(&[(1, 3, 1), (0, 0, -2)]).scale(&ratio(1, 3));
        assert_eq!(OperatorPoly::from_json(&a.to_json()).unwrap(), a);
        assert!(OperatorPoly::from_json("{\"terms\":[{\"m\":0}]}").is_err());
    }

    #[test]
    fn latex_equal1() {
        let e = op(&[
            (1, 3, 1),
            (0, 2, 1),
            (1, 2, -1),
            (1, 1, -1),
            (0, 1, -2),
            (1, 0, 1),
            (0, 0, -1),
        ]);
        let s = e.to_latex();
        assert!(s.contains("MD^3"), "{s}");
        assert_eq!(s, "MD^3 - (M - I)D^2 - (M + 2I)D + M - I");
        assert_eq!(
            OperatorPoly::monomial(0, 12, ratio(1, 2)).to_latex(),
            "\\frac{1}{2}D^{12}"
        );
        assert_eq!(OperatorPoly::identity().to_latex(), "I");
    }

    #[test]
    fn parse_text_forms() {
        let e = op(&[
            (1, 3, 1),
            (0, 2, 1),
            (1, 2, -1),
            (1, 1, -1),
            (0, 1, -2),
            (1, 0, 1),
            (0, 0, -1),
        ]);
        assert_eq!(OperatorPoly::parse_text(&e.to_text()).unwrap(), e);
        assert_eq!(
            OperatorPoly::parse_text("M D^3 + (I - M) D^2 - (M + 2) D + M - 1").unwrap(),
            e
        );
        assert_eq!(
            OperatorPoly::parse_text("D M").unwrap(),
            op(&[(1, 1, 1), (0, 0, 1)])
        );
        assert_eq!(
            OperatorPoly::parse_text("-3/4 x^2*D^3").unwrap(),
            OperatorPoly::monomial(2, 3, ratio(-3, 4))
        );
        assert_eq!(
            OperatorPoly::parse_text("0.5").unwrap(),
            OperatorPoly::constant(ratio(1, 2))
        );
        assert!(OperatorPoly::parse_text("M +").is_err());
        assert!(OperatorPoly::parse_text("(M").is_err());
        assert!(OperatorPoly::parse_text("Q").is_err());
    }
}
