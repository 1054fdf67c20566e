//! Stein operator <-> density ODE duality.
//!
//! Write `A = sum c_ij D^j M^i` (derivatives on the left). Then the density
//! solves `B p = 0` with `B = sum (-1)^j c_ij M^i D^j`, and conversely.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Result, SteinError};
use crate::opweyl::{OperatorPoly, XPoly};
use crate::scalar::{self, to_f64, Scalar};

/// `sum_j q_j(x) p^(j)(x) = 0`; `coeffs[j]` is `q_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityODE {
    coeffs: Vec<XPoly>,
}

impl DensityODE {
    pub fn new(mut coeffs: Vec<XPoly>) -> Result<Self> {
        while coeffs.last().is_some_and(XPoly::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(SteinError::ZeroOperator);
        }
        Ok(DensityODE { coeffs })
    }

    pub fn from_operator(b: &OperatorPoly) -> Result<Self> {
        let order = b.order().ok_or(SteinError::ZeroOperator)?;
        let mut coeffs = vec![Vec::new(); order + 1];
        for (i, j, c) in b.terms() {
            let q: &mut Vec<Scalar> = &mut coeffs[j];
            if q.len() <= i {
                q.resize(i + 1, Scalar::zero());
            }
            q[i] = c.clone();
        }
        Self::new(coeffs.into_iter().map(XPoly::new).collect())
    }

    /// `B` as an operator in `M`, `D`.
    pub fn to_operator(&self) -> OperatorPoly {
        OperatorPoly::from_terms(self.coeffs.iter().enumerate().flat_map(|(j, q)| {
            q.coeffs()
                .iter()
                .enumerate()
                .map(move |(i, c)| (i, j, c.clone()))
        }))
    }

    /// Highest derivative present; may be 0 for a degenerate input.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> XPoly {
        self.coeffs.get(j).cloned().unwrap_or_else(XPoly::zero)
    }

    /// Scaled so the lexicographically leading `x^i p^(j)` term has coefficient 1.
    pub fn normalized(&self) -> Self {
        Self::from_operator(&self.to_operator().normalized()).expect("nonzero")
    }

    pub fn proportional(&self, other: &DensityODE) -> Option<Scalar> {
        self.to_operator().proportional(&other.to_operator())
    }

    /// `coeffs[j][i]` as `"p/q"` strings.
    pub fn coeff_strings(&self) -> Vec<Vec<String>> {
        self.coeffs
            .iter()
            .map(|q| q.coeffs().iter().map(scalar::fmt).collect())
            .collect()
    }

    /// `sum_j q_j(x) derivs[j]`.
    pub fn residual(&self, x: f64, derivs: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(derivs)
            .map(|(q, d)| {
                let qx = q
                    .coeffs()
                    .iter()
                    .rev()
                    .fold(0.0, |acc, c| acc * x + to_f64(c));
                qx * d
            })
            .sum()
    }

    pub fn to_text(&self) -> String {
        self.render(false)
    }

    pub fn to_latex(&self) -> String {
        self.render(true)
    }

    fn render(&self, latex: bool) -> String {
        let deriv = |j: usize| -> String {
            let base = match j {
                0..=3 => format!("p{}", "'".repeat(j)),
                _ if latex => format!("p^{{({j})}}"),
                _ => format!("p^({j})"),
            };
            if latex {
                format!("{base}(x)")
            } else {
                base
            }
        };
        let mut out = String::new();
        for (j, q) in self.coeffs.iter().enumerate().rev() {
            if q.is_zero() {
                continue;
            }
            let nonzero: Vec<(usize, &Scalar)> = q
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            let (neg, body) = if nonzero.len() == 1 {
                let (i, c) = nonzero[0];
                let mag = c.abs();
                let coef = if mag.is_one() {
                    String::new()
                } else {
                    num(&mag, latex)
                };
                let xp = xpow(i, latex);
                let sep = if latex { "" } else { " " };
                let head: Vec<&str> = [coef.as_str(), xp.as_str()]
                    .into_iter()
                    .filter(|s| !s.is_empty())
                    .collect();
                let body = if head.is_empty() {
                    deriv(j)
                } else {
                    format!("{}{sep}{}", head.join(sep), deriv(j))
                };
                (c.is_negative(), body)
            } else {
                // pull out the sign of the top power
                let flip = nonzero.last().expect("nonempty").1.is_negative();
                let inner = poly_text(q, flip, latex);
                let sep = if latex { "" } else { " " };
                (flip, format!("({inner}){sep}{}", deriv(j)))
            };
            match (out.is_empty(), neg) {
                (true, true) => out.push('-'),
                (true, false) => {}
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
            }
            out.push_str(&body);
        }
        out.push_str(" = 0");
        out
    }
}

fn num(c: &Scalar, latex: bool) -> String {
    if latex && !c.is_integer() {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    } else {
        scalar::fmt(c)
    }
}

fn xpow(i: usize, latex: bool) -> String {
    match i {
        0 => String::new(),
        1 => "x".into(),
        _ if latex && i >= 10 => format!("x^{{{i}}}"),
        _ => format!("x^{i}"),
    }
}

/// `x + 3 - r` style text of a polynomial, optionally negated.
fn poly_text(q: &XPoly, negate: bool, latex: bool) -> String {
    let mut out = String::new();
    for (i, c) in q.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let c = if negate { -c.clone() } else { c.clone() };
        let mag = c.abs();
        let xp = xpow(i, latex);
        let body = match (mag.is_one(), xp.is_empty()) {
            (true, false) => xp,
            (_, true) => num(&mag, latex),
            (false, false) => {
                let sep = if latex { "" } else { " " };
                format!("{}{sep}{xp}", num(&mag, latex))
            }
        };
        match (out.is_empty(), c.is_negative()) {
            (true, true) => out.push('-'),
            (true, false) => {}
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    out
}

fn flip_odd(coeffs: &BTreeMap<(usize, usize), Scalar>) -> BTreeMap<(usize, usize), Scalar> {
    coeffs
        .iter()
        .map(|(&(i, j), c)| ((i, j), if j % 2 == 1 { -c.clone() } else { c.clone() }))
        .collect()
}

/// The density ODE dual to a Stein operator.
pub fn dual_density_ode(a: &OperatorPoly) -> Result<DensityODE> {
    let c = flip_odd(&a.to_d_left());
    let b = OperatorPoly::from_terms(c.into_iter().map(|((i, j), v)| (i, j, v)));
    DensityODE::from_operator(&b)
}

/// The Stein operator dual to a density ODE; inverse of [`dual_density_ode`].
pub fn dual_operator(b: &DensityODE) -> OperatorPoly {
    let op = b.to_operator();
    let c: BTreeMap<(usize, usize), Scalar> =
        op.terms().map(|(i, j, v)| ((i, j), v.clone())).collect();
    OperatorPoly::from_d_left(&flip_odd(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};
    use crate::steinops::{
        centered_normal_product, equal_means_operator, sum_transform, to_linear_form,
    };

    fn ode(rows: &[&[Scalar]]) -> DensityODE {
        DensityODE::new(rows.iter().map(|r| XPoly::new(r.to_vec())).collect()).unwrap()
    }

    #[test]
    fn normal_density() {
        let a = &OperatorPoly::d() - &OperatorPoly::m();
        let b = dual_density_ode(&a).unwrap();
        // -(p' + x p)
        let want = ode(&[&[int(0), int(1)], &[int(1)]]);
        assert_eq!(b.proportional(&want), Some(int(-1)));
        assert_eq!(dual_operator(&b), a);
    }

    #[test]
    fn bessel_density() {
        let a = centered_normal_product(&int(1)).unwrap();
        let b = dual_density_ode(&a).unwrap().normalized();
        let want = ode(&[&[int(0), int(-1)], &[int(1)], &[int(0), int(1)]]);
        assert_eq!(b, want);
        assert_eq!(b.to_text(), "x p'' + p' - x p = 0");
    }

    #[test]
    fn sum_of_products_density() {
        for (mu, r) in [(int(0), 1u32), (int(1), 2), (ratio(3, 2), 3)] {
            let a = sum_transform(&to_linear_form(&equal_means_operator(&mu)).unwrap(), r).unwrap();
            let b = dual_density_ode(&a).unwrap().normalized();
            let r = int(r as i64);
            let mu2 = &mu * &mu;
            let want = ode(&[
                &[-(int(1) - &r * &mu2), int(-1)],
                &[-(&r * (int(1) + &mu2) - int(2)), int(-1)],
                &[int(3) - &r, int(1)],
                &[int(0), int(1)],
            ]);
            assert_eq!(b, want);
        }
    }

    #[test]
    fn text_forms() {
        let b = ode(&[
            &[int(-1), int(-1)],
            &[int(0), int(2)],
            &[int(3), int(1)],
            &[int(0), int(1)],
        ]);
        assert_eq!(b.to_text(), "x p''' + (x + 3) p'' + 2 x p' - (x + 1) p = 0");
        assert_eq!(
            b.to_latex(),
            "xp'''(x) + (x + 3)p''(x) + 2xp'(x) - (x + 1)p(x) = 0"
        );
        let c = ode(&[&[int(0)], &[int(0)], &[int(0)], &[int(0)], &[ratio(1, 2)]]);
        assert_eq!(c.to_latex(), "\\frac{1}{2}p^{(4)}(x) = 0");
    }
}
