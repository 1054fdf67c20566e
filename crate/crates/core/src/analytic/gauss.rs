//! Exact complex numbers `a + b i` with rational parts, and polynomials over them.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{self, to_f64, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianRational {
    #[serde(with = "crate::scalar::serde_str")]
    pub re: Scalar,
    #[serde(with = "crate::scalar::serde_str")]
    pub im: Scalar,
}

impl GaussianRational {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: Scalar) -> Self {
        Self::new(re, Scalar::zero())
    }

    pub fn i() -> Self {
        Self::new(Scalar::zero(), Scalar::one())
    }

    pub fn zero() -> Self {
        Self::real(Scalar::zero())
    }

    pub fn one() -> Self {
        Self::real(Scalar::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> Scalar {
        &self.re * &self.re + &self.im * &self.im
    }

    /// `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

impl std::fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", scalar::fmt(&self.re)),
            (true, false) => write!(f, "{}i", scalar::fmt(&self.im)),
            (false, false) => {
                let sign = if self.im < Scalar::zero() { '-' } else { '+' };
                let mag = if self.im < Scalar::zero() {
                    -self.im.clone()
                } else {
                    self.im.clone()
                };
                write!(f, "{} {sign} {}i", scalar::fmt(&self.re), scalar::fmt(&mag))
            }
        }
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

/// Dense polynomial in `t` with [`GaussianRational`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GPoly {
    coeffs: Vec<GaussianRational>,
}

impl GPoly {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(GaussianRational::is_zero) {
            coeffs.pop();
        }
        GPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        GPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * t + c.to_complex())
    }

    /// Text such as `t^4 + 2t^2 + 1` or `-i t^3 + (1 + 2i) t`.
    pub fn to_text(&self, var: &str) -> String {
        self.render(var, false)
    }

    pub fn to_latex(&self, var: &str) -> String {
        self.render(var, true)
    }

    fn render(&self, var: &str, latex: bool) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let unit = if latex { "\\mathrm{i}" } else { "i" };
        let num = |c: &Scalar| {
            if latex && !c.is_integer() {
                format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
            } else {
                scalar::fmt(c)
            }
        };
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let pw = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ if latex && k >= 10 => format!("{var}^{{{k}}}"),
                _ => format!("{var}^{k}"),
            };
            // sign pulled out when the coefficient is purely real or purely imaginary
            let (neg, body) = match (c.re.is_zero(), c.im.is_zero()) {
                (_, true) => {
                    let m = if c.re < Scalar::zero() {
                        -c.re.clone()
                    } else {
                        c.re.clone()
                    };
                    let b = if m.is_one() && k > 0 {
                        String::new()
                    } else {
                        num(&m)
                    };
                    (c.re < Scalar::zero(), b)
                }
                (true, false) => {
                    let m = if c.im < Scalar::zero() {
                        -c.im.clone()
                    } else {
                        c.im.clone()
                    };
                    let b = if m.is_one() {
                        unit.to_string()
                    } else {
                        format!("{}{unit}", num(&m))
                    };
                    (c.im < Scalar::zero(), b)
                }
                (false, false) => {
                    let sign = if c.im < Scalar::zero() { '-' } else { '+' };
                    let m = if c.im < Scalar::zero() {
                        -c.im.clone()
                    } else {
                        c.im.clone()
                    };
                    (false, format!("({} {sign} {}{unit})", num(&c.re), num(&m)))
                }
            };
            let sep = if body.is_empty() || pw.is_empty() || latex {
                ""
            } else {
                " "
            };
            let term = format!("{body}{sep}{pw}");
            match (out.is_empty(), neg) {
                (true, true) => out.push('-'),
                (true, false) => {}
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
            }
            out.push_str(&term);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn field_ops() {
        let a = GaussianRational::new(int(1), int(2));
        let b = GaussianRational::new(ratio(1, 2), int(-1));
        assert_eq!(&a * &b, GaussianRational::new(ratio(5, 2), int(0)));
        assert_eq!(&a * &a.recip().unwrap(), GaussianRational::one());
        assert_eq!(
            GaussianRational::i().pow(2),
            GaussianRational::real(int(-1))
        );
        assert_eq!(GaussianRational::i().pow(4), GaussianRational::one());
        assert_eq!(a.to_string(), "1 + 2i");
    }

    #[test]
    fn poly_text() {
        let p = GPoly::new(vec![
            GaussianRational::one(),
            GaussianRational::zero(),
            GaussianRational::real(int(2)),
            GaussianRational::new(int(0), int(-1)),
        ]);
        assert_eq!(p.to_text("t"), "-i t^3 + 2 t^2 + 1");
        assert_eq!(p.to_latex("t"), "-\\mathrm{i}t^3 + 2t^2 + 1");
        let z = p.eval(Complex64::new(0.0, 1.0));
        assert!((z - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
    }
}
