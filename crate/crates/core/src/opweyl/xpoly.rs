use std::ops::Add;

use num_traits::Zero;

use crate::scalar::Scalar;

/// Dense polynomial in `x`: `coeffs[k] * x^k`, trailing zeros trimmed.
///
/// These are the test functions operators act on.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct XPoly {
    coeffs: Vec<Scalar>,
}

impl XPoly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        XPoly { coeffs }
    }

    pub fn zero() -> Self {
        XPoly::default()
    }

    /// `c x^k`.
    pub fn monomial(k: usize, c: Scalar) -> Self {
        let mut v = vec![Scalar::zero(); k + 1];
        v[k] = c;
        XPoly::new(v)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub(crate) fn add_term(&mut self, k: usize, c: Scalar) {
        if self.coeffs.len() <= k {
            self.coeffs.resize(k + 1, Scalar::zero());
        }
        self.coeffs[k] += c;
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs
            .iter()
            .rev()
            .fold(Scalar::zero(), |acc, c| acc * x + c)
    }

    /// Expectation under a law with the given moments: `sum c_k mu_k`.
    pub fn pair(&self, moments: &[Scalar]) -> Scalar {
        self.coeffs
            .iter()
            .zip(moments)
            .fold(Scalar::zero(), |acc, (c, m)| acc + c * m)
    }
}

impl Add for &XPoly {
    type Output = XPoly;
    fn add(self, rhs: &XPoly) -> XPoly {
        let mut out = self.clone();
        for (k, c) in rhs.coeffs.iter().enumerate() {
            out.add_term(k, c.clone());
        }
        out
    }
}
