//! Polynomial differential operators `sum a_ij M^i D^j` with `D M = M D + I`.
//!
//! Every [`OperatorPoly`] is kept in canonical form: all `M` factors to the
//! left of all `D` factors, no zero coefficients stored. Products are
//! canonicalized with the Leibniz rule
//! `D^b M^c = sum_k C(b,k) c(c-1)..(c-k+1) M^(c-k) D^(b-k)`.

mod format;
mod upoly;
mod xpoly;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Result, SteinError};
use crate::scalar::{binomial, falling, pow, Scalar};

pub use format::{OperatorJson, TermJson};
pub use upoly::UPoly;
pub use xpoly::XPoly;

/// One symbolic factor of a raw (non-canonical) operator word.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    M,
    D,
    I,
    Scalar(Scalar),
}

/// Canonical element of the Weyl algebra, keyed by `(i, j)` for `M^i D^j`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct OperatorPoly {
    terms: BTreeMap<(usize, usize), Scalar>,
}

impl OperatorPoly {
    pub fn zero() -> Self {
        OperatorPoly::default()
    }

    pub fn identity() -> Self {
        Self::monomial(0, 0, Scalar::one())
    }

    pub fn m() -> Self {
        Self::monomial(1, 0, Scalar::one())
    }

    pub fn d() -> Self {
        Self::monomial(0, 1, Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c M^i D^j`.
    pub fn monomial(i: usize, j: usize, c: Scalar) -> Self {
        let mut op = OperatorPoly::zero();
        op.add_term(i, j, c);
        op
    }

    /// Builds from `(i, j, coeff)` triples; repeated keys are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Scalar)>,
    {
        let mut op = OperatorPoly::zero();
        for (i, j, c) in terms {
            op.add_term(i, j, c);
        }
        op
    }

    fn add_term(&mut self, i: usize, j: usize, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(Scalar::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    /// Terms in ascending `(i, j)` order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (usize, usize, &Scalar)> + '_ {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn coeff(&self, i: usize, j: usize) -> Scalar {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Number of nonzero terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of `D`.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    /// Highest power of `M`.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    /// Leading term under lexicographic `(i, j)` order.
    pub fn leading(&self) -> Option<(usize, usize, &Scalar)> {
        self.terms().next_back()
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return OperatorPoly::zero();
        }
        OperatorPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(OperatorPoly::identity(), |acc, _| &acc * self)
    }

    /// Canonical form of a word of factors, read left to right as composition.
    pub fn normalize(raw: &[Factor]) -> Self {
        raw.iter().fold(OperatorPoly::identity(), |acc, f| {
            let g = match f {
                Factor::M => OperatorPoly::m(),
                Factor::D => OperatorPoly::d(),
                Factor::I => OperatorPoly::identity(),
                Factor::Scalar(c) => OperatorPoly::constant(c.clone()),
            };
            &acc * &g
        })
    }

    /// `P(MD)` in canonical form.
    pub fn from_upoly(p: &UPoly) -> Self {
        let u = &OperatorPoly::m() * &OperatorPoly::d();
        let mut power = OperatorPoly::identity();
        let mut out = OperatorPoly::zero();
        for (k, c) in p.coeffs().iter().enumerate() {
            if k > 0 {
                power = &power * &u;
            }
            out = &out + &power.scale(c);
        }
        out
    }

    /// `A x^k`, using `M^i D^j x^k = k(k-1)..(k-j+1) x^(k-j+i)`.
    pub fn apply_to_monomial(&self, k: usize) -> XPoly {
        let mut out = XPoly::zero();
        for (i, j, c) in self.terms() {
            if j > k {
                continue;
            }
            out.add_term(k - j + i, c * Scalar::from_integer(falling(k, j)));
        }
        out
    }

    pub fn apply(&self, f: &XPoly) -> XPoly {
        let mut out = XPoly::zero();
        for (k, fk) in f.coeffs().iter().enumerate() {
            if fk.is_zero() {
                continue;
            }
            for (i, j, c) in self.terms() {
                if j > k {
                    continue;
                }
                out.add_term(k - j + i, c * fk * Scalar::from_integer(falling(k, j)));
            }
        }
        out
    }

    /// `{ j - i : a_ij != 0 }`.
    pub fn band_set(&self) -> Result<BTreeSet<i64>> {
        if self.is_zero() {
            return Err(SteinError::ZeroOperator);
        }
        Ok(self
            .terms
            .keys()
            .map(|&(i, j)| j as i64 - i as i64)
            .collect())
    }

    /// Coefficient map `a_ij -> c^(j-i) a_ij`: turns a Stein operator for `X`
    /// into one for `cX`.
    pub fn rescale(&self, c: &Scalar) -> Result<Self> {
        if c.is_zero() {
            return Err(SteinError::ZeroScale);
        }
        Ok(OperatorPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), a)| ((i, j), a * pow(c, j as i64 - i as i64)))
                .collect(),
        })
    }

    /// Returns `c` with `self = c * other`, if one exists.
    ///
    /// Two zero operators are proportional with factor 1.
    pub fn proportional(&self, other: &OperatorPoly) -> Option<Scalar> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Some(Scalar::one()),
            (true, false) => return Some(Scalar::zero()),
            (false, true) => return None,
            _ => {}
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let (key, b0) = other.terms.iter().next()?;
        let c = self.terms.get(key)? / b0;
        let same = other
            .terms
            .iter()
            .all(|(k, b)| self.terms.get(k).is_some_and(|a| *a == b * &c));
        same.then_some(c)
    }

    /// Scalar multiple with leading coefficient 1 (zero stays zero).
    pub fn normalized(&self) -> Self {
        match self.leading() {
            Some((_, _, c)) => self.scale(&c.recip()),
            None => OperatorPoly::zero(),
        }
    }

    /// Re-expresses the operator as `sum c_ij D^j M^i` and returns the
    /// coefficients `c_ij` keyed by `(i, j)` (power of `M`, power of `D`).
    pub fn to_d_left(&self) -> BTreeMap<(usize, usize), Scalar> {
        let mut rest = self.clone();
        let mut out = BTreeMap::new();
        while let Some((i, j, c)) = rest
            .terms()
            .max_by_key(|&(i, j, _)| (i + j, j))
            .map(|(i, j, c)| (i, j, c.clone()))
        {
            // D^j M^i = M^i D^j + (terms of lower total degree)
            rest = &rest - &d_left_monomial(i, j).scale(&c);
            out.insert((i, j), c);
        }
        out
    }

    /// Inverse of [`OperatorPoly::to_d_left`].
    pub fn from_d_left(coeffs: &BTreeMap<(usize, usize), Scalar>) -> Self {
        let mut out = OperatorPoly::zero();
        for (&(i, j), c) in coeffs {
            out = &out + &d_left_monomial(i, j).scale(c);
        }
        out
    }
}

/// Canonical form of `D^j M^i`.
fn d_left_monomial(i: usize, j: usize) -> OperatorPoly {
    mul_monomials(0, j, i, 0, &Scalar::one())
}

/// Canonical form of `c * M^a D^b M^c2 D^d`.
fn mul_monomials(a: usize, b: usize, c2: usize, d: usize, coeff: &Scalar) -> OperatorPoly {
    let mut out = OperatorPoly::zero();
    for k in 0..=b.min(c2) {
        let w = Scalar::from_integer(binomial(b, k) * falling(c2, k));
        out.add_term(a + c2 - k, b + d - k, coeff * w);
    }
    out
}

impl Add for &OperatorPoly {
    type Output = OperatorPoly;
    fn add(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Neg for &OperatorPoly {
    type Output = OperatorPoly;
    fn neg(self) -> OperatorPoly {
        OperatorPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

impl Sub for &OperatorPoly {
    type Output = OperatorPoly;
    fn sub(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c);
        }
        out
    }
}

impl Mul for &OperatorPoly {
    type Output = OperatorPoly;
    fn mul(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = OperatorPoly::zero();
        for (&(a, b), x) in &self.terms {
            for (&(c, d), y) in &rhs.terms {
                let w = x * y;
                for k in 0..=b.min(c) {
                    let f = Scalar::from_integer(binomial(b, k) * falling(c, k));
                    out.add_term(a + c - k, b + d - k, &w * f);
                }
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for OperatorPoly {
            type Output = OperatorPoly;
            fn $m(self, rhs: OperatorPoly) -> OperatorPoly { (&self).$m(&rhs) }
        }
        impl $tr<&OperatorPoly> for OperatorPoly {
            type Output = OperatorPoly;
            fn $m(self, rhs: &OperatorPoly) -> OperatorPoly { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for OperatorPoly {
    type Output = OperatorPoly;
    fn neg(self) -> OperatorPoly {
        -&self
    }
}

impl From<&UPoly> for OperatorPoly {
    fn from(p: &UPoly) -> Self {
        OperatorPoly::from_upoly(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn op(terms: &[(usize, usize, i64)]) -> OperatorPoly {
        OperatorPoly::from_terms(terms.iter().map(|&(i, j, c)| (i, j, int(c))))
    }

    fn equal1(mu2: Scalar) -> OperatorPoly {
        let mut a = op(&[(1, 3, 1), (0, 2, 1), (1, 2, -1), (1, 1, -1), (1, 0, 1)]);
        a = &a + &OperatorPoly::monomial(0, 1, -(int(1) + &mu2));
        &a + &OperatorPoly::constant(-mu2)
    }

    #[test]
    fn normalize_examples() {
        use Factor::*;
        assert_eq!(
            OperatorPoly::normalize(&[D, M]),
            op(&[(1, 1, 1), (0, 0, 1)])
        );
        assert_eq!(
            OperatorPoly::normalize(&[D, D, M]),
            op(&[(1, 2, 1), (0, 1, 2)])
        );
        assert_eq!(
            OperatorPoly::normalize(&[M, D, M]),
            op(&[(2, 1, 1), (1, 0, 1)])
        );
        assert_eq!(
            OperatorPoly::normalize(&[Scalar(int(3)), I, D]),
            op(&[(0, 1, 3)])
        );
    }

    #[test]
    fn add_scale_examples() {
        let m = OperatorPoly::m();
        assert!((&m + &(-&m)).is_zero());
        assert!(OperatorPoly::d().scale(&int(0)).is_zero());
        let a = op(&[(1, 3, 1)]);
        let b = op(&[(0, 2, 1), (1, 2, -1)]);
        assert_eq!(&a + &b, op(&[(1, 3, 1), (0, 2, 1), (1, 2, -1)]));
    }

    #[test]
    fn mul_examples() {
        let (m, d) = (OperatorPoly::m(), OperatorPoly::d());
        assert_eq!(&d * &m, op(&[(1, 1, 1), (0, 0, 1)]));
        assert_eq!(&m * &d, op(&[(1, 1, 1)]));
        let p = UPoly::new(vec![int(1), int(3), int(1)]);
        let lhs = &OperatorPoly::from_upoly(&p) * &m;
        let rhs = &m * &OperatorPoly::from_upoly(&p.shift_int(1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn from_upoly_examples() {
        assert_eq!(
            OperatorPoly::from_upoly(&UPoly::constant(int(1))),
            OperatorPoly::identity()
        );
        assert_eq!(OperatorPoly::from_upoly(&UPoly::u()), op(&[(1, 1, 1)]));
        use Factor::*;
        let u2 = OperatorPoly::from_upoly(&UPoly::u().pow(2));
        assert_eq!(u2, OperatorPoly::normalize(&[M, D, M, D]));
        assert_eq!(u2, op(&[(2, 2, 1), (1, 1, 1)]));
    }

    #[test]
    fn apply_examples() {
        let md = op(&[(1, 1, 1)]);
        assert_eq!(md.apply_to_monomial(3), XPoly::monomial(3, int(3)));
        assert_eq!(
            op(&[(2, 1, 1)]).apply_to_monomial(3),
            XPoly::monomial(4, int(3))
        );
        assert!(op(&[(0, 2, 1)]).apply_to_monomial(1).is_zero());

        let f = XPoly::new(vec![int(1), int(0), int(1)]);
        assert_eq!(OperatorPoly::d().apply(&f), XPoly::monomial(1, int(2)));
        assert_eq!(
            OperatorPoly::m().apply(&XPoly::monomial(1, int(1))),
            XPoly::monomial(2, int(1))
        );
        let one = XPoly::monomial(0, int(1));
        assert_eq!(
            equal1(int(1)).apply(&one),
            XPoly::new(vec![int(-1), int(1)])
        );
    }

    #[test]
    fn band_set_examples() {
        let dm = op(&[(0, 1, 1), (1, 0, -1)]);
        assert_eq!(dm.band_set().unwrap(), [-1, 1].into_iter().collect());
        let shifted = &dm + &OperatorPoly::constant(ratio(2, 3));
        assert_eq!(shifted.band_set().unwrap().len(), 3);
        assert_eq!(
            OperatorPoly::zero().band_set(),
            Err(SteinError::ZeroOperator)
        );
    }

    #[test]
    fn rescale_examples() {
        let a = op(&[(0, 1, 1), (1, 0, -1)]);
        let s = int(3);
        let r = a.rescale(&s).unwrap();
        // proportional to 9 D - M
        assert_eq!(
            r.proportional(&op(&[(0, 1, 9), (1, 0, -1)])),
            Some(ratio(1, 3))
        );
        assert_eq!(a.rescale(&int(1)).unwrap(), a);
        assert_eq!(a.rescale(&int(0)), Err(SteinError::ZeroScale));
        let e = equal1(ratio(9, 4));
        let c = ratio(-2, 7);
        assert_eq!(e.rescale(&c).unwrap().rescale(&c.recip()).unwrap(), e);
    }

    #[test]
    fn proportional_examples() {
        let d = OperatorPoly::d();
        assert_eq!(d.scale(&int(2)).proportional(&d), Some(int(2)));
        assert_eq!(d.proportional(&OperatorPoly::m()), None);
        let a = op(&[(1, 1, 2), (0, 0, 4)]);
        let b = op(&[(1, 1, 1), (0, 0, 3)]);
        assert_eq!(a.proportional(&b), None);
    }

    #[test]
    fn d_left_roundtrip_and_known_case() {
        // M D^2 = D^2 M - 2 D
        let a = op(&[(1, 2, 1)]);
        let dl = a.to_d_left();
        assert_eq!(dl.get(&(1, 2)), Some(&int(1)));
        assert_eq!(dl.get(&(0, 1)), Some(&int(-2)));
        assert_eq!(dl.len(), 2);
        let e = equal1(int(5));
        assert_eq!(OperatorPoly::from_d_left(&e.to_d_left()), e);
    }

    #[test]
    fn leading_and_normalized() {
        let e = equal1(int(1)).scale(&ratio(-3, 2));
        assert_eq!(e.leading().map(|(i, j, _)| (i, j)), Some((1, 3)));
        assert_eq!(e.normalized(), equal1(int(1)));
        assert_eq!(e.order(), Some(3));
        assert_eq!(e.degree(), Some(1));
    }
}
