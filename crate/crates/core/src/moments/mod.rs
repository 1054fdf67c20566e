//! Exact moment sequences and the operator-driven moment recurrence.

mod sampler;

use num_traits::{One, Zero};

use crate::error::{Result, SteinError};
use crate::opweyl::OperatorPoly;
use crate::scalar::{self, binomial, falling, int, Scalar};
use crate::steinops::{base_operator, DistributionSpec};

pub use sampler::Sampler;

/// Lazily extended list of exact moments `E Z^k`, `known[0] = 1`.
///
/// Extension mutates the cache, so a sequence shared between threads must be
/// cloned or extended up front.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    known: Vec<Scalar>,
    rule: Rule,
}

#[derive(Clone, Debug)]
enum Rule {
    Fixed,
    PointMass(Scalar),
    Normal {
        mean: Scalar,
        variance: Scalar,
    },
    ShiftedGamma {
        shape: Scalar,
        shift: Scalar,
    },
    Product(Box<MomentSequence>, Box<MomentSequence>),
    Sum {
        base: Box<MomentSequence>,
        n: u32,
    },
    Scaled {
        c: Scalar,
        base: Box<MomentSequence>,
    },
    Shifted {
        a: Scalar,
        base: Box<MomentSequence>,
    },
    Recurrence(Recurrence),
}

/// `E[A x^k] = 0` solved for the highest moment index, `k - s_min`.
#[derive(Clone, Debug)]
struct Recurrence {
    terms: Vec<(usize, usize, Scalar)>,
    s_min: i64,
}

impl Recurrence {
    fn new(op: &OperatorPoly) -> Result<Self> {
        let band = op.band_set()?;
        Ok(Recurrence {
            terms: op.terms().map(|(i, j, c)| (i, j, c.clone())).collect(),
            s_min: *band.first().expect("nonzero operator"),
        })
    }

    /// Residual and leading coefficient of equation `k`, treating the top
    /// moment as unknown when it is not yet in `known`.
    fn equation(&self, k: usize, known: &[Scalar]) -> (Scalar, Scalar) {
        let mut lead = Scalar::zero();
        let mut rest = Scalar::zero();
        for (i, j, c) in &self.terms {
            let w = falling(k, *j);
            if w.is_zero() {
                continue;
            }
            let idx = k + i - j;
            let coeff = c * Scalar::from_integer(w);
            if (*j as i64 - *i as i64) == self.s_min && idx >= known.len() {
                lead += coeff;
            } else {
                rest += coeff * &known[idx];
            }
        }
        (lead, rest)
    }

    fn solve_next(&self, known: &[Scalar]) -> Result<Scalar> {
        let top = known.len() as i64;
        let k = top + self.s_min;
        if k < 0 {
            return Err(SteinError::MomentUnavailable {
                index: known.len(),
                reason: "below the recurrence's reach; supply it as an initial moment".into(),
            });
        }
        let (lead, rest) = self.equation(k as usize, known);
        if lead.is_zero() {
            return Err(SteinError::VanishingLeading { k: k as usize });
        }
        Ok(-rest / lead)
    }
}

impl MomentSequence {
    fn with_rule(rule: Rule) -> Self {
        MomentSequence {
            known: vec![Scalar::one()],
            rule,
        }
    }

    /// A finite list; asking beyond it is an error. `values[0]` must be 1.
    pub fn from_values(values: Vec<Scalar>) -> Result<Self> {
        if values.first() != Some(&Scalar::one()) {
            return Err(SteinError::Domain("moment list must start with 1".into()));
        }
        Ok(MomentSequence {
            known: values,
            rule: Rule::Fixed,
        })
    }

    pub fn point_mass(a: Scalar) -> Self {
        Self::with_rule(Rule::PointMass(a))
    }

    /// Moments already computed.
    pub fn known(&self) -> &[Scalar] {
        &self.known
    }

    pub fn moment(&mut self, k: usize) -> Result<Scalar> {
        self.extend_to(k + 1)?;
        Ok(self.known[k].clone())
    }

    /// `E Z^0 .. E Z^(len-1)`.
    pub fn prefix(&mut self, len: usize) -> Result<&[Scalar]> {
        self.extend_to(len)?;
        Ok(&self.known[..len])
    }

    pub fn extend_to(&mut self, len: usize) -> Result<()> {
        if self.known.len() >= len {
            return Ok(());
        }
        match &mut self.rule {
            Rule::Fixed => {
                return Err(SteinError::MomentUnavailable {
                    index: self.known.len(),
                    reason: format!("finite list of {} moments", self.known.len()),
                })
            }
            Rule::PointMass(a) => {
                while self.known.len() < len {
                    let next = self.known.last().expect("nonempty") * &*a;
                    self.known.push(next);
                }
            }
            Rule::Normal { mean, variance } => {
                while self.known.len() < len {
                    let k = self.known.len();
                    let prev = &self.known[k - 1];
                    let mut next = mean.clone() * prev;
                    if k >= 2 {
                        next += int(k as i64 - 1) * &*variance * &self.known[k - 2];
                    }
                    self.known.push(next);
                }
            }
            Rule::ShiftedGamma { shape, shift } => {
                let mut raw = vec![Scalar::one()];
                for t in 0..len {
                    let next = raw[t].clone() * (&*shape + int(t as i64));
                    raw.push(next);
                }
                while self.known.len() < len {
                    let k = self.known.len();
                    let v = shifted_moment(&raw, shift, k);
                    self.known.push(v);
                }
            }
            Rule::Product(a, b) => {
                a.extend_to(len)?;
                b.extend_to(len)?;
                while self.known.len() < len {
                    let k = self.known.len();
                    self.known.push(&a.known[k] * &b.known[k]);
                }
            }
            Rule::Sum { base, n } => {
                base.extend_to(len)?;
                let b = &base.known[..len];
                let mut acc = b.to_vec();
                for _ in 1..*n {
                    acc = (0..len)
                        .map(|k| {
                            (0..=k).fold(Scalar::zero(), |s, j| {
                                s + Scalar::from_integer(binomial(k, j)) * &acc[j] * &b[k - j]
                            })
                        })
                        .collect();
                }
                self.known = acc;
            }
            Rule::Scaled { c, base } => {
                base.extend_to(len)?;
                while self.known.len() < len {
                    let k = self.known.len();
                    let v = scalar::pow(c, k as i64) * &base.known[k];
                    self.known.push(v);
                }
            }
            Rule::Shifted { a, base } => {
                base.extend_to(len)?;
                while self.known.len() < len {
                    let k = self.known.len();
                    let v = shifted_moment(&base.known, a, k);
                    self.known.push(v);
                }
            }
            Rule::Recurrence(rec) => {
                while self.known.len() < len {
                    let v = rec.solve_next(&self.known)?;
                    self.known.push(v);
                }
            }
        }
        Ok(())
    }
}

/// `E (X + a)^k` from the moments of `X`.
fn shifted_moment(raw: &[Scalar], a: &Scalar, k: usize) -> Scalar {
    (0..=k).fold(Scalar::zero(), |s, j| {
        s + Scalar::from_integer(binomial(k, j)) * &raw[j] * scalar::pow(a, (k - j) as i64)
    })
}

/// `m_k = mean m_(k-1) + (k-1) variance m_(k-2)`.
pub fn normal_moments(mean: &Scalar, variance: &Scalar) -> Result<MomentSequence> {
    if variance <= &Scalar::zero() {
        return Err(SteinError::Domain("variance must be > 0".into()));
    }
    Ok(MomentSequence::with_rule(Rule::Normal {
        mean: mean.clone(),
        variance: variance.clone(),
    }))
}

/// Moments of `Gamma(shape, 1) + shift`.
pub fn shifted_gamma_moments(shape: &Scalar, shift: &Scalar) -> Result<MomentSequence> {
    if shape <= &Scalar::zero() {
        return Err(SteinError::Domain("gamma shape must be > 0".into()));
    }
    Ok(MomentSequence::with_rule(Rule::ShiftedGamma {
        shape: shape.clone(),
        shift: shift.clone(),
    }))
}

/// Moments of `VG(r, theta, sigma, 0)` from the recurrence of its Stein
/// operator `sigma^2 T_r D + 2 theta T_(r/2) - M`, seeded with `m_0 = 1`.
pub fn vg_moments(r: &Scalar, theta: &Scalar, sigma: &Scalar) -> Result<MomentSequence> {
    let spec = DistributionSpec::variance_gamma(r.clone(), theta.clone(), sigma.clone(), int(0));
    moment_recurrence_solve(&base_operator(&spec)?, &[Scalar::one()])
}

/// Moments of `XY` for independent `X, Y`.
pub fn product_moments(x: MomentSequence, y: MomentSequence) -> MomentSequence {
    MomentSequence::with_rule(Rule::Product(Box::new(x), Box::new(y)))
}

/// Moments of the sum of `n` iid copies.
pub fn sum_moments(base: MomentSequence, n: u32) -> Result<MomentSequence> {
    if n == 0 {
        return Err(SteinError::Domain("sum needs n >= 1".into()));
    }
    Ok(MomentSequence::with_rule(Rule::Sum {
        base: Box::new(base),
        n,
    }))
}

/// Moments of `cX`.
pub fn scaled_moments(base: MomentSequence, c: Scalar) -> MomentSequence {
    MomentSequence::with_rule(Rule::Scaled {
        c,
        base: Box::new(base),
    })
}

/// Moments of `X + a`.
pub fn shifted_moments(base: MomentSequence, a: Scalar) -> MomentSequence {
    MomentSequence::with_rule(Rule::Shifted {
        a,
        base: Box::new(base),
    })
}

/// Number of initial moments the characterization result asks for:
/// `max(j - i) - min(j - i) - 1` over the nonzero terms.
pub fn required_initial(op: &OperatorPoly) -> Result<usize> {
    let band = op.band_set()?;
    let lo = *band.first().expect("nonempty");
    let hi = *band.last().expect("nonempty");
    Ok((hi - lo - 1).max(0) as usize)
}

/// Solves `sum a_ij C(k, j) E Z^(k - j + i) = 0` by forward substitution.
///
/// `initial` holds `E Z^0 = 1, E Z^1, ...`; it must contain at least
/// [`required_initial`] entries, and any surplus is checked against the
/// recurrence.
pub fn moment_recurrence_solve(op: &OperatorPoly, initial: &[Scalar]) -> Result<MomentSequence> {
    let rec = Recurrence::new(op)?;
    let needed = required_initial(op)?.max(1);
    if initial.len() < needed {
        return Err(SteinError::InsufficientMoments {
            needed,
            got: initial.len(),
        });
    }
    if initial[0] != Scalar::one() {
        return Err(SteinError::Domain("E Z^0 must be 1".into()));
    }
    // equations whose top index is already supplied must hold exactly
    let k_end = initial.len() as i64 + rec.s_min;
    for k in 0..k_end.max(0) as usize {
        let (lead, rest) = rec.equation(k, initial);
        debug_assert!(lead.is_zero());
        if !rest.is_zero() {
            return Err(SteinError::InconsistentMoments { k });
        }
    }
    Ok(MomentSequence {
        known: initial.to_vec(),
        rule: Rule::Recurrence(rec),
    })
}

/// Exact moments for any law this crate can describe.
pub fn for_spec(spec: &DistributionSpec) -> Result<MomentSequence> {
    use DistributionSpec::*;
    spec.validate()?;
    match spec {
        Normal { mean, variance } => normal_moments(mean, variance),
        ShiftedGamma { shape, shift } => shifted_gamma_moments(shape, shift),
        VarianceGamma {
            r,
            theta,
            sigma,
            mu,
        } => {
            let centered = vg_moments(r, theta, sigma)?;
            Ok(if mu.is_zero() {
                centered
            } else {
                shifted_moments(centered, mu.clone())
            })
        }
        ProductIndep { left, right } => Ok(product_moments(for_spec(left)?, for_spec(right)?)),
        SumIid { n, base } => sum_moments(for_spec(base)?, *n),
        Scaled { c, base } => Ok(scaled_moments(for_spec(base)?, c.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::steinops::{equal_means_operator, product_normals};

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| int(x)).collect()
    }

    /// Brute-force `E (sum_t X_t)^k` over iid summands by multinomial expansion.
    fn brute_sum_moment(base: &[Scalar], n: usize, k: usize) -> Scalar {
        fn rec(base: &[Scalar], k: usize, acc_coeff: Scalar, slots: usize) -> Scalar {
            if slots == 1 {
                return acc_coeff * &base[k];
            }
            let mut s = Scalar::zero();
            for j in 0..=k {
                let c = Scalar::from_integer(binomial(k, j));
                s += rec(base, k - j, acc_coeff.clone() * c * &base[j], slots - 1);
            }
            s
        }
        rec(base, k, Scalar::one(), n)
    }

    #[test]
    fn normal_examples() {
        let mut n01 = normal_moments(&int(0), &int(1)).unwrap();
        assert_eq!(n01.prefix(7).unwrap(), &ints(&[1, 0, 1, 0, 3, 0, 15])[..]);
        let mut n11 = normal_moments(&int(1), &int(1)).unwrap();
        assert_eq!(n11.prefix(7).unwrap(), &ints(&[1, 1, 2, 4, 10, 26, 76])[..]);
        let mut n21 = normal_moments(&int(2), &int(1)).unwrap();
        assert_eq!(
            n21.prefix(7).unwrap(),
            &ints(&[1, 2, 5, 14, 43, 142, 499])[..]
        );
        assert!(normal_moments(&int(0), &int(0)).is_err());
    }

    #[test]
    fn gamma_and_vg_examples() {
        let r = ratio(5, 2);
        let mut g = shifted_gamma_moments(&r, &int(0)).unwrap();
        assert_eq!(g.moment(1).unwrap(), r);
        assert_eq!(g.moment(2).unwrap(), &r * (&r + int(1)));
        let mut g1 = shifted_gamma_moments(&int(1), &int(1)).unwrap();
        // E(G+1)^2 = 2 + 2 + 1
        assert_eq!(g1.moment(2).unwrap(), int(5));

        let mut vg = vg_moments(&int(3), &int(0), &int(1)).unwrap();
        assert_eq!(vg.moment(2).unwrap(), int(3));
        // VG(2,0,1,0) = X1 Y1 + X2 Y2 with standard normals
        let mut vg2 = vg_moments(&int(2), &int(0), &int(1)).unwrap();
        let n01 = normal_moments(&int(0), &int(1)).unwrap();
        let mut prod = product_moments(n01.clone(), n01);
        let base = prod.prefix(9).unwrap().to_vec();
        for k in 0..9 {
            assert_eq!(
                vg2.moment(k).unwrap(),
                brute_sum_moment(&base, 2, k),
                "k={k}"
            );
        }
        assert_eq!(vg2.moment(4).unwrap(), int(24));
        // mean r theta, second moment sigma^2 r + r (r + 2) theta^2
        let mut vgt = vg_moments(&int(3), &ratio(1, 2), &int(2)).unwrap();
        assert_eq!(vgt.moment(1).unwrap(), ratio(3, 2));
        assert_eq!(vgt.moment(2).unwrap(), int(12) + ratio(15, 4));
    }

    #[test]
    fn product_examples() {
        let n11 = normal_moments(&int(1), &int(1)).unwrap();
        let mut sq = product_moments(n11.clone(), n11.clone());
        assert_eq!(
            sq.prefix(7).unwrap(),
            &ints(&[1, 1, 4, 16, 100, 676, 5776])[..]
        );
        let mut same = product_moments(n11.clone(), MomentSequence::point_mass(int(1)));
        let mut plain = n11.clone();
        assert_eq!(same.prefix(10).unwrap(), plain.prefix(10).unwrap());
        let n21 = normal_moments(&int(2), &int(1)).unwrap();
        let mut mixed = product_moments(n11, n21);
        assert_eq!(mixed.prefix(4).unwrap(), &ints(&[1, 2, 10, 56])[..]);
    }

    #[test]
    fn sum_examples() {
        let n01 = normal_moments(&int(0), &int(1)).unwrap();
        let mut one = sum_moments(n01.clone(), 1).unwrap();
        let mut plain = n01.clone();
        assert_eq!(one.prefix(8).unwrap(), plain.prefix(8).unwrap());
        let mut two = sum_moments(n01, 2).unwrap();
        assert_eq!(two.moment(2).unwrap(), int(2));
        assert_eq!(two.moment(4).unwrap(), int(12));

        let n11 = normal_moments(&int(1), &int(1)).unwrap();
        let prod = product_moments(n11.clone(), n11);
        let mut three = sum_moments(prod.clone(), 3).unwrap();
        assert_eq!(three.moment(1).unwrap(), int(3));
        assert_eq!(three.moment(2).unwrap(), int(18));
        let mut p = prod;
        let base = p.prefix(8).unwrap().to_vec();
        for k in 0..8 {
            assert_eq!(three.moment(k).unwrap(), brute_sum_moment(&base, 3, k));
        }
    }

    #[test]
    fn recurrence_examples() {
        let dm = &OperatorPoly::d() - &OperatorPoly::m();
        let mut s = moment_recurrence_solve(&dm, &[int(1)]).unwrap();
        assert_eq!(s.prefix(7).unwrap(), &ints(&[1, 0, 1, 0, 3, 0, 15])[..]);

        let e = equal_means_operator(&int(1));
        assert_eq!(required_initial(&e).unwrap(), 2);
        let mut s = moment_recurrence_solve(&e, &ints(&[1, 1, 4])).unwrap();
        assert_eq!(s.prefix(7).unwrap()[3..], ints(&[16, 100, 676, 5776])[..]);

        let u = product_normals(&int(1), &int(2), &int(1), &int(1)).unwrap();
        assert_eq!(required_initial(&u).unwrap(), 3);
        let mut s = moment_recurrence_solve(&u, &ints(&[1, 2, 10, 56])).unwrap();
        let mut oracle = product_moments(
            normal_moments(&int(1), &int(1)).unwrap(),
            normal_moments(&int(2), &int(1)).unwrap(),
        );
        assert_eq!(s.prefix(25).unwrap(), oracle.prefix(25).unwrap());
    }

    #[test]
    fn recurrence_errors() {
        let u = product_normals(&int(1), &int(2), &int(1), &int(1)).unwrap();
        assert_eq!(
            moment_recurrence_solve(&u, &ints(&[1, 2])).unwrap_err(),
            SteinError::InsufficientMoments { needed: 3, got: 2 }
        );
        assert_eq!(
            moment_recurrence_solve(&u, &ints(&[1, 2, 11, 56])).unwrap_err(),
            SteinError::InconsistentMoments { k: 1 }
        );
        // E[D x] = 1 already contradicts E Z^0 = 1
        assert_eq!(
            moment_recurrence_solve(&OperatorPoly::d(), &[int(1)]).unwrap_err(),
            SteinError::InconsistentMoments { k: 1 }
        );
        // M^2 D - 2M + D: (k - 2) m_(k+1) + k m_(k-1) = 0 stalls at k = 2
        let a = OperatorPoly::from_terms([(2, 1, int(1)), (1, 0, int(-2)), (0, 1, int(1))]);
        let mut s = moment_recurrence_solve(&a, &[int(1)]).unwrap();
        assert_eq!(s.prefix(3).unwrap(), &ints(&[1, 0, 1])[..]);
        assert_eq!(
            s.moment(3).unwrap_err(),
            SteinError::VanishingLeading { k: 2 }
        );
        let mut fixed = MomentSequence::from_values(ints(&[1, 2])).unwrap();
        assert!(matches!(
            fixed.moment(2),
            Err(SteinError::MomentUnavailable { .. })
        ));
    }

    #[test]
    fn scaling_commutes() {
        let c = ratio(-3, 2);
        let n = normal_moments(&int(1), &int(2)).unwrap();
        let g = shifted_gamma_moments(&int(2), &int(-1)).unwrap();
        let mut lhs = scaled_moments(product_moments(n.clone(), g.clone()), c.clone());
        let mut rhs = product_moments(scaled_moments(n.clone(), c.clone()), g);
        assert_eq!(lhs.prefix(12).unwrap(), rhs.prefix(12).unwrap());
        let mut ls = scaled_moments(sum_moments(n.clone(), 3).unwrap(), c.clone());
        let mut rs = sum_moments(scaled_moments(n, c), 3).unwrap();
        assert_eq!(ls.prefix(10).unwrap(), rs.prefix(10).unwrap());
    }
}
