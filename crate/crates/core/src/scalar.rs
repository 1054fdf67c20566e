//! Exact rational scalars: parsing, formatting and small arithmetic helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, SteinError};

/// Coefficient field for every exact computation in the crate.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    assert!(q != 0, "zero denominator");
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Falling factorial `k (k-1) ... (k-j+1)`; zero when `j > k`.
pub fn falling(k: usize, j: usize) -> BigInt {
    if j > k {
        return BigInt::zero();
    }
    (0..j).fold(BigInt::one(), |acc, t| acc * BigInt::from(k - t))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    acc
}

/// Integer power with negative exponents allowed (`c` must be nonzero then).
pub fn pow(c: &Scalar, e: i64) -> Scalar {
    if e >= 0 {
        num_traits::pow(c.clone(), e as usize)
    } else {
        num_traits::pow(c.recip(), (-e) as usize)
    }
}

/// Formats as `p` or `p/q`.
pub fn fmt(c: &Scalar) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Parses `p`, `p/q`, or a finite decimal such as `-1.25` exactly.
pub fn parse(s: &str) -> Result<Scalar> {
    let t = s.trim();
    let bad = || SteinError::Parse(format!("not an exact rational: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(SteinError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Scalar::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let w: BigInt = if whole_abs.is_empty() {
            BigInt::zero()
        } else {
            whole_abs.parse().map_err(|_| bad())?
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Scalar::new(w * &den + f, den);
        return Ok(if neg { -mag } else { mag });
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Scalar::from_integer(p))
}

pub fn to_f64(c: &Scalar) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // very large numerators/denominators: divide via logs of magnitudes
        let n = c.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = c.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Largest rational `g` such that every entry is an integer multiple of `g`.
pub fn content<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for v in values {
        if v.is_zero() {
            continue;
        }
        num = num.gcd(v.numer());
        den = den.lcm(v.denom());
    }
    if num.is_zero() {
        Scalar::one()
    } else {
        Scalar::new(num.abs(), den)
    }
}

pub(crate) mod serde_str {
    //! `"p/q"` string encoding for serde.
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&super::fmt(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Scalar, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse(&raw).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_vec {
    //! List of `"p/q"` strings.
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Scalar], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(super::fmt))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Scalar>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|r| super::parse(r).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse("-7").unwrap(), int(-7));
        assert_eq!(parse("1.25").unwrap(), ratio(5, 4));
        assert_eq!(parse("-0.5").unwrap(), ratio(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1.").is_err());
    }

    #[test]
    fn format_roundtrip() {
        for c in [ratio(-3, 4), int(0), int(12), ratio(7, 9)] {
            assert_eq!(parse(&fmt(&c)).unwrap(), c);
        }
        assert_eq!(fmt(&int(1)), "1");
    }

    #[test]
    fn combinatorics() {
        assert_eq!(falling(5, 2), BigInt::from(20));
        assert_eq!(falling(1, 2), BigInt::zero());
        assert_eq!(falling(3, 0), BigInt::one());
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(pow(&ratio(2, 3), -2), ratio(9, 4));
    }

    #[test]
    fn content_of_mixed() {
        let v = [ratio(2, 3), int(4), ratio(-8, 9)];
        assert_eq!(content(v.iter()), ratio(2, 9));
    }
}
