//! Stein operators for the base families and for products and sums of them.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SteinError};
use crate::opweyl::{OperatorPoly, UPoly};
use crate::scalar::{self, int, Scalar};

/// A target law with exact parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSpec {
    /// `N(mean, variance)`.
    Normal {
        #[serde(with = "scalar::serde_str")]
        mean: Scalar,
        #[serde(with = "scalar::serde_str")]
        variance: Scalar,
    },
    /// `Gamma(shape, 1) + shift`.
    ShiftedGamma {
        #[serde(with = "scalar::serde_str")]
        shape: Scalar,
        #[serde(with = "scalar::serde_str")]
        shift: Scalar,
    },
    /// `VG(r, theta, sigma, mu)`.
    VarianceGamma {
        #[serde(with = "scalar::serde_str")]
        r: Scalar,
        #[serde(with = "scalar::serde_str")]
        theta: Scalar,
        #[serde(with = "scalar::serde_str")]
        sigma: Scalar,
        #[serde(with = "scalar::serde_str")]
        mu: Scalar,
    },
    ProductIndep {
        left: Box<DistributionSpec>,
        right: Box<DistributionSpec>,
    },
    SumIid {
        n: u32,
        base: Box<DistributionSpec>,
    },
    Scaled {
        #[serde(with = "scalar::serde_str")]
        c: Scalar,
        base: Box<DistributionSpec>,
    },
}

impl DistributionSpec {
    pub fn normal(mean: Scalar, variance: Scalar) -> Self {
        DistributionSpec::Normal { mean, variance }
    }

    pub fn shifted_gamma(shape: Scalar, shift: Scalar) -> Self {
        DistributionSpec::ShiftedGamma { shape, shift }
    }

    pub fn variance_gamma(r: Scalar, theta: Scalar, sigma: Scalar, mu: Scalar) -> Self {
        DistributionSpec::VarianceGamma {
            r,
            theta,
            sigma,
            mu,
        }
    }

    pub fn product(left: DistributionSpec, right: DistributionSpec) -> Self {
        DistributionSpec::ProductIndep {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn sum_iid(n: u32, base: DistributionSpec) -> Self {
        DistributionSpec::SumIid {
            n,
            base: Box::new(base),
        }
    }

    pub fn scaled(c: Scalar, base: DistributionSpec) -> Self {
        DistributionSpec::Scaled {
            c,
            base: Box::new(base),
        }
    }

    /// `N(mu_x, 1) x N(mu_y, 1)`.
    pub fn product_normal(mu_x: Scalar, mu_y: Scalar) -> Self {
        Self::product(Self::normal(mu_x, int(1)), Self::normal(mu_y, int(1)))
    }

    /// Checks the parameter domains recursively.
    pub fn validate(&self) -> Result<()> {
        use DistributionSpec::*;
        let positive = |v: &Scalar, what: &str| {
            if v.is_positive() {
                Ok(())
            } else {
                Err(SteinError::Domain(format!(
                    "{what} must be > 0, got {}",
                    scalar::fmt(v)
                )))
            }
        };
        match self {
            Normal { variance, .. } => positive(variance, "variance"),
            ShiftedGamma { shape, .. } => positive(shape, "gamma shape"),
            VarianceGamma { r, sigma, .. } => {
                positive(r, "VG r")?;
                positive(sigma, "VG sigma")
            }
            ProductIndep { left, right } => {
                left.validate()?;
                right.validate()
            }
            SumIid { n, base } => {
                if *n == 0 {
                    return Err(SteinError::Domain("sum needs n >= 1".into()));
                }
                base.validate()
            }
            Scaled { c, base } => {
                if c.is_zero() {
                    return Err(SteinError::ZeroScale);
                }
                base.validate()
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistributionSpec::*;
        let s = scalar::fmt;
        match self {
            Normal { mean, variance } => write!(f, "N({}, {})", s(mean), s(variance)),
            ShiftedGamma { shape, shift } => write!(f, "Gamma({}, 1) + {}", s(shape), s(shift)),
            VarianceGamma {
                r,
                theta,
                sigma,
                mu,
            } => {
                write!(f, "VG({}, {}, {}, {})", s(r), s(theta), s(sigma), s(mu))
            }
            ProductIndep { left, right } => write!(f, "({left}) x ({right})"),
            SumIid { n, base } => write!(f, "sum of {n} iid ({base})"),
            Scaled { c, base } => write!(f, "{} * ({base})", s(c)),
        }
    }
}

/// Shift parameter of `T_a = MD + aI`, allowing the limit `a = infinity`
/// where `a^-1 T_a -> I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShiftParam {
    Finite(Scalar),
    Infinite,
}

impl ShiftParam {
    /// `T_(a+k)`, or `I` when `a` is infinite.
    pub fn t(&self, k: i64) -> OperatorPoly {
        match self {
            ShiftParam::Finite(a) => t_op(&(a + int(k))),
            ShiftParam::Infinite => OperatorPoly::identity(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(ShiftParam::Infinite),
            other => scalar::parse(other).map(ShiftParam::Finite),
        }
    }
}

impl From<Scalar> for ShiftParam {
    fn from(a: Scalar) -> Self {
        ShiftParam::Finite(a)
    }
}

/// `T_r = MD + rI`.
pub fn t_op(r: &Scalar) -> OperatorPoly {
    OperatorPoly::from_upoly(&UPoly::t(r.clone()))
}

/// Operator `sum_k (a_k x + b_k) f^(k)(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSteinForm {
    coeffs: Vec<(Scalar, Scalar)>,
}

impl LinearSteinForm {
    pub fn new(mut coeffs: Vec<(Scalar, Scalar)>) -> Result<Self> {
        while coeffs
            .last()
            .is_some_and(|(a, b)| a.is_zero() && b.is_zero())
        {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(SteinError::Domain(
                "linear Stein form needs order m >= 1".into(),
            ));
        }
        Ok(LinearSteinForm { coeffs })
    }

    /// `(a_k, b_k)` for `k = 0..=m`.
    pub fn coeffs(&self) -> &[(Scalar, Scalar)] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_operator(&self) -> OperatorPoly {
        OperatorPoly::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .flat_map(|(k, (a, b))| [(1, k, a.clone()), (0, k, b.clone())]),
        )
    }
}

pub fn to_linear_form(a: &OperatorPoly) -> Result<LinearSteinForm> {
    let deg = a.degree().ok_or(SteinError::ZeroOperator)?;
    if deg > 1 {
        return Err(SteinError::NotLinear(deg));
    }
    let order = a.order().unwrap_or(0);
    LinearSteinForm::new(
        (0..=order)
            .map(|k| (a.coeff(1, k), a.coeff(0, k)))
            .collect(),
    )
}

/// Stein operator for the sum of `n` iid copies: `b_k -> n b_k`.
pub fn sum_transform(l: &LinearSteinForm, n: u32) -> Result<OperatorPoly> {
    if n == 0 {
        return Err(SteinError::Domain("sum needs n >= 1".into()));
    }
    let n = int(n as i64);
    let scaled = l.coeffs.iter().map(|(a, b)| (a.clone(), b * &n)).collect();
    Ok(LinearSteinForm::new(scaled)?.to_operator())
}

/// Stein operator for one of the base families (or a rescaling of one).
pub fn base_operator(spec: &DistributionSpec) -> Result<OperatorPoly> {
    use DistributionSpec::*;
    spec.validate()?;
    let (m, d, id) = (
        OperatorPoly::m(),
        OperatorPoly::d(),
        OperatorPoly::identity(),
    );
    match spec {
        // sigma^2 D - M + mu I
        Normal { mean, variance } => Ok(&(&d.scale(variance) - &m) + &id.scale(mean)),
        // T_(r+mu) - mu D - M
        ShiftedGamma { shape, shift } => Ok(&(&t_op(&(shape + shift)) - &d.scale(shift)) - &m),
        // sigma^2 (M - mu) D^2 + (r sigma^2 + 2 theta (M - mu)) D + (r theta - (M - mu)) I;
        // at mu = 0 this is sigma^2 T_r D + 2 theta T_(r/2) - M
        VarianceGamma {
            r,
            theta,
            sigma,
            mu,
        } => {
            let centered = &m - &id.scale(mu);
            let s2 = sigma * sigma;
            let d2 = &d * &d;
            let two_theta = theta * int(2);
            let first = &centered.scale(&s2) * &d2;
            let second = &(&id.scale(&(r * &s2)) + &centered.scale(&two_theta)) * &d;
            let third = &id.scale(&(r * theta)) - &centered;
            Ok(&(&first + &second) + &third)
        }
        Scaled { c, base } => base_operator(base)?.rescale(c),
        ProductIndep { .. } | SumIid { .. } => Err(SteinError::Unsupported(format!(
            "{spec} is not a base family; use stein_operator"
        ))),
    }
}

/// Stein operator for `XY`, `X, Y` iid with operator `M - Q(MD) - P(MD) D`:
/// `R1(MD) D^2 + R2(MD) D + R3(MD) + M R4(MD)`.
pub fn product_iid(p: &UPoly, q: &UPoly) -> Result<OperatorPoly> {
    if p.is_zero() && q.is_zero() {
        return Err(SteinError::Domain("P and Q both zero".into()));
    }
    let u = UPoly::u();
    let p2 = p * p;
    let q2 = q * q;
    let u1 = u.shift_int(1);
    let r1 = &(&(&p2 * &p.shift_int(1)) * &u1) * &q.shift_int(2);
    let r2 = &(-&(&(&p2 * q) * &u1)) - &(&(&q.shift_int(1) * p) * &q2);
    let r3 = &(-&(&(&u * q) * &p.shift_int(-1))) - &(&q.shift_int(-1) * &q2);
    let r4 = q.shift_int(-1);

    let d = OperatorPoly::d();
    let op = |r: &UPoly| OperatorPoly::from_upoly(r);
    let a = &(&op(&r1) * &(&d * &d)) + &(&op(&r2) * &d);
    Ok(&(&a + &op(&r3)) + &(&OperatorPoly::m() * &op(&r4)))
}

/// Stein operator for `XY`, `X, Y` iid with operator `M - alpha T_a - beta T_b D`:
/// `(M - a^2 T_a^2 - b^2 T_b^2 T_1 D)(T_(a-1) - b T_b T_(a+1) D) - 2 a^2 b T_a^2 T_b T_(a+1) D`
/// (with `a = alpha`, `b = beta` in the scalar slots). Infinite shifts turn
/// every `T_(a+k)` into `I`.
pub fn product_iid_linear(
    alpha: &Scalar,
    beta: &Scalar,
    a: &ShiftParam,
    b: &ShiftParam,
) -> Result<OperatorPoly> {
    if alpha.is_zero() && beta.is_zero() {
        return Err(SteinError::Domain("alpha and beta both zero".into()));
    }
    let m = OperatorPoly::m();
    let d = OperatorPoly::d();
    let ta = a.t(0);
    let ta2 = &ta * &ta;
    let tb = b.t(0);
    let t1 = t_op(&Scalar::one());
    let alpha2 = alpha * alpha;
    let beta2 = beta * beta;

    let left = &(&m - &ta2.scale(&alpha2)) - &(&(&(&tb * &tb) * &t1) * &d).scale(&beta2);
    let right = &a.t(-1) - &(&(&tb * &a.t(1)) * &d).scale(beta);
    let tail = &(&(&ta2 * &tb) * &a.t(1)) * &d;
    Ok(&(&left * &right) - &tail.scale(&(int(2) * alpha2 * beta)))
}

/// Product of two iid `Gamma(r, 1) + mu` variates.
pub fn gamma_product(r: &Scalar, mu: &Scalar) -> Result<OperatorPoly> {
    product_iid_linear(
        &int(1),
        &-mu.clone(),
        &ShiftParam::Finite(r + mu),
        &ShiftParam::Infinite,
    )
}

/// Product of two iid `VG(r, theta, sigma, 0)` variates.
pub fn vg_product(r: &Scalar, theta: &Scalar, sigma: &Scalar) -> Result<OperatorPoly> {
    product_iid_linear(
        &(theta * int(2)),
        &(sigma * sigma),
        &ShiftParam::Finite(r / int(2)),
        &ShiftParam::Finite(r.clone()),
    )
}

/// Fourth-order operator for `N(mu_x, var_x) x N(mu_y, var_y)`:
/// `vx^2 vy^2 (M D^4 + D^3) - vx vy (2M + mu_x mu_y) D^2
///  - (vx vy + mu_x^2 vy + mu_y^2 vx) D + M - mu_x mu_y`.
/// With unit variances this is `MD^4 + D^3 - (2M + mu_x mu_y)D^2 - (1 + mu_x^2 + mu_y^2)D + M - mu_x mu_y`.
pub fn product_normals(
    mu_x: &Scalar,
    mu_y: &Scalar,
    var_x: &Scalar,
    var_y: &Scalar,
) -> Result<OperatorPoly> {
    if !var_x.is_positive() || !var_y.is_positive() {
        return Err(SteinError::Domain("variances must be > 0".into()));
    }
    let v = var_x * var_y;
    let v2 = &v * &v;
    let c = mu_x * mu_y;
    Ok(OperatorPoly::from_terms([
        (1, 4, v2.clone()),
        (0, 3, v2),
        (1, 2, -(&v * int(2))),
        (0, 2, -(&v * &c)),
        (0, 1, -(&v + mu_x * mu_x * var_y + mu_y * mu_y * var_x)),
        (1, 0, int(1)),
        (0, 0, -c),
    ]))
}

/// Second-order operator for `N(0, var_x) x N(0, var_y)`, written in terms of
/// `s = var_x var_y`: `s (M D^2 + D) - M`.
pub fn centered_normal_product(product_variance: &Scalar) -> Result<OperatorPoly> {
    if !product_variance.is_positive() {
        return Err(SteinError::Domain("variance must be > 0".into()));
    }
    let s = product_variance;
    Ok(OperatorPoly::from_terms([
        (1, 2, s.clone()),
        (0, 1, s.clone()),
        (1, 0, int(-1)),
    ]))
}

/// Third-order operator for `N(mu, v) x N(mu, v)`, with `s = v` the product
/// of standard deviations:
/// `s^3 M D^3 + s^2 (s - M) D^2 - s (M + s + mu^2) D + M - mu^2`.
pub fn iid_normal_product(mu: &Scalar, variance: &Scalar) -> Result<OperatorPoly> {
    if !variance.is_positive() {
        return Err(SteinError::Domain("variance must be > 0".into()));
    }
    let s = variance;
    let s2 = s * s;
    let s3 = &s2 * s;
    let mu2 = mu * mu;
    Ok(OperatorPoly::from_terms([
        (1, 3, s3.clone()),
        (0, 2, s3),
        (1, 2, -s2),
        (1, 1, -s.clone()),
        (0, 1, -(s * (s + &mu2))),
        (1, 0, int(1)),
        (0, 0, -mu2),
    ]))
}

/// Lowest-order operator this crate knows for the law described by `spec`.
pub fn stein_operator(spec: &DistributionSpec) -> Result<OperatorPoly> {
    use DistributionSpec::*;
    spec.validate()?;
    match spec {
        Normal { .. } | ShiftedGamma { .. } | VarianceGamma { .. } => base_operator(spec),
        Scaled { c, base } => stein_operator(base)?.rescale(c),
        SumIid { n, base } => sum_transform(&to_linear_form(&stein_operator(base)?)?, *n),
        ProductIndep { left, right } => product_operator(left, right),
    }
}

fn product_operator(left: &DistributionSpec, right: &DistributionSpec) -> Result<OperatorPoly> {
    use DistributionSpec::*;
    match (left, right) {
        (Scaled { c, base }, other) | (other, Scaled { c, base }) => {
            product_operator(base, other)?.rescale(c)
        }
        (
            Normal {
                mean: mx,
                variance: vx,
            },
            Normal {
                mean: my,
                variance: vy,
            },
        ) => {
            if mx.is_zero() && my.is_zero() {
                centered_normal_product(&(vx * vy))
            } else if mx == my && vx == vy {
                iid_normal_product(mx, vx)
            } else {
                product_normals(mx, my, vx, vy)
            }
        }
        (ShiftedGamma { .. }, ShiftedGamma { .. }) if left == right => {
            let ShiftedGamma { shape, shift } = left else {
                unreachable!()
            };
            gamma_product(shape, shift)
        }
        (
            VarianceGamma {
                r,
                theta,
                sigma,
                mu,
            },
            VarianceGamma { .. },
        ) if left == right => {
            if !mu.is_zero() {
                return Err(SteinError::Unsupported(
                    "VG with mu != 0 has a band set of size 4; no product operator".into(),
                ));
            }
            vg_product(r, theta, sigma)
        }
        _ => Err(SteinError::Unsupported(format!(
            "no product construction for ({left}) x ({right})"
        ))),
    }
}

/// How a reduction relates `A`, `L` and `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// `A L = B`: `B` is `A` acting on test functions `L f`.
    Compose,
    /// `A = B L`: `A f = B g` with `g = L f`.
    Factor,
}

pub fn reduction_check(
    a: &OperatorPoly,
    l: &OperatorPoly,
    b: &OperatorPoly,
    kind: Reduction,
) -> bool {
    match kind {
        Reduction::Compose => &(a * l) == b,
        Reduction::Factor => a == &(b * l),
    }
}

/// `MD^3 + (I - M)D^2 - (M + (1 + mu^2)I)D + M - mu^2 I`: the product of two
/// iid `N(mu, 1)` variates.
pub fn equal_means_operator(mu: &Scalar) -> OperatorPoly {
    iid_normal_product(mu, &int(1)).expect("unit variance")
}
