//! Characteristic function ODE from a linear-coefficient Stein operator, and
//! the closed form for a product of two unit-variance normals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss::{GPoly, GaussianRational};
use crate::error::{Result, SteinError};
use crate::steinops::LinearSteinForm;

/// `p(t) phi'(t) + q(t) phi(t) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharFnODE {
    pub p: GPoly,
    pub q: GPoly,
}

impl CharFnODE {
    pub fn new(p: GPoly, q: GPoly) -> Result<Self> {
        if p.is_zero() {
            return Err(SteinError::Domain("ODE has no phi' term".into()));
        }
        Ok(CharFnODE { p, q })
    }

    /// Scaled so the top coefficient of `p` is 1.
    pub fn monic(&self) -> Self {
        let k = self.p.degree().expect("p is nonzero");
        let unit = self
            .p
            .coeff(k)
            .recip()
            .expect("nonzero leading coefficient");
        CharFnODE {
            p: self.p.scale(&unit),
            q: self.q.scale(&unit),
        }
    }

    /// `c` with `self = c * other`, if any.
    pub fn proportional(&self, other: &CharFnODE) -> Option<GaussianRational> {
        let k = other.p.degree()?;
        let c = &self.p.coeff(k) * &other.p.coeff(k).recip()?;
        (self.p == other.p.scale(&c) && self.q == other.q.scale(&c)).then_some(c)
    }

    pub fn residual(&self, t: f64, phi: Complex64, dphi: Complex64) -> Complex64 {
        let t = Complex64::new(t, 0.0);
        self.p.eval(t) * dphi + self.q.eval(t) * phi
    }

    pub fn to_text(&self) -> String {
        format!(
            "({}) phi'(t) + ({}) phi(t) = 0",
            self.p.to_text("t"),
            self.q.to_text("t")
        )
    }

    pub fn to_latex(&self) -> String {
        format!(
            "({})\\phi'(t)+({})\\phi(t)=0",
            self.p.to_latex("t"),
            self.q.to_latex("t")
        )
    }
}

/// Substitutes `f(x) = e^{itx}`: `f^(k) -> (it)^k phi` and
/// `x f^(k) -> (it)^k (-i) phi'`.
pub fn charfn_ode(l: &LinearSteinForm) -> Result<CharFnODE> {
    let i = GaussianRational::i();
    let minus_i = -&i;
    let order = l.order();
    let mut p = vec![GaussianRational::zero(); order + 1];
    let mut q = vec![GaussianRational::zero(); order + 1];
    for (k, (a, b)) in l.coeffs().iter().enumerate() {
        let ik = i.pow(k);
        p[k] = &(&ik * &minus_i) * &GaussianRational::real(a.clone());
        q[k] = &ik * &GaussianRational::real(b.clone());
    }
    CharFnODE::new(GPoly::new(p), GPoly::new(q))
}

/// `(1+t^2)^{-1/2} exp(-t((mu_x^2 + mu_y^2) t - 2 i mu_x mu_y) / (2(1+t^2)))`
/// at complex `t`, principal square root.
pub fn charfn_closed_complex(t: Complex64, mu_x: f64, mu_y: f64) -> Complex64 {
    let a = mu_x * mu_x + mu_y * mu_y;
    let b = mu_x * mu_y;
    let one = Complex64::new(1.0, 0.0);
    let w = one + t * t;
    let expo = -t * (t * a - Complex64::new(0.0, 2.0 * b)) / (w * 2.0);
    expo.exp() / w.sqrt()
}

/// `E e^{itZ}` for `Z = XY`, `X ~ N(mu_x, 1)`, `Y ~ N(mu_y, 1)` independent.
pub fn charfn_closed(t: f64, mu_x: f64, mu_y: f64) -> Complex64 {
    charfn_closed_complex(Complex64::new(t, 0.0), mu_x, mu_y)
}

/// Derivative of [`charfn_closed`] in `t`.
pub fn charfn_closed_derivative(t: f64, mu_x: f64, mu_y: f64) -> Complex64 {
    let a = mu_x * mu_x + mu_y * mu_y;
    let b = mu_x * mu_y;
    let w = 1.0 + t * t;
    // log phi = -log(w)/2 - (a t^2 - 2 i b t) / (2 w)
    let num = Complex64::new(a * t * t, -2.0 * b * t);
    let dnum = Complex64::new(2.0 * a * t, -2.0 * b);
    let dlog = -t / w - (dnum * w - num * (2.0 * t)) / (2.0 * w * w);
    charfn_closed(t, mu_x, mu_y) * dlog
}

/// `E e^{sZ}`, the closed form at `t = -is`; finite only for `|s| < 1`.
///
/// Written out in reals, `(1-s^2)^{-1/2} exp(((mu_x^2+mu_y^2) s^2 + 2 mu_x mu_y s) / (2(1-s^2)))`,
/// which grows without bound (to `+inf`) as `|s| -> 1`.
pub fn mgf(s: f64, mu_x: f64, mu_y: f64) -> Result<f64> {
    if s.is_nan() || s.abs() >= 1.0 {
        return Err(SteinError::Domain(format!("mgf needs |s| < 1, got {s}")));
    }
    let w = 1.0 - s * s;
    let expo = ((mu_x * mu_x + mu_y * mu_y) * s * s + 2.0 * mu_x * mu_y * s) / (2.0 * w);
    Ok(expo.exp() / w.sqrt())
}

/// Evaluates the closed form on a grid: `(t, phi(t))`.
pub fn charfn_grid(ts: &[f64], mu_x: f64, mu_y: f64) -> Vec<(f64, Complex64)> {
    ts.iter()
        .map(|&t| (t, charfn_closed(t, mu_x, mu_y)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opweyl::OperatorPoly;
    use crate::scalar::int;
    use crate::steinops::{product_normals, to_linear_form};

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::new(int(re), int(im))
    }

    #[test]
    fn normal_ode() {
        let a = &OperatorPoly::d() - &OperatorPoly::m();
        let ode = charfn_ode(&to_linear_form(&a).unwrap()).unwrap();
        let expect = CharFnODE::new(
            GPoly::new(vec![g(1, 0)]),
            GPoly::new(vec![g(0, 0), g(1, 0)]),
        )
        .unwrap();
        assert_eq!(ode.proportional(&expect), Some(g(0, 1)));
    }

    #[test]
    fn product_ode_and_closed_form() {
        for (mx, my) in [(0, 0), (1, 2), (-1, 3)] {
            let u = product_normals(&int(mx), &int(my), &int(1), &int(1)).unwrap();
            let ode = charfn_ode(&to_linear_form(&u).unwrap()).unwrap();
            let (a, b) = (mx * mx + my * my, mx * my);
            // (t^4 + 2t^2 + 1) phi' + (t^3 + i b t^2 + (1 + a) t - i b) phi = 0
            let want = CharFnODE::new(
                GPoly::new(vec![g(1, 0), g(0, 0), g(2, 0), g(0, 0), g(1, 0)]),
                GPoly::new(vec![g(0, -b), g(1 + a, 0), g(0, b), g(1, 0)]),
            )
            .unwrap();
            assert!(ode.proportional(&want).is_some(), "{}", ode.to_text());
            assert_eq!(ode.monic(), want);
            for k in 0..=40 {
                let t = -5.0 + 0.25 * k as f64;
                let (fx, fy) = (mx as f64, my as f64);
                let phi = charfn_closed(t, fx, fy);
                let h = 1e-3;
                let fd = (charfn_closed(t - 2.0 * h, fx, fy) - charfn_closed(t + 2.0 * h, fx, fy)
                    + (charfn_closed(t + h, fx, fy) - charfn_closed(t - h, fx, fy)) * 8.0)
                    / (12.0 * h);
                let d = charfn_closed_derivative(t, fx, fy);
                assert!((fd - d).norm() < 1e-9, "derivative at {t}");
                assert!(ode.residual(t, phi, d).norm() < 1e-10);
                // |phi|^2 = exp(-t^2 a / (1+t^2)) / (1+t^2)
                let w = 1.0 + t * t;
                let m2 = (-(t * t) * a as f64 / w).exp() / w;
                assert!((phi.norm_sqr() - m2).abs() < 1e-14);
            }
            assert_eq!(
                charfn_closed(0.0, mx as f64, my as f64),
                Complex64::new(1.0, 0.0)
            );
        }
        assert!((charfn_closed(1.0, 0.0, 0.0).re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mgf_values() {
        assert_eq!(mgf(0.0, 1.0, 2.0).unwrap(), 1.0);
        assert!((mgf(0.5, 0.0, 0.0).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        let (mx, my, s) = (1.0f64, 2.0f64, 0.3f64);
        let direct = ((mx * mx + my * my) * s * s + 2.0 * mx * my * s) / (2.0 * (1.0 - s * s));
        let want = direct.exp() / (1.0 - s * s).sqrt();
        assert!((mgf(s, mx, my).unwrap() - want).abs() < 1e-12 * want);
        // the complex closed form at t = -is agrees where both are finite
        let via_complex = charfn_closed_complex(Complex64::new(0.0, -s), mx, my);
        assert!((via_complex.re - want).abs() < 1e-12 * want && via_complex.im.abs() < 1e-12);
        assert!(mgf(0.99, 0.0, 0.0).unwrap() > 7.0);
        assert!(mgf(0.999999, 1.0, 1.0).unwrap() > 1e5);
        assert!(mgf(1.0, 0.0, 0.0).is_err());
        assert!(mgf(f64::NAN, 0.0, 0.0).is_err());
    }
}
