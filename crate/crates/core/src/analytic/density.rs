//! Density of `Z = XY`, `X ~ N(mu_x, 1)`, `Y ~ N(mu_y, 1)` independent: a
//! double Bessel series and a direct convolution integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::bessel_k_upto;
use crate::error::{Result, SteinError};
use crate::exec::Exec;

pub const DEFAULT_TERMS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Size of the last `n`-block summed.
    pub last_block: f64,
    /// Geometric tail estimate from the ratio of the last two blocks
    /// (infinite if they are not decreasing).
    pub tail_estimate: f64,
}

/// Partial sum over `n < n_terms` of
/// `e^{-(mu_x^2+mu_y^2)/2}/pi sum_m x^{2n-m}|x|^{m-n} C(2n,m)/(2n)! mu_x^m mu_y^{2n-m} K_{|m-n|}(|x|)`.
pub fn pdf_series_detail(x: f64, mu_x: f64, mu_y: f64, n_terms: usize) -> Result<SeriesValue> {
    if x == 0.0 || !x.is_finite() {
        return Err(SteinError::Domain("series needs x != 0".into()));
    }
    if n_terms == 0 {
        return Err(SteinError::Domain("need at least one term".into()));
    }
    let ax = x.abs();
    // scaled[v] = |x|^v K_v(|x|): s_(v+1) = x^2 s_(v-1) + 2v s_v, no overflow near 0
    let k01 = bessel_k_upto(1, ax)?;
    let mut scaled = vec![k01[0], ax * k01[1]];
    for v in 1..n_terms {
        let next = ax * ax * scaled[v - 1] + 2.0 * v as f64 * scaled[v];
        scaled.push(next);
    }
    // x^{2n-m}|x|^{m-n} K_{|m-n|} = sign(x)^m |x|^{n-|m-n|} scaled[|m-n|]
    let sx = mu_x * x.signum();
    let inv_fact: Vec<f64> = (0..=2 * n_terms)
        .scan(1.0, |f, i| {
            if i > 0 {
                *f /= i as f64;
            }
            Some(*f)
        })
        .collect();
    let mut blocks = Vec::with_capacity(n_terms);
    for n in 0..n_terms {
        let mut b = 0.0;
        for m in 0..=2 * n {
            let l = 2 * n - m;
            let d = m.abs_diff(n);
            let bessel = ax.powi((n - d) as i32) * scaled[d];
            b += sx.powi(m as i32) * inv_fact[m] * mu_y.powi(l as i32) * inv_fact[l] * bessel;
        }
        blocks.push(b);
    }
    let pre = (-(mu_x * mu_x + mu_y * mu_y) / 2.0).exp() / PI;
    let value = pre * blocks.iter().sum::<f64>();
    let last = pre * blocks[n_terms - 1].abs();
    let tail_estimate = if last == 0.0 {
        0.0
    } else if n_terms >= 2 {
        let rho = blocks[n_terms - 1].abs() / blocks[n_terms - 2].abs();
        if rho < 1.0 {
            last * rho / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue {
        value,
        last_block: last,
        tail_estimate,
    })
}

pub fn pdf_series(x: f64, mu_x: f64, mu_y: f64, n_terms: usize) -> Result<f64> {
    Ok(pdf_series_detail(x, mu_x, mu_y, n_terms)?.value)
}

/// Probabilists' Hermite polynomial `He_k(y)`.
pub fn hermite_he(k: usize, y: f64) -> f64 {
    let (mut a, mut b) = (1.0, y);
    if k == 0 {
        return a;
    }
    for n in 1..k {
        let c = y * b - n as f64 * a;
        a = b;
        b = c;
    }
    b
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `d^k/dx^k p_Z(x)` from `p_Z(x) = int phi(u - mu_x) phi(x/u - mu_y) du/|u|`.
///
/// Each half-line `u = +-e^v` is integrated in `v` by the trapezoid rule with
/// step halving; the integrand decays doubly exponentially at both ends.
/// `x = 0` is rejected: the density is infinite there.
pub fn pdf_conv(x: f64, mu_x: f64, mu_y: f64, k: usize) -> Result<f64> {
    if k > 4 {
        return Err(SteinError::Domain(format!("derivative order {k} > 4")));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(SteinError::Domain("density is unbounded at x = 0".into()));
    }
    let margin = 13.0;
    let lo = (x.abs() / (mu_y.abs() + margin)).ln();
    let hi = (mu_x.abs() + margin).ln();
    let sign_k = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let g = |v: f64| -> f64 {
        let e = v.exp();
        [e, -e]
            .iter()
            .map(|&u| {
                let y = x / u - mu_y;
                std_normal_pdf(u - mu_x)
                    * u.powi(-(k as i32))
                    * sign_k
                    * hermite_he(k, y)
                    * std_normal_pdf(y)
            })
            .sum()
    };
    let mut n = 256usize;
    let mut h = (hi - lo) / n as f64;
    let mut sum = 0.5 * (g(lo) + g(hi)) + (1..n).map(|i| g(lo + i as f64 * h)).sum::<f64>();
    let mut est = sum * h;
    for round in 0..12 {
        let mids: f64 = (0..n).map(|i| g(lo + (i as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h /= 2.0;
        let next = sum * h;
        let done = round >= 1 && (next - est).abs() <= 1e-13 + 1e-12 * next.abs();
        est = next;
        if done {
            break;
        }
    }
    Ok(est)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: f64,
    pub series: f64,
    pub conv: f64,
    pub abs_diff: f64,
}

/// Series and convolution side by side on a grid, evaluated pointwise in parallel.
pub fn density_table(
    xs: &[f64],
    mu_x: f64,
    mu_y: f64,
    n_terms: usize,
    exec: Exec,
) -> Result<Vec<DensityRow>> {
    exec.map(xs, |&x| {
        let series = pdf_series(x, mu_x, mu_y, n_terms)?;
        let conv = pdf_conv(x, mu_x, mu_y, 0)?;
        Ok(DensityRow {
            x,
            series,
            conv,
            abs_diff: (series - conv).abs(),
        })
    })
    .into_iter()
    .collect()
}
