//! Does an operator annihilate a law? Exactly on monomials against moment
//! oracles, or statistically over a bank of smooth decaying test functions.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Exec;
use crate::moments::{normal_moments, product_moments, MomentSequence, Sampler};
use crate::opweyl::OperatorPoly;
use crate::scalar::{int, to_f64, Scalar};
use crate::steinops::product_normals;

pub const DEFAULT_THRESHOLD: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    pub max_k: usize,
    /// `E[A x^k]` for `k = 0..=max_k`.
    #[serde(with = "crate::scalar::serde_vec")]
    pub residuals: Vec<Scalar>,
    pub pass: bool,
}

impl ExactReport {
    pub fn first_nonzero(&self) -> Option<usize> {
        self.residuals.iter().position(|r| !r.is_zero())
    }
}

/// Number of moments needed to pair `A x^k` for every `k <= max_k`.
fn moments_needed(a: &OperatorPoly, max_k: usize) -> usize {
    let reach = a
        .terms()
        .map(|(i, j, _)| i as i64 - j as i64)
        .max()
        .unwrap_or(0);
    (max_k as i64 + reach).max(0) as usize + 1
}

pub fn exact_check(a: &OperatorPoly, m: &mut MomentSequence, max_k: usize) -> Result<ExactReport> {
    let mu = m.prefix(moments_needed(a, max_k))?;
    let residuals: Vec<Scalar> = (0..=max_k)
        .map(|k| a.apply_to_monomial(k).pair(mu))
        .collect();
    let pass = residuals.iter().all(Zero::is_zero);
    Ok(ExactReport {
        max_k,
        residuals,
        pass,
    })
}

/// The operator for `XY`, `X ~ N(mu_x, 1)`, `Y ~ N(mu_y, 1)`, checked against
/// the true product moments and against a list that agrees up to `E Z^3` but
/// has `E Z^4` raised by one.
pub fn characterization_demo(
    mu_x: &Scalar,
    mu_y: &Scalar,
    max_k: usize,
) -> Result<(ExactReport, ExactReport)> {
    let a = product_normals(mu_x, mu_y, &int(1), &int(1))?;
    let mut truth = product_moments(
        normal_moments(mu_x, &int(1))?,
        normal_moments(mu_y, &int(1))?,
    );
    let good = exact_check(&a, &mut truth, max_k)?;
    let mut values = truth.prefix(moments_needed(&a, max_k).max(5))?.to_vec();
    values[4] += int(1);
    let bad = exact_check(&a, &mut MomentSequence::from_values(values)?, max_k)?;
    Ok((good, bad))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `x^k exp(-x^2/2)`
    GaussPoly { k: u32 },
    /// `sin(omega x)`
    Sin { omega: f64 },
    /// `cos(omega x)`
    Cos { omega: f64 },
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::GaussPoly { k: 0 } => "exp(-x^2/2)".into(),
            TestFunction::GaussPoly { k: 1 } => "x exp(-x^2/2)".into(),
            TestFunction::GaussPoly { k } => format!("x^{k} exp(-x^2/2)"),
            TestFunction::Sin { omega } => format!("sin({omega} x)"),
            TestFunction::Cos { omega } => format!("cos({omega} x)"),
        }
    }

    fn prepare(&self, order: usize) -> Prepared {
        match self {
            TestFunction::GaussPoly { k } => {
                // f^(n) = p_n(x) e^{-x^2/2}, p_(n+1) = p_n' - x p_n
                let mut p = vec![0.0; *k as usize + 1];
                p[*k as usize] = 1.0;
                let mut polys = vec![p];
                for _ in 0..order {
                    let prev = polys.last().expect("nonempty");
                    let mut next = vec![0.0; prev.len() + 1];
                    for (e, c) in prev.iter().enumerate() {
                        if e > 0 {
                            next[e - 1] += e as f64 * c;
                        }
                        next[e + 1] -= c;
                    }
                    polys.push(next);
                }
                Prepared::Gauss(polys)
            }
            TestFunction::Sin { omega } => Prepared::Trig {
                omega: *omega,
                phase: 0,
            },
            TestFunction::Cos { omega } => Prepared::Trig {
                omega: *omega,
                phase: 1,
            },
        }
    }
}

pub fn default_bank() -> Vec<TestFunction> {
    let mut bank: Vec<TestFunction> = (0..=6).map(|k| TestFunction::GaussPoly { k }).collect();
    for omega in [0.5, 1.0] {
        bank.push(TestFunction::Sin { omega });
        bank.push(TestFunction::Cos { omega });
    }
    bank
}

enum Prepared {
    Gauss(Vec<Vec<f64>>),
    /// derivative `n` of `sin` is `sin` shifted by `(n + phase)` quarter turns
    Trig {
        omega: f64,
        phase: usize,
    },
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

impl Prepared {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        match self {
            Prepared::Gauss(polys) => {
                let g = (-0.5 * x * x).exp();
                for (o, p) in out.iter_mut().zip(polys) {
                    *o = if g == 0.0 { 0.0 } else { horner(p, x) * g };
                }
            }
            Prepared::Trig { omega, phase } => {
                let (s, c) = (omega * x).sin_cos();
                let cycle = [s, c, -s, -c];
                let mut w = 1.0;
                for (n, o) in out.iter_mut().enumerate() {
                    *o = w * cycle[(n + phase) % 4];
                    w *= omega;
                }
            }
        }
    }
}

/// `A` as `sum_j q_j(x) D^j` with float coefficients.
struct FloatOperator {
    by_order: Vec<Vec<f64>>,
}

impl FloatOperator {
    fn new(a: &OperatorPoly) -> Self {
        let order = a.order().unwrap_or(0);
        let mut by_order = vec![Vec::new(); order + 1];
        for (i, j, c) in a.terms() {
            let q = &mut by_order[j];
            if q.len() <= i {
                q.resize(i + 1, 0.0);
            }
            q[i] = to_f64(c);
        }
        FloatOperator { by_order }
    }

    fn apply(&self, x: f64, derivs: &[f64]) -> f64 {
        self.by_order
            .iter()
            .zip(derivs)
            .map(|(q, d)| if q.is_empty() { 0.0 } else { horner(q, x) * d })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEntry {
    pub function: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub n: usize,
    pub seed: u64,
    pub threshold: f64,
    pub entries: Vec<MCEntry>,
    pub pass: bool,
}

impl MCReport {
    pub fn max_abs_z(&self) -> f64 {
        self.entries.iter().map(|e| e.z.abs()).fold(0.0, f64::max)
    }
}

const CHUNK: usize = 1 << 15;

/// Count, mean and centered sum of squares of one chunk.
#[derive(Clone, Copy)]
struct Moments2 {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments2 {
    fn of(xs: impl Iterator<Item = f64>) -> Self {
        let mut acc = Moments2 {
            n: 0.0,
            mean: 0.0,
            m2: 0.0,
        };
        for x in xs {
            acc.n += 1.0;
            let d = x - acc.mean;
            acc.mean += d / acc.n;
            acc.m2 += d * (x - acc.mean);
        }
        acc
    }

    fn merge(self, o: Moments2) -> Self {
        let n = self.n + o.n;
        if n == 0.0 {
            return self;
        }
        let d = o.mean - self.mean;
        Moments2 {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

pub fn mc_check(a: &OperatorPoly, s: &Sampler, bank: &[TestFunction], n: usize) -> MCReport {
    mc_check_with(a, s, bank, n, DEFAULT_THRESHOLD, Exec::default())
}

pub fn mc_check_with(
    a: &OperatorPoly,
    s: &Sampler,
    bank: &[TestFunction],
    n: usize,
    threshold: f64,
    exec: Exec,
) -> MCReport {
    let samples = s.sample_with(n, exec);
    let mut report = mc_check_samples(a, &samples, bank, threshold, exec);
    report.seed = s.seed();
    report
}

/// Monte Carlo check on a fixed sample; `seed` in the report is 0.
pub fn mc_check_samples(
    a: &OperatorPoly,
    samples: &[f64],
    bank: &[TestFunction],
    threshold: f64,
    exec: Exec,
) -> MCReport {
    let op = FloatOperator::new(a);
    let order = op.by_order.len() - 1;
    let prepared: Vec<Prepared> = bank.iter().map(|f| f.prepare(order)).collect();
    let chunks = samples.len().div_ceil(CHUNK).max(1);
    let cells = exec.map_range(bank.len() * chunks, |cell| {
        let (f, c) = (cell / chunks, cell % chunks);
        let lo = (c * CHUNK).min(samples.len());
        let hi = (lo + CHUNK).min(samples.len());
        let mut d = vec![0.0; order + 1];
        Moments2::of(samples[lo..hi].iter().map(|&x| {
            prepared[f].derivs(x, &mut d);
            op.apply(x, &d)
        }))
    });
    let entries: Vec<MCEntry> = bank
        .iter()
        .enumerate()
        .map(|(f, tf)| {
            let acc = cells[f * chunks..(f + 1) * chunks]
                .iter()
                .copied()
                .reduce(Moments2::merge)
                .expect("at least one chunk");
            let var = if acc.n > 1.0 {
                acc.m2 / (acc.n - 1.0)
            } else {
                0.0
            };
            let std_error = (var / acc.n.max(1.0)).sqrt();
            let z = if std_error > 0.0 {
                acc.mean / std_error
            } else if acc.mean == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(acc.mean)
            };
            MCEntry {
                function: tf.name(),
                estimate: acc.mean,
                std_error,
                z,
            }
        })
        .collect();
    let pass = entries.iter().all(|e| e.z.abs() <= threshold);
    MCReport {
        n: samples.len(),
        seed: 0,
        threshold,
        entries,
        pass,
    }
}

/// Float value of an exact residual, for summaries.
pub fn residual_f64(r: &Scalar) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::for_spec;
    use crate::steinops::{equal_means_operator, DistributionSpec};

    fn d_minus_m() -> OperatorPoly {
        &OperatorPoly::d() - &OperatorPoly::m()
    }

    #[test]
    fn exact_examples() {
        let mut n01 = normal_moments(&int(0), &int(1)).unwrap();
        let r = exact_check(&d_minus_m(), &mut n01, 20).unwrap();
        assert!(r.pass);
        assert_eq!(r.residuals.len(), 21);

        let e = equal_means_operator(&int(1));
        let mut prod = for_spec(&DistributionSpec::product_normal(int(1), int(1))).unwrap();
        assert!(exact_check(&e, &mut prod, 30).unwrap().pass);

        let mut n11 = normal_moments(&int(1), &int(1)).unwrap();
        let r = exact_check(&d_minus_m(), &mut n11, 5).unwrap();
        assert!(!r.pass);
        assert_eq!(r.residuals[0], int(-1));
        assert_eq!(r.first_nonzero(), Some(0));
    }

    #[test]
    fn exact_is_linear() {
        let a = equal_means_operator(&int(2));
        let b = d_minus_m();
        let mut m = for_spec(&DistributionSpec::product_normal(int(1), int(-1))).unwrap();
        let ra = exact_check(&a, &mut m, 12).unwrap();
        let rb = exact_check(&b, &mut m, 12).unwrap();
        let rab = exact_check(&(&a + &b), &mut m, 12).unwrap();
        for k in 0..=12 {
            assert_eq!(rab.residuals[k], &ra.residuals[k] + &rb.residuals[k]);
        }
    }

    #[test]
    fn demo() {
        let (good, bad) = characterization_demo(&int(1), &int(2), 30).unwrap();
        assert!(good.pass);
        assert!(!bad.pass);
        let k = bad.first_nonzero().unwrap();
        assert!(k <= 4, "first nonzero residual at {k}");
        let (good0, bad0) = characterization_demo(&int(0), &int(0), 30).unwrap();
        assert!(good0.pass && !bad0.pass);
    }

    #[test]
    fn test_function_derivatives() {
        // finite differences against the prepared derivatives
        let h = 1e-4;
        for tf in default_bank() {
            let p = tf.prepare(4);
            for x in [-1.3, 0.2, 2.1] {
                let mut lo = [0.0; 5];
                let mut mid = [0.0; 5];
                let mut hi = [0.0; 5];
                p.derivs(x - h, &mut lo);
                p.derivs(x, &mut mid);
                p.derivs(x + h, &mut hi);
                for n in 0..4 {
                    let fd = (hi[n] - lo[n]) / (2.0 * h);
                    assert!(
                        (fd - mid[n + 1]).abs() < 1e-6 * (1.0 + fd.abs()),
                        "{} n={n} x={x} fd={fd} got={}",
                        tf.name(),
                        mid[n + 1]
                    );
                }
            }
        }
    }

    #[test]
    fn mc_normal() {
        let n01 = Sampler::new(&DistributionSpec::normal(int(0), int(1)), 3).unwrap();
        let r = mc_check(&d_minus_m(), &n01, &default_bank(), 200_000);
        assert!(r.pass, "{r:?}");
        assert!(r.entries.iter().all(|e| e.std_error > 0.0));
        let n11 = Sampler::new(&DistributionSpec::normal(int(1), int(1)), 3).unwrap();
        let r = mc_check(&d_minus_m(), &n11, &default_bank(), 200_000);
        assert!(!r.pass);
        assert!(r.max_abs_z() > 4.0);
    }

    #[test]
    fn mc_modes_agree() {
        let s = Sampler::new(&DistributionSpec::product_normal(int(1), int(1)), 5).unwrap();
        let a = equal_means_operator(&int(1));
        let seq = mc_check_with(&a, &s, &default_bank(), 70_000, 4.0, Exec::Sequential);
        let par = mc_check_with(&a, &s, &default_bank(), 70_000, 4.0, Exec::Parallel);
        assert_eq!(seq, par);
        assert!(seq.pass);
        assert_eq!(seq.seed, 5);
        let json = serde_json::to_string(&seq).unwrap();
        assert_eq!(serde_json::from_str::<MCReport>(&json).unwrap(), seq);
    }
}
