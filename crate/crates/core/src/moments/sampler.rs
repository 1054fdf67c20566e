//! Seeded samplers for every [`DistributionSpec`].
//!
//! Draws are split into fixed-size chunks and chunk `c` uses ChaCha8 stream
//! `c` of the seed, so parallel and sequential runs give the same vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Result, SteinError};
use crate::exec::Exec;
use crate::scalar::to_f64;
use crate::steinops::DistributionSpec;

const CHUNK: usize = 1 << 14;

#[derive(Clone, Debug)]
enum Draw {
    Normal {
        mean: f64,
        sd: f64,
    },
    Gamma {
        gamma: Gamma<f64>,
        shift: f64,
    },
    /// `mu + theta V + sigma sqrt(V) N`, `V ~ Gamma(r/2, scale 2)`.
    Vg {
        gamma: Gamma<f64>,
        theta: f64,
        sigma: f64,
        mu: f64,
    },
    Product(Box<Draw>, Box<Draw>),
    Sum(u32, Box<Draw>),
    Scaled(f64, Box<Draw>),
}

fn gamma(shape: f64, scale: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, scale).map_err(|e| SteinError::Domain(format!("gamma: {e}")))
}

impl Draw {
    fn compile(spec: &DistributionSpec) -> Result<Self> {
        use DistributionSpec::*;
        Ok(match spec {
            Normal { mean, variance } => Draw::Normal {
                mean: to_f64(mean),
                sd: to_f64(variance).sqrt(),
            },
            ShiftedGamma { shape, shift } => Draw::Gamma {
                gamma: gamma(to_f64(shape), 1.0)?,
                shift: to_f64(shift),
            },
            VarianceGamma {
                r,
                theta,
                sigma,
                mu,
            } => Draw::Vg {
                gamma: gamma(to_f64(r) / 2.0, 2.0)?,
                theta: to_f64(theta),
                sigma: to_f64(sigma),
                mu: to_f64(mu),
            },
            ProductIndep { left, right } => Draw::Product(
                Box::new(Self::compile(left)?),
                Box::new(Self::compile(right)?),
            ),
            SumIid { n, base } => Draw::Sum(*n, Box::new(Self::compile(base)?)),
            Scaled { c, base } => Draw::Scaled(to_f64(c), Box::new(Self::compile(base)?)),
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Draw::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Draw::Gamma { gamma, shift } => gamma.sample(rng) + shift,
            Draw::Vg {
                gamma,
                theta,
                sigma,
                mu,
            } => {
                let v = gamma.sample(rng);
                let z: f64 = StandardNormal.sample(rng);
                mu + theta * v + sigma * v.sqrt() * z
            }
            Draw::Product(a, b) => a.draw(rng) * b.draw(rng),
            Draw::Sum(n, base) => (0..*n).map(|_| base.draw(rng)).sum(),
            Draw::Scaled(c, base) => c * base.draw(rng),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sampler {
    draw: Draw,
    seed: u64,
}

impl Sampler {
    pub fn new(spec: &DistributionSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        Ok(Sampler {
            draw: Draw::compile(spec)?,
            seed,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&self, n: usize) -> Vec<f64> {
        self.sample_with(n, Exec::default())
    }

    pub fn sample_with(&self, n: usize, exec: Exec) -> Vec<f64> {
        let chunks = n.div_ceil(CHUNK);
        exec.map_range(chunks, |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len)
                .map(|_| self.draw.draw(&mut rng))
                .collect::<Vec<_>>()
        })
        .concat()
    }
}
