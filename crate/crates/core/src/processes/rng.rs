//! Seeded noise generators.
//!
//! Every trial owns a `ChaCha8Rng` seeded with `seed ^ trial`, so trials can
//! run in any order (or in parallel) and still reproduce bit-for-bit.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        NoiseSource { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Independent substream for one Monte Carlo trial.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::new(seed ^ trial)
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard normal draw by the Marsaglia polar method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }

    pub fn normal_vector(&mut self, d: usize) -> DVector<f64> {
        DVector::from_iterator(d, (0..d).map(|_| self.normal()))
    }

    /// ±1 with equal probability.
    pub fn rademacher(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform point on the sphere of the given radius (a normalized Gaussian draw).
    pub fn uniform_sphere(&mut self, d: usize, radius: f64) -> DVector<f64> {
        loop {
            let g = self.normal_vector(d);
            let n = g.norm();
            if n > 0.0 {
                return g * (radius / n);
            }
        }
    }
}
