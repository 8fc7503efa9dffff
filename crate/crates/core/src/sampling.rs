//! Reproducible random couplings and phase-space points for tests and self-checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::{Couplings, PhasePointR, PhasePointS};

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// `mu in [-1.5, -0.3]`, `nu in [0.3, 2]`, `kappa in [0, 1.5]`.
    pub fn couplings(&mut self) -> Couplings {
        let mu = self.uniform(-1.5, -0.3);
        let nu = self.uniform(0.3, 2.0);
        let kappa = self.uniform(0.0, 1.5);
        Couplings::new(mu, nu, kappa).expect("sampled couplings are valid")
    }

    /// Decreasing positive coordinates with the last one in `[lo, lo + span]` and
    /// consecutive gaps in `[gap_lo, gap_lo + span]`.
    pub fn chamber(&mut self, n: usize, lo: f64, gap_lo: f64, span: f64) -> Vec<f64> {
        let mut x = vec![0.0; n];
        x[n - 1] = self.uniform(lo, lo + span);
        for a in (0..n - 1).rev() {
            x[a] = x[a + 1] + self.uniform(gap_lo, gap_lo + span);
        }
        x
    }

    /// Sutherland point with `q_n in [0.3, 1.3]`, gaps in `[0.3, 1.3]`, `|p_a| <= 1.5`.
    pub fn point_s(&mut self, n: usize) -> PhasePointS {
        let q = self.chamber(n, 0.3, 0.3, 1.0);
        let p = (0..n).map(|_| self.uniform(-1.5, 1.5)).collect();
        PhasePointS::new(q, p).expect("sampled point is valid")
    }

    /// RSvD point with `lambda_n in [0.4, 1.4]`, gaps in `[0.4, 1.4]`, `|theta_a| <= 1`.
    pub fn point_r(&mut self, n: usize) -> PhasePointR {
        let lambda = self.chamber(n, 0.4, 0.4, 1.0);
        let theta = (0..n).map(|_| self.uniform(-1.0, 1.0)).collect();
        PhasePointR::new(lambda, theta).expect("sampled point is valid")
    }
}
