//! Long-range exclusion by thinning.
//!
//! Each particle proposes jumps at the constant rate `Lambda = sum_d p(d)`;
//! the displacement is drawn from an alias table and the proposal is
//! rejected when the target is occupied.  The accepted jumps have exactly the
//! rates `p(d) 1{target empty}`.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::dynamics::RateModel;
use crate::error::{Error, Result};
use crate::lattice::{Configuration, Lattice};

#[derive(Debug, Clone)]
pub(crate) struct LongJumpKernel {
    n: usize,
    lambda: f64,
    alias: WeightedAliasIndex<f64>,
    particles: Vec<u32>,
}

impl LongJumpKernel {
    pub fn new(model: &RateModel, config: &Configuration, lattice: &Lattice) -> Result<Self> {
        let n = lattice.n();
        let kernel = model.long_jump_kernel(n)?;
        let lambda = kernel.iter().sum();
        let alias = WeightedAliasIndex::new(kernel)
            .map_err(|e| Error::InvalidParameter(format!("long-jump kernel: {e}")))?;
        let mut particles = Vec::new();
        for (x, &o) in config.sites().iter().enumerate() {
            if o == 1 {
                particles.push(x as u32);
            }
        }
        Ok(Self { n, lambda, alias, particles })
    }

    pub fn total_rate(&self) -> f64 {
        self.lambda * self.particles.len() as f64
    }

    /// One proposal; returns whether a jump happened.
    pub fn fire<R: Rng>(&mut self, s: &mut [u8], rng: &mut R) -> bool {
        let i = rng.random_range(0..self.particles.len());
        let x = self.particles[i] as usize;
        let d = self.alias.sample(rng);
        let y = (x + d) % self.n;
        if s[y] == 1 {
            return false;
        }
        s[x] = 0;
        s[y] = 1;
        self.particles[i] = y as u32;
        true
    }
}
