use crate::error::Result;
use crate::quantum::DensityMatrix;
use crate::registry::Registry;

use super::{linear_inversion, mle_cost, mle_reconstruct, MleConfig, ProbabilitySet, SigmaSet};

/// Output of any reconstruction strategy.
#[derive(Debug, Clone, Copy)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A method turning measured probabilities into a density matrix.
pub trait Reconstructor: Send + Sync {
    fn name(&self) -> &'static str;
    fn reconstruct(&self, probs: &ProbabilitySet, sigmas: &SigmaSet) -> Result<Reconstruction>;
}

pub struct LinearInversion;

impl Reconstructor for LinearInversion {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn reconstruct(&self, probs: &ProbabilitySet, sigmas: &SigmaSet) -> Result<Reconstruction> {
        let rho = linear_inversion(probs)?;
        Ok(Reconstruction {
            cost: mle_cost(&rho, probs, sigmas),
            rho,
            iterations: 0,
            converged: true,
        })
    }
}

pub struct MaximumLikelihood(pub MleConfig);

impl Reconstructor for MaximumLikelihood {
    fn name(&self) -> &'static str {
        "mle"
    }

    fn reconstruct(&self, probs: &ProbabilitySet, sigmas: &SigmaSet) -> Result<Reconstruction> {
        let r = mle_reconstruct(probs, sigmas, &self.0)?;
        Ok(Reconstruction {
            rho: r.rho,
            cost: r.cost,
            iterations: r.iterations,
            converged: r.converged,
        })
    }
}

/// All built-in reconstruction methods; `"mle"` uses `config`.
pub fn reconstructors(config: MleConfig) -> Registry<dyn Reconstructor> {
    let mut reg: Registry<dyn Reconstructor> = Registry::new("reconstruction method");
    reg.register("linear", Box::new(LinearInversion));
    reg.register("mle", Box::new(MaximumLikelihood(config)));
    reg
}
