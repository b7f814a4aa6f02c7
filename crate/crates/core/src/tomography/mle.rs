//! Weighted least-squares maximum-likelihood reconstruction.
//!
//! States are parametrized as `ρ = T†T / Tr(T†T)` with `T` lower
//! triangular (real diagonal), which keeps every iterate Hermitian,
//! positive semidefinite and unit-trace. The cost
//! `L = Σ_ν (P_ν − ⟨ψ_ν|ρ|ψ_ν⟩)² / 2σ_ν²` is minimized by gradient descent
//! with a backtracking (Armijo) line search; the trial step is the
//! Barzilai–Borwein estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4, C64, ZERO};
use crate::quantum::{DensityMatrix, TwoQubitKet};

use super::{linear_inversion, ProbabilitySet, SigmaSet, CANONICAL_SETTINGS};

pub const NUM_PARAMS: usize = 16;

/// Strictly-lower entries of `T`, in parameter order. Each contributes a
/// (real, imaginary) pair after the four diagonal parameters.
const LOWER: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// Weight of the maximally mixed state blended into a rank-deficient
/// starting point so that its Cholesky factor exists.
const INIT_MIXING: f64 = 1e-6;

const ARMIJO_C: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Linear inversion with negative eigenvalues clipped, then renormalized.
    #[default]
    FromLinearInversion,
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_shrink_factor: f64,
    pub initial_state: InitialState,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            gradient_tolerance: 1e-10,
            step_shrink_factor: 0.5,
            initial_state: InitialState::FromLinearInversion,
        }
    }
}

impl MleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::invalid("gradient_tolerance must be positive"));
        }
        if !(self.step_shrink_factor > 0.0 && self.step_shrink_factor < 1.0) {
            return Err(Error::invalid("step_shrink_factor must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub cost: f64,
    /// Cost at the starting state actually used by the descent.
    pub initial_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn lower_factor(params: &[f64; NUM_PARAMS]) -> Mat4 {
    let mut t = linalg::zeros::<4>();
    for (k, row) in t.iter_mut().enumerate() {
        row[k] = C64::new(params[k], 0.0);
    }
    for (p, &(i, j)) in LOWER.iter().enumerate() {
        t[i][j] = C64::new(params[4 + 2 * p], params[5 + 2 * p]);
    }
    t
}

fn norm_sqr(params: &[f64; NUM_PARAMS]) -> f64 {
    params.iter().map(|x| x * x).sum()
}

/// `T†T / Tr(T†T)` built from sixteen real parameters.
pub fn parametrize(params: &[f64; NUM_PARAMS]) -> Result<DensityMatrix> {
    let n = norm_sqr(params);
    if !(n >= 1e-300) || !n.is_finite() {
        return Err(Error::DegenerateParameters { trace: n });
    }
    let t = lower_factor(params);
    let m = linalg::matmul(&linalg::adjoint(&t), &t);
    DensityMatrix::from_unnormalized(m)
}

/// Parameters (unit Euclidean norm) of a positive definite state. Singular
/// states are first mixed with a `1e-6` fraction of `I/4`.
pub fn params_from_state(rho: &DensityMatrix) -> Result<[f64; NUM_PARAMS]> {
    // With J the exchange matrix, JρJ = L L† gives T = J L† J lower
    // triangular and T†T = ρ.
    let flip = |m: &Mat4| {
        let mut out = linalg::zeros::<4>();
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = m[3 - i][3 - j];
            }
        }
        out
    };
    let flipped = flip(rho.matrix());
    let l = match linalg::cholesky(&flipped) {
        Some(l) => l,
        None => {
            let mut mixed = linalg::scale(&flipped, 1.0 - INIT_MIXING);
            for (i, row) in mixed.iter_mut().enumerate() {
                row[i] += C64::new(INIT_MIXING / 4.0, 0.0);
            }
            linalg::cholesky(&mixed)
                .ok_or_else(|| Error::invalid("starting state is not positive semidefinite"))?
        }
    };
    let t = flip(&linalg::adjoint(&l));
    let mut params = [0.0; NUM_PARAMS];
    for k in 0..4 {
        params[k] = t[k][k].re;
    }
    for (p, &(i, j)) in LOWER.iter().enumerate() {
        params[4 + 2 * p] = t[i][j].re;
        params[5 + 2 * p] = t[i][j].im;
    }
    let n = norm_sqr(&params).sqrt();
    Ok(params.map(|x| x / n))
}

pub fn mle_cost(rho: &DensityMatrix, probs: &ProbabilitySet, sigmas: &SigmaSet) -> f64 {
    let w = sigmas.weights();
    CANONICAL_SETTINGS
        .iter()
        .enumerate()
        .map(|(nu, s)| {
            let r = probs.values()[nu] - rho.expectation(&s.projector());
            0.5 * w[nu] * r * r
        })
        .sum()
}

struct Problem {
    kets: [TwoQubitKet; 16],
    targets: [f64; 16],
    weights: [f64; 16],
}

impl Problem {
    fn new(probs: &ProbabilitySet, sigmas: &SigmaSet) -> Self {
        Self {
            kets: CANONICAL_SETTINGS.map(|s| s.projector()),
            targets: *probs.values(),
            weights: sigmas.weights(),
        }
    }

    fn cost(&self, params: &[f64; NUM_PARAMS]) -> f64 {
        let n = norm_sqr(params);
        let t = lower_factor(params);
        let mut total = 0.0;
        for nu in 0..16 {
            let u = apply_lower(&t, &self.kets[nu]);
            let q: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            let r = self.targets[nu] - q / n;
            total += 0.5 * self.weights[nu] * r * r;
        }
        total
    }

    fn cost_and_gradient(&self, params: &[f64; NUM_PARAMS]) -> (f64, [f64; NUM_PARAMS]) {
        let n = norm_sqr(params);
        let t = lower_factor(params);
        let mut total = 0.0;
        let mut grad = [0.0; NUM_PARAMS];
        // Σ_ν (∂L/∂p_ν) q_ν, for the derivative of 1/n
        let mut through_norm = 0.0;

        for nu in 0..16 {
            let psi = &self.kets[nu].0;
            let u = apply_lower(&t, &self.kets[nu]);
            let q: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            let r = self.targets[nu] - q / n;
            total += 0.5 * self.weights[nu] * r * r;

            let dl_dp = -self.weights[nu] * r;
            through_norm += dl_dp * q;
            let f = 2.0 * dl_dp / n;
            for k in 0..4 {
                grad[k] += f * (u[k].conj() * psi[k]).re;
            }
            for (p, &(i, j)) in LOWER.iter().enumerate() {
                let z = u[i].conj() * psi[j];
                grad[4 + 2 * p] += f * z.re;
                grad[5 + 2 * p] -= f * z.im;
            }
        }
        let g = 2.0 * through_norm / (n * n);
        for (gk, xk) in grad.iter_mut().zip(params.iter()) {
            *gk -= g * xk;
        }
        (total, grad)
    }
}

fn apply_lower(t: &Mat4, ket: &TwoQubitKet) -> [C64; 4] {
    let psi = &ket.0;
    let mut u = [ZERO; 4];
    for i in 0..4 {
        let mut s = ZERO;
        for j in 0..=i {
            s += t[i][j] * psi[j];
        }
        u[i] = s;
    }
    u
}

/// Cost and analytic gradient with respect to the sixteen parameters.
pub fn mle_cost_and_gradient(
    params: &[f64; NUM_PARAMS],
    probs: &ProbabilitySet,
    sigmas: &SigmaSet,
) -> Result<(f64, [f64; NUM_PARAMS])> {
    let n = norm_sqr(params);
    if !(n >= 1e-300) || !n.is_finite() {
        return Err(Error::DegenerateParameters { trace: n });
    }
    Ok(Problem::new(probs, sigmas).cost_and_gradient(params))
}

fn inf_norm(v: &[f64; NUM_PARAMS]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64; NUM_PARAMS], b: &[f64; NUM_PARAMS]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn starting_state(probs: &ProbabilitySet, policy: InitialState) -> DensityMatrix {
    match policy {
        InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(),
        InitialState::FromLinearInversion => linear_inversion(probs)
            .and_then(|rho| rho.nearest_psd())
            .unwrap_or_else(|_| DensityMatrix::maximally_mixed()),
    }
}

/// Physical state minimizing [`mle_cost`].
///
/// Deterministic for fixed inputs. `converged` is set when the gradient's
/// infinity norm falls below `config.gradient_tolerance`; otherwise the
/// best iterate reached is returned.
pub fn mle_reconstruct(
    probs: &ProbabilitySet,
    sigmas: &SigmaSet,
    config: &MleConfig,
) -> Result<MleResult> {
    config.validate()?;
    let problem = Problem::new(probs, sigmas);
    let start = starting_state(probs, config.initial_state);
    let mut x = params_from_state(&start)?;
    let (mut f, mut g) = problem.cost_and_gradient(&x);
    let initial_cost = f;

    let mut step = 1.0 / inf_norm(&g).max(1.0);
    let mut prev: Option<([f64; NUM_PARAMS], [f64; NUM_PARAMS])> = None;
    let mut iterations = 0;
    let mut converged = inf_norm(&g) < config.gradient_tolerance;

    while !converged && iterations < config.max_iterations {
        if let Some((px, pg)) = prev {
            let s: [f64; NUM_PARAMS] = std::array::from_fn(|k| x[k] - px[k]);
            let y: [f64; NUM_PARAMS] = std::array::from_fn(|k| g[k] - pg[k]);
            let sy = dot(&s, &y);
            if sy > 0.0 {
                step = dot(&s, &s) / sy;
            } else {
                step *= 2.0;
            }
        }
        let g2 = dot(&g, &g);
        let mut accepted = None;
        while step > 1e-300 {
            let mut trial: [f64; NUM_PARAMS] = std::array::from_fn(|k| x[k] - step * g[k]);
            let n = norm_sqr(&trial).sqrt();
            if n > 0.0 && n.is_finite() {
                // ρ is invariant under rescaling T; keep |x| = 1.
                trial = trial.map(|v| v / n);
                let ft = problem.cost(&trial);
                if ft <= f - ARMIJO_C * step * g2 {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            step *= config.step_shrink_factor;
        }
        iterations += 1;
        let Some((nx, _)) = accepted else {
            break;
        };
        prev = Some((x, g));
        x = nx;
        let (nf, ng) = problem.cost_and_gradient(&x);
        f = nf;
        g = ng;
        converged = inf_norm(&g) < config.gradient_tolerance;
    }

    Ok(MleResult {
        rho: parametrize(&x)?,
        cost: f,
        initial_cost,
        iterations,
        converged,
    })
}
