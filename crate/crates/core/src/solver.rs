//! Search for maximally entangled states by minimizing
//! `F(ψ) = Σ_ℓ Σ_j ⟨ψ|g_j^(ℓ)|ψ⟩²` over the unit sphere.
//!
//! Amplitudes are treated as `2·total_dim` real coordinates. Each iteration
//! takes a projected gradient step, renormalizes, and backtracks until the
//! Armijo condition holds, so accepted iterates never increase `F`. The first
//! trial step of each iteration is the Barzilai-Borwein step.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::generators::{apply_local, GeneratorSet};
use crate::measurement::validate_sets;
use crate::random::random_state;
use crate::tensor::{CompositeSpace, StateVector};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop a restart once the Riemannian gradient norm drops below this.
    pub grad_tol: f64,
    /// A result counts as converged when `best_objective ≤ objective_tol`.
    pub objective_tol: f64,
    pub seed: u64,
    /// Backtracking step multiplier.
    pub shrink: f64,
    /// Armijo sufficient-decrease factor.
    pub slope: f64,
    pub initial_step: f64,
    /// Run restarts on the rayon pool.
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 20_000,
            grad_tol: 1e-12,
            objective_tol: 1e-16,
            seed: 0,
            shrink: 0.5,
            slope: 1e-4,
            initial_step: 1.0,
            parallel: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if !(self.grad_tol > 0.0 && self.objective_tol > 0.0 && self.initial_step > 0.0) {
            return bad("tolerances and initial step must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0 && self.slope > 0.0 && self.slope < 1.0) {
            return bad("shrink and slope must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub seed: u64,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub best_state: StateVector,
    pub best_objective: f64,
    pub best_restart: usize,
    pub converged: bool,
    pub per_restart: Vec<RestartOutcome>,
    /// Final state of every restart, in restart order.
    pub states: Vec<StateVector>,
}

/// `(F, gψ for every generator, ⟨g⟩ for every generator)`.
fn evaluate(
    space: &CompositeSpace,
    sets: &[GeneratorSet],
    psi: &DVector<C64>,
) -> (f64, Vec<(f64, DVector<C64>)>) {
    let mut terms = Vec::new();
    let mut f = 0.0;
    for (ell, set) in sets.iter().enumerate() {
        for g in set.matrices() {
            let g_psi = apply_local(g, ell, space, psi).expect("sets validated");
            let mean = psi.dotc(&g_psi).re;
            f += mean * mean;
            terms.push((mean, g_psi));
        }
    }
    (f, terms)
}

fn objective_raw(space: &CompositeSpace, sets: &[GeneratorSet], psi: &DVector<C64>) -> f64 {
    evaluate(space, sets, psi).0
}

/// Projected gradient `P(4 Σ ⟨g⟩ gψ)` with `P v = v − Re⟨ψ|v⟩ ψ`.
fn gradient_raw(space: &CompositeSpace, sets: &[GeneratorSet], psi: &DVector<C64>) -> (f64, DVector<C64>) {
    let (f, terms) = evaluate(space, sets, psi);
    let mut ambient = DVector::zeros(psi.len());
    for (mean, g_psi) in &terms {
        ambient.axpy(C64::new(4.0 * mean, 0.0), g_psi, C64::new(1.0, 0.0));
    }
    let radial = psi.dotc(&ambient).re;
    ambient.axpy(C64::new(-radial, 0.0), psi, C64::new(1.0, 0.0));
    (f, ambient)
}

pub fn objective(state: &StateVector, sets: &[GeneratorSet]) -> Result<f64> {
    validate_sets(state, sets)?;
    Ok(objective_raw(state.space(), sets, state.amplitudes()))
}

/// Riemannian gradient of [`objective`] on the unit sphere, as a complex vector
/// whose real and imaginary parts are the gradient components along the real
/// and imaginary parts of the amplitudes.
pub fn gradient(state: &StateVector, sets: &[GeneratorSet]) -> Result<DVector<C64>> {
    validate_sets(state, sets)?;
    Ok(gradient_raw(state.space(), sets, state.amplitudes()).1)
}

/// One descent run from a fixed starting point.
#[derive(Clone, Debug)]
pub struct Descent {
    pub state: StateVector,
    pub objective: f64,
    pub iterations: usize,
    /// Objective of every accepted iterate, starting with the initial state.
    pub history: Vec<f64>,
}

pub fn descend(initial: &StateVector, sets: &[GeneratorSet], options: &SolveOptions) -> Result<Descent> {
    options.validate()?;
    validate_sets(initial, sets)?;
    let space = initial.space();
    let mut psi = initial.amplitudes().clone();
    let (mut f, mut grad) = gradient_raw(space, sets, &psi);
    let mut history = vec![f];
    let mut step = options.initial_step;
    let mut iterations = 0;
    while iterations < options.max_iters && f > 0.0 {
        let gnorm2 = grad.norm_squared();
        if gnorm2.sqrt() <= options.grad_tol {
            break;
        }
        let mut t = step;
        let accepted = loop {
            let mut trial = &psi - grad.scale(t);
            let n = trial.norm();
            trial.unscale_mut(n);
            let ft = objective_raw(space, sets, &trial);
            if ft <= f - options.slope * t * gnorm2 {
                break Some((trial, t));
            }
            t *= options.shrink;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((next, t)) = accepted else { break };
        let (fn_, gn) = gradient_raw(space, sets, &next);
        // Barzilai-Borwein trial step; doubling the last accepted step instead
        // can lock onto `t ≈ 2/λ`, which Armijo accepts but barely decreases F.
        let s = &next - &psi;
        let y = &gn - &grad;
        let sy = s.dotc(&y).re;
        step = if sy > 0.0 {
            (s.norm_squared() / sy).clamp(1e-10, 1e3)
        } else {
            (t / options.shrink).min(1e3)
        };
        psi = next;
        f = fn_;
        grad = gn;
        history.push(f);
        iterations += 1;
    }
    Ok(Descent {
        state: StateVector::from_vector(space.clone(), psi)?,
        objective: f,
        iterations,
        history,
    })
}

/// Seed for restart `index`, derived by a SplitMix64 step so that nearby base
/// seeds do not share restarts.
pub fn restart_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multi-start descent from complex-Gaussian initial states. The best restart
/// is the lowest objective, ties going to the lowest index.
pub fn find_max_entangled(dims: &[usize], sets: &[GeneratorSet], options: &SolveOptions) -> Result<SolveResult> {
    options.validate()?;
    let space = CompositeSpace::new(dims.to_vec())?;
    let run = |i: usize| -> Result<(u64, Descent)> {
        let seed = restart_seed(options.seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = random_state(&space, &mut rng);
        Ok((seed, descend(&start, sets, options)?))
    };
    let runs: Vec<(u64, Descent)> = if options.parallel {
        (0..options.restarts).into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        (0..options.restarts).map(run).collect::<Result<_>>()?
    };
    let mut best_restart = 0;
    for (i, (_, d)) in runs.iter().enumerate() {
        if d.objective < runs[best_restart].1.objective {
            best_restart = i;
        }
    }
    let best_objective = runs[best_restart].1.objective;
    let per_restart = runs
        .iter()
        .map(|(seed, d)| RestartOutcome {
            seed: *seed,
            objective: d.objective,
            iterations: d.iterations,
        })
        .collect();
    let states: Vec<StateVector> = runs.into_iter().map(|(_, d)| d.state).collect();
    Ok(SolveResult {
        best_state: states[best_restart].clone(),
        best_objective,
        best_restart,
        converged: best_objective <= options.objective_tol,
        per_restart,
        states,
    })
}
