//! Seeded random states, unitaries and Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::tensor::{CompositeSpace, StateVector};
use crate::C64;

/// Complex standard Gaussian with independent real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Normalized complex-Gaussian vector; unitarily invariant.
pub fn random_state<R: Rng + ?Sized>(space: &CompositeSpace, rng: &mut R) -> StateVector {
    loop {
        let v = DVector::from_fn(space.total_dim(), |_, _| complex_gaussian(rng));
        if let Ok(s) = StateVector::from_vector(space.clone(), v) {
            return s;
        }
    }
}

/// Q factor of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng)).qr().q()
}

pub fn random_hermitian_traceless<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let mut h = (&a + a.adjoint()).scale(0.5);
    let shift = h.trace() / C64::new(n as f64, 0.0);
    for i in 0..n {
        h[(i, i)] -= shift;
    }
    h
}

/// Applies `u_0 ⊗ u_1 ⊗ …` to `state`.
pub fn apply_local_unitaries(state: &StateVector, unitaries: &[DMatrix<C64>]) -> StateVector {
    let space = state.space();
    assert_eq!(unitaries.len(), space.num_factors());
    let mut psi = state.amplitudes().clone();
    for (ell, u) in unitaries.iter().enumerate() {
        psi = crate::generators::apply_local(u, ell, space, &psi).expect("unitary matches factor");
    }
    StateVector::from_vector(space.clone(), psi).expect("unitary image is non-zero")
}
