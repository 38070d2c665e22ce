//! Expectation values and variances of local observables on pure states.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::generators::{apply_local, GeneratorSet};
use crate::tensor::{hermiticity_defect, StateVector};
use crate::{Error, Result, C64};

/// Hermiticity tolerance for operators passed to [`expectation`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `⟨g⟩` for every generator of every factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalExpectations {
    pub factors: Vec<FactorExpectations>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorExpectations {
    pub factor: usize,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl LocalExpectations {
    /// `Σ_ℓ Σ_j ⟨g_j^(ℓ)⟩²`.
    pub fn sum_of_squares(&self) -> f64 {
        self.factors
            .iter()
            .flat_map(|f| &f.values)
            .map(|v| v * v)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, f64)> {
        self.factors.iter().flat_map(|f| {
            f.labels
                .iter()
                .zip(&f.values)
                .map(move |(l, &v)| (f.factor, l.as_str(), v))
        })
    }
}

fn check_operator(state: &StateVector, op: &DMatrix<C64>) -> Result<()> {
    let n = state.space().total_dim();
    if op.nrows() != n || op.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: op.nrows(),
        });
    }
    let h = hermiticity_defect(op);
    if h > HERMITIAN_TOL {
        return Err(Error::NotHermitian(h));
    }
    Ok(())
}

/// `⟨ψ|A|ψ⟩` for a Hermitian full-space operator.
pub fn expectation(state: &StateVector, op: &DMatrix<C64>) -> Result<f64> {
    check_operator(state, op)?;
    let psi = state.amplitudes();
    let z = psi.dotc(&(op * psi));
    debug_assert!(z.im.abs() <= HERMITIAN_TOL * op.nrows() as f64);
    Ok(z.re)
}

/// `⟨A²⟩ − ⟨A⟩²`, clamped at zero from below.
pub fn variance(state: &StateVector, op: &DMatrix<C64>) -> Result<f64> {
    check_operator(state, op)?;
    let psi = state.amplitudes();
    let a_psi = op * psi;
    let mean = psi.dotc(&a_psi).re;
    let sq = op * op;
    let second = psi.dotc(&(sq * psi)).re;
    Ok((second - mean * mean).max(0.0))
}

fn check_sets(state: &StateVector, sets: &[GeneratorSet]) -> Result<()> {
    let dims = state.dims();
    if sets.len() != dims.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.len(),
            found: sets.len(),
        });
    }
    for (set, &n) in sets.iter().zip(dims) {
        if set.local_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: set.local_dim(),
            });
        }
    }
    Ok(())
}

/// Expectation of every generator in `sets[ℓ]` acting on factor `ℓ`.
pub fn local_expectations(state: &StateVector, sets: &[GeneratorSet]) -> Result<LocalExpectations> {
    check_sets(state, sets)?;
    let space = state.space();
    let psi = state.amplitudes();
    let factors = sets
        .iter()
        .enumerate()
        .map(|(ell, set)| {
            let values = set
                .matrices()
                .iter()
                .map(|g| Ok(psi.dotc(&apply_local(g, ell, space, psi)?).re))
                .collect::<Result<Vec<_>>>()?;
            Ok(FactorExpectations {
                factor: ell,
                labels: set.labels().to_vec(),
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalExpectations { factors })
}

pub(crate) fn validate_sets(state: &StateVector, sets: &[GeneratorSet]) -> Result<()> {
    check_sets(state, sets)
}
