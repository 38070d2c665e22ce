//! Three tests for maximal entanglement of a pure state, and closed-form
//! checks for the known solution families.
//!
//! - generators: every local generator has zero expectation;
//! - slices: parallel slices of the coefficient tensor are pairwise
//!   orthogonal with norm `1/√n_ℓ`;
//! - marginals: every single-factor reduced state is `identity / n_ℓ`.
//!
//! With complete su(n) sets the three agree. Spin projections on factors of
//! dimension above 2 are a strictly weaker test, and only the generator
//! verdict is meaningful for them.

use serde::Serialize;

use crate::generators::{spin_set_twice, GeneratorSet};
use crate::measurement::{local_expectations, validate_sets, LocalExpectations};
use crate::tensor::{CompositeSpace, StateVector};
use crate::{Error, Result, C64};

/// Tolerance for analytic constructions.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Expectations above this magnitude are listed as violations.
pub const NONZERO: f64 = 1e-12;
/// Tolerance of the closed-form family checks.
pub const FAMILY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub factor: usize,
    pub generator: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertReport {
    /// `Σ_ℓ Σ_j ⟨g_j^(ℓ)⟩²`.
    pub residual: f64,
    pub per_generator: LocalExpectations,
    pub nonzero: Vec<Violation>,
    pub verdict_generators: bool,
    /// `None` when some factor's generator set is incomplete.
    pub verdict_slices: Option<bool>,
    pub verdict_marginals: Option<bool>,
    pub complete_sets: bool,
    pub tol: f64,
}

impl CertReport {
    /// All applicable verdicts hold.
    pub fn certified(&self) -> bool {
        self.verdict_generators
            && self.verdict_slices.unwrap_or(true)
            && self.verdict_marginals.unwrap_or(true)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")))
    }
}

/// Generator criterion; the slice and marginal verdicts are attached when every
/// set is complete.
pub fn certify_generators(state: &StateVector, sets: &[GeneratorSet], tol: f64) -> Result<CertReport> {
    check_tol(tol)?;
    validate_sets(state, sets)?;
    let per_generator = local_expectations(state, sets)?;
    let residual = per_generator.sum_of_squares();
    let nonzero = per_generator
        .iter()
        .filter(|(_, _, v)| v.abs() > NONZERO)
        .map(|(factor, g, value)| Violation {
            factor,
            generator: g.to_string(),
            value,
        })
        .collect();
    let complete_sets = sets.iter().all(GeneratorSet::is_complete);
    let (verdict_slices, verdict_marginals) = if complete_sets {
        (
            Some(certify_slices(state, tol)?.verdict),
            Some(certify_marginals(state, tol)?),
        )
    } else {
        (None, None)
    };
    Ok(CertReport {
        residual,
        per_generator,
        nonzero,
        verdict_generators: residual <= tol,
        verdict_slices,
        verdict_marginals,
        complete_sets,
        tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceOverlap {
    pub a: usize,
    pub b: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionSlices {
    pub direction: usize,
    pub expected_norm: f64,
    pub norms: Vec<f64>,
    pub inner_products: Vec<SliceOverlap>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceReport {
    pub directions: Vec<DirectionSlices>,
    pub verdict: bool,
    pub tol: f64,
}

/// Slice criterion: in every direction, slices pairwise orthogonal and each of
/// norm `1/√n_ℓ`, both within `tol`.
pub fn certify_slices(state: &StateVector, tol: f64) -> Result<SliceReport> {
    check_tol(tol)?;
    let directions = (0..state.space().num_factors())
        .map(|ell| {
            let fam = state.slices(ell)?;
            let n = fam.slices.len();
            let expected_norm = 1.0 / (n as f64).sqrt();
            let norms: Vec<f64> = fam.slices.iter().map(|s| s.norm()).collect();
            let mut inner_products = Vec::with_capacity(n * (n - 1) / 2);
            for a in 0..n {
                for b in a + 1..n {
                    let z = fam.slices[b].dotc(&fam.slices[a]);
                    inner_products.push(SliceOverlap { a, b, re: z.re, im: z.im });
                }
            }
            let ok = norms.iter().all(|v| (v - expected_norm).abs() <= tol)
                && inner_products
                    .iter()
                    .all(|p| C64::new(p.re, p.im).norm() <= tol);
            Ok(DirectionSlices {
                direction: ell,
                expected_norm,
                norms,
                inner_products,
                ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = directions.iter().all(|d| d.ok);
    Ok(SliceReport { directions, verdict, tol })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorMarginal {
    pub factor: usize,
    /// `‖ρ_ℓ − identity/n_ℓ‖_F`.
    pub distance: f64,
    /// Von Neumann entropy in nats.
    pub entropy: f64,
    /// `ln n_ℓ`.
    pub max_entropy: f64,
}

pub fn marginals(state: &StateVector) -> Vec<FactorMarginal> {
    state
        .reduced_states()
        .into_iter()
        .enumerate()
        .map(|(factor, rho)| FactorMarginal {
            factor,
            distance: rho.distance_from_maximally_mixed(),
            entropy: rho.entropy(),
            max_entropy: (rho.dim() as f64).ln(),
        })
        .collect()
}

/// Marginal criterion: `‖ρ_ℓ − identity/n_ℓ‖_F ≤ tol` for every factor.
pub fn certify_marginals(state: &StateVector, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    Ok(marginals(state).iter().all(|m| m.distance <= tol))
}

/// Condition `arg z = π (mod 2π)` weighted by `√|z|`, so that it is vacuous
/// when any coefficient entering `z` vanishes.
fn phase_is_pi(z: C64, tol: f64) -> bool {
    let m = z.norm();
    m == 0.0 || m.sqrt() * (z / m + 1.0).norm() <= tol
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FAMILY_TOL
}

/// Closed-form two-qubit conditions: `|ψ₂₂| = |ψ₁₁|`, `|ψ₂₁| = |ψ₁₂|`,
/// `|ψ₁₁|² + |ψ₁₂|² = 1/2` and `φ₁₁ + φ₂₂ − φ₁₂ − φ₂₁ = π (mod 2π)`.
/// Coefficients are in `[ψ₁₁, ψ₁₂, ψ₂₁, ψ₂₂]` order.
pub fn verify_family_two_qubit(coeffs: &[C64; 4]) -> bool {
    let [p11, p12, p21, p22] = *coeffs;
    close(p22.norm(), p11.norm())
        && close(p21.norm(), p12.norm())
        && close(p11.norm_sqr() + p12.norm_sqr(), 0.5)
        && phase_is_pi(p11 * p22 * (p12 * p21).conj(), FAMILY_TOL)
}

/// Flat indices of `ψ₁₁₁, ψ₁₂₁, ψ₂₁₂, ψ₂₂₂` in a three-qubit amplitude vector.
pub const THREE_QUBIT_SLOTS: [usize; 4] = [0b000, 0b010, 0b101, 0b111];

/// Closed-form conditions on the four-term three-qubit ansatz:
/// `|ψ₁₁₁|² + |ψ₁₂₁|² = 1/2`, `|ψ₂₂₂| = |ψ₁₁₁|`, `|ψ₂₁₂| = |ψ₁₂₁|` and
/// `φ₁₁₁ − φ₁₂₁ − φ₂₁₂ + φ₂₂₂ = ±π (mod 2π)`.
pub fn verify_family_three_qubit(amplitudes: &[C64]) -> Result<bool> {
    if amplitudes.len() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            found: amplitudes.len(),
        });
    }
    if let Some((i, _)) = amplitudes
        .iter()
        .enumerate()
        .find(|(i, z)| !THREE_QUBIT_SLOTS.contains(i) && z.norm() > NONZERO)
    {
        return Err(Error::InvalidParameter(format!(
            "amplitude at index {i} lies outside the four-term ansatz"
        )));
    }
    let [p111, p121, p212, p222] = THREE_QUBIT_SLOTS.map(|i| amplitudes[i]);
    Ok(close(p111.norm_sqr() + p121.norm_sqr(), 0.5)
        && close(p222.norm(), p111.norm())
        && close(p212.norm(), p121.norm())
        && phase_is_pi(p111 * p222 * (p121 * p212).conj(), FAMILY_TOL))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Spin1Form {
    /// `(|+⟩ + e^{iφ}|−⟩)/√2`.
    I,
    /// `|0⟩`.
    II,
    /// `|λ₊| = |λ₋|`, `2|λ₊|² + |λ₀|² = 1`, `cos((φ₊ + φ₋ − 2φ₀)/2) = 0`.
    III,
}

/// Which maximally entangled single spin-1 form `[λ₊, λ₀, λ₋]` has, if any.
pub fn classify_spin1(lambda: &[C64; 3]) -> Option<Spin1Form> {
    let [lp, l0, lm] = *lambda;
    let family = close(lp.norm(), lm.norm())
        && close(2.0 * lp.norm_sqr() + l0.norm_sqr(), 1.0)
        && phase_is_pi(lp * lm * (l0 * l0).conj(), FAMILY_TOL);
    if !family {
        return None;
    }
    Some(if l0.norm() <= FAMILY_TOL {
        Spin1Form::I
    } else if close(l0.norm(), 1.0) {
        Spin1Form::II
    } else {
        Spin1Form::III
    })
}

/// Zero spin-1 projections, and membership of one of the closed forms.
pub fn verify_family_spin1(lambda: &[C64; 3]) -> bool {
    let norm: f64 = lambda.iter().map(|z| z.norm_sqr()).sum();
    if !close(norm, 1.0) {
        return false;
    }
    let space = CompositeSpace::new(vec![3]).expect("valid");
    let state = StateVector::new(space, lambda.to_vec()).expect("non-zero");
    let residual = local_expectations(&state, &[spin_set_twice(2)])
        .expect("dimensions match")
        .sum_of_squares();
    residual <= FAMILY_TOL && classify_spin1(lambda).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{pauli_set, su_n_set};
    use crate::tensor::make_state;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn polar(r: f64, phi: f64) -> C64 {
        C64::from_polar(r, phi)
    }

    fn pauli2() -> Vec<GeneratorSet> {
        vec![pauli_set(), pauli_set()]
    }

    #[test]
    fn generator_criterion_examples() {
        let h = FRAC_1_SQRT_2;
        let epr = make_state(&[2, 2], vec![c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.)]).unwrap();
        let rep = certify_generators(&epr, &pauli2(), DEFAULT_TOL).unwrap();
        assert_eq!(rep.residual, 0.0);
        assert!(rep.certified());
        assert!(rep.nonzero.is_empty());

        let pp = make_state(&[2, 2], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let rep = certify_generators(&pp, &pauli2(), DEFAULT_TOL).unwrap();
        assert_eq!(rep.residual, 2.0);
        assert!(!rep.verdict_generators);
        assert_eq!(rep.nonzero.len(), 2);
        assert_eq!(rep.verdict_slices, Some(false));
        assert_eq!(rep.verdict_marginals, Some(false));

        // Four-term ansatz with only ψ₁₁₁, ψ₁₂₁, ψ₂₂₂ populated.
        let mut amps = vec![c(0., 0.); 8];
        let b: f64 = 0.3;
        let a = ((1.0 - b * b) / 2.0).sqrt();
        amps[0] = c(a, 0.);
        amps[2] = c(b, 0.);
        amps[7] = c(a, 0.);
        let s = make_state(&[2, 2, 2], amps).unwrap();
        let rep = certify_generators(&s, &[pauli_set(), pauli_set(), pauli_set()], DEFAULT_TOL)
            .unwrap();
        assert!(!rep.verdict_generators);
    }

    #[test]
    fn rejects_bad_tolerance_and_sets() {
        let s = make_state(&[2, 2], vec![c(1., 0.); 4]).unwrap();
        assert!(certify_generators(&s, &pauli2(), 0.0).is_err());
        assert!(certify_generators(&s, &[pauli_set()], 1e-3).is_err());
        assert!(certify_slices(&s, -1.0).is_err());
    }

    #[test]
    fn slice_criterion_examples() {
        let eq12 = make_state(&[2, 2], vec![c(0.5, 0.), c(0., 0.5), c(0., 0.5), c(0.5, 0.)]).unwrap();
        let rep = certify_slices(&eq12, DEFAULT_TOL).unwrap();
        assert!(rep.verdict);
        for d in &rep.directions {
            assert!((d.expected_norm - FRAC_1_SQRT_2).abs() < 1e-15);
            for n in &d.norms {
                assert!((n - FRAC_1_SQRT_2).abs() < 1e-15);
            }
            assert_eq!(d.inner_products.len(), 1);
            assert!(c(d.inner_products[0].re, d.inner_products[0].im).norm() < 1e-15);
        }

        let pp = make_state(&[2, 2], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let rep = certify_slices(&pp, DEFAULT_TOL).unwrap();
        assert!(!rep.verdict);
        assert_eq!(rep.directions[1].norms[1], 0.0);
    }

    #[test]
    fn qubit_qutrit_never_certifies() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let space = CompositeSpace::new(vec![2, 3]).unwrap();
        for _ in 0..2000 {
            let s = crate::random::random_state(&space, &mut rng);
            assert!(!certify_slices(&s, 1e-3).unwrap().verdict);
            assert!(!certify_marginals(&s, 1e-3).unwrap());
        }
    }

    #[test]
    fn marginal_criterion_examples() {
        let eq12 = make_state(&[2, 2], vec![c(0.5, 0.), c(0., 0.5), c(0., 0.5), c(0.5, 0.)]).unwrap();
        assert!(certify_marginals(&eq12, DEFAULT_TOL).unwrap());
        for m in marginals(&eq12) {
            assert!((m.entropy - 2f64.ln()).abs() < 1e-12);
        }
        let mut amps = vec![c(0., 0.); 8];
        amps[0] = c(1., 0.);
        amps[7] = c(1., 0.);
        let ghz = make_state(&[2, 2, 2], amps).unwrap();
        assert!(certify_marginals(&ghz, DEFAULT_TOL).unwrap());
        let pp = make_state(&[2, 2], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(!certify_marginals(&pp, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn two_qubit_family_examples() {
        let h = FRAC_1_SQRT_2;
        assert!(verify_family_two_qubit(&[c(0.5, 0.), c(0., 0.5), c(0., 0.5), c(0.5, 0.)]));
        assert!(verify_family_two_qubit(&[c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.)]));
        assert!(verify_family_two_qubit(&[c(0., 0.), c(h, 0.), c(-h, 0.), c(0., 0.)]));
        // Zero-modulus rule: the phase sum is undefined but the state certifies.
        let odd = [c(h, 0.), c(0., 0.), c(0., 0.), c(0., h)];
        assert!(verify_family_two_qubit(&odd));
        let s = make_state(&[2, 2], odd.to_vec()).unwrap();
        assert_eq!(certify_generators(&s, &pauli2(), DEFAULT_TOL).unwrap().residual, 0.0);
        // All four moduli equal but the phase condition broken.
        assert!(!verify_family_two_qubit(&[c(0.5, 0.); 4]));
        assert!(!verify_family_two_qubit(&[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]));
    }

    #[test]
    fn three_qubit_family_examples() {
        let mut amps = vec![c(0., 0.); 8];
        amps[0] = c(0.5, 0.);
        amps[2] = c(0.5, 0.);
        amps[5] = c(0.5, 0.);
        amps[7] = polar(0.5, PI);
        assert!(verify_family_three_qubit(&amps).unwrap());

        let mut ghz = vec![c(0., 0.); 8];
        ghz[0] = c(FRAC_1_SQRT_2, 0.);
        ghz[7] = c(FRAC_1_SQRT_2, 0.);
        assert!(verify_family_three_qubit(&ghz).unwrap());

        let r = 0.6;
        let q = (0.5f64 - 0.25).sqrt();
        let mut off = vec![c(0., 0.); 8];
        off[0] = c(r, 0.);
        off[2] = c(q, 0.);
        off[5] = c(q, 0.);
        off[7] = c(-((1.0 - r * r - 2.0 * q * q).max(0.0)).sqrt(), 0.);
        assert!(!verify_family_three_qubit(&off).unwrap());

        let mut stray = ghz.clone();
        stray[1] = c(0.1, 0.);
        assert!(verify_family_three_qubit(&stray).is_err());
        assert!(verify_family_three_qubit(&ghz[..4]).is_err());
    }

    #[test]
    fn spin1_family_examples() {
        let h = FRAC_1_SQRT_2;
        for phi in [0.0, 0.7, PI, -2.1] {
            let l = [c(h, 0.), c(0., 0.), polar(h, phi)];
            assert!(verify_family_spin1(&l));
            assert_eq!(classify_spin1(&l), Some(Spin1Form::I));
        }
        let l = [c(0., 0.), c(1., 0.), c(0., 0.)];
        assert!(verify_family_spin1(&l));
        assert_eq!(classify_spin1(&l), Some(Spin1Form::II));
        let l = [c(0.5, 0.), c(0., h), c(0.5, 0.)];
        assert!(verify_family_spin1(&l));
        assert_eq!(classify_spin1(&l), Some(Spin1Form::III));
        assert!(!verify_family_spin1(&[c(h, 0.), c(0., 0.), c(0., 0.)]));
        assert!(!verify_family_spin1(&[c(0.5, 0.), c(h, 0.), c(0.5, 0.)]));
    }

    #[test]
    fn spin1_forms_under_full_su3() {
        // Spin projections certify |0⟩, the complete su(3) set does not.
        let zero = make_state(&[3], vec![c(0., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let rep = certify_generators(&zero, &[su_n_set(3).unwrap()], DEFAULT_TOL).unwrap();
        assert!(!rep.verdict_generators);
        let rep = certify_generators(&zero, &[spin_set_twice(2)], DEFAULT_TOL).unwrap();
        assert!(rep.verdict_generators);
        assert_eq!(rep.verdict_slices, None);
    }
}
