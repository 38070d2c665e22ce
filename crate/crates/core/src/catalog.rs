//! Named maximally entangled states and parameter families.
//!
//! Qubit labels follow the crate convention `|+⟩ → 0`, `|−⟩ → 1`; spin-1
//! labels map `|+⟩, |0⟩, |−⟩ → 0, 1, 2`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::certify::FAMILY_TOL;
use crate::generators::GeneratorChoice;
use crate::tensor::{CompositeSpace, StateVector};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn state(dims: &[usize], amps: Vec<C64>) -> StateVector {
    StateVector::new(CompositeSpace::new(dims.to_vec()).expect("valid dims"), amps)
        .expect("catalog amplitudes are non-zero")
}

/// `(|+−⟩ ± |−+⟩)/√2`.
pub fn epr(sign: Sign) -> StateVector {
    let h = FRAC_1_SQRT_2;
    state(&[2, 2], vec![c(0., 0.), c(h, 0.), c(sign.value() * h, 0.), c(0., 0.)])
}

/// `(|++⟩ ± |−−⟩)/√2`.
pub fn bell(sign: Sign) -> StateVector {
    let h = FRAC_1_SQRT_2;
    state(&[2, 2], vec![c(h, 0.), c(0., 0.), c(0., 0.), c(sign.value() * h, 0.)])
}

/// The all-four-term two-qubit state `(|++⟩ + i|+−⟩ + i|−+⟩ + |−−⟩)/2`
/// followed by the three states completing it to an orthonormal basis.
pub fn eq12_basis() -> [StateVector; 4] {
    let amps: [[C64; 4]; 4] = [
        [c(0.5, 0.), c(0., 0.5), c(0., 0.5), c(0.5, 0.)],
        [c(0.5, 0.), c(0., -0.5), c(0., 0.5), c(-0.5, 0.)],
        [c(0., 0.5), c(0.5, 0.), c(0.5, 0.), c(0., 0.5)],
        [c(0., -0.5), c(0.5, 0.), c(-0.5, 0.), c(0., 0.5)],
    ];
    amps.map(|a| state(&[2, 2], a.to_vec()))
}

/// `(|+++⟩ ± |−−−⟩)/√2`.
pub fn ghz(sign: Sign) -> StateVector {
    let mut amps = vec![c(0., 0.); 8];
    amps[0] = c(FRAC_1_SQRT_2, 0.);
    amps[7] = c(sign.value() * FRAC_1_SQRT_2, 0.);
    state(&[2, 2, 2], amps)
}

fn check_radius(r: f64) -> Result<f64> {
    if (0.0..=FRAC_1_SQRT_2 + 1e-15).contains(&r) {
        Ok(r.min(FRAC_1_SQRT_2))
    } else {
        Err(Error::InvalidParameter(format!(
            "modulus {r} outside [0, 1/sqrt(2)]"
        )))
    }
}

/// General maximally entangled two-qubit state: `|ψ₁₁| = |ψ₂₂| = r`,
/// `|ψ₁₂| = |ψ₂₁| = √(1/2 − r²)` and `φ₂₂ = π + φ₁₂ + φ₂₁ − φ₁₁`.
pub fn two_qubit_family(r: f64, phi11: f64, phi12: f64, phi21: f64) -> Result<StateVector> {
    let r = check_radius(r)?;
    let q = (0.5 - r * r).max(0.0).sqrt();
    let phi22 = PI + phi12 + phi21 - phi11;
    Ok(state(
        &[2, 2],
        vec![
            C64::from_polar(r, phi11),
            C64::from_polar(q, phi12),
            C64::from_polar(q, phi21),
            C64::from_polar(r, phi22),
        ],
    ))
}

/// Four-term three-qubit family on `|+++⟩, |+−+⟩, |−+−⟩, |−−−⟩`:
/// `|ψ₁₁₁| = |ψ₂₂₂| = r`, `|ψ₁₂₁| = |ψ₂₁₂| = √(1/2 − r²)`, with
/// `φ₂₂₂ = π + φ₁₂₁ + φ₂₁₂ − φ₁₁₁`.
///
/// At `r = 1/√2` this is a GHZ state; which sign depends on the (irrelevant)
/// phases given to the vanishing coefficients.
pub fn three_qubit_family(r: f64, phi111: f64, phi121: f64, phi212: f64) -> Result<StateVector> {
    let r = check_radius(r)?;
    let q = (0.5 - r * r).max(0.0).sqrt();
    let phi222 = PI + phi121 + phi212 - phi111;
    let mut amps = vec![c(0., 0.); 8];
    amps[0b000] = C64::from_polar(r, phi111);
    amps[0b010] = C64::from_polar(q, phi121);
    amps[0b101] = C64::from_polar(q, phi212);
    amps[0b111] = C64::from_polar(r, phi222);
    Ok(state(&[2, 2, 2], amps))
}

const TWIN_SLOTS: [usize; 3] = [2, 4, 6];

/// `|+₁−₂⟩, |0₁0₂⟩, |−₁+₂⟩` on two spin-1 factors.
pub fn photon_twin_basis() -> [StateVector; 3] {
    TWIN_SLOTS.map(|i| {
        let mut amps = vec![c(0., 0.); 9];
        amps[i] = c(1., 0.);
        state(&[3, 3], amps)
    })
}

/// `(|+−⟩ + e^{iφ_k}|00⟩ + e^{2iφ_k}|−+⟩)/√3` with `φ_k = 2kπ/3`.
pub fn su2_phase_state(k: usize) -> Result<StateVector> {
    if k > 2 {
        return Err(Error::InvalidParameter(format!("phase state index {k} not in 0..=2")));
    }
    let phi = 2.0 * k as f64 * PI / 3.0;
    let r = 1.0 / 3f64.sqrt();
    let mut amps = vec![c(0., 0.); 9];
    for (j, &slot) in TWIN_SLOTS.iter().enumerate() {
        amps[slot] = C64::from_polar(r, j as f64 * phi);
    }
    Ok(state(&[3, 3], amps))
}

/// Single spin-1 states with all spin projections vanishing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spin1Kind {
    /// `(|+⟩ + e^{iφ}|−⟩)/√2`.
    I { phi: f64 },
    /// `|0⟩`.
    II,
    /// `|λ₊| = |λ₋| = plus_modulus`, `|λ₀| = √(1 − 2|λ₊|²)`, with
    /// `cos((φ₊ + φ₋ − 2φ₀)/2) = 0`.
    III {
        plus_modulus: f64,
        phi_plus: f64,
        phi_zero: f64,
        phi_minus: f64,
    },
}

pub fn spin1_single(kind: Spin1Kind) -> Result<StateVector> {
    let amps = match kind {
        Spin1Kind::I { phi } => vec![
            c(FRAC_1_SQRT_2, 0.),
            c(0., 0.),
            C64::from_polar(FRAC_1_SQRT_2, phi),
        ],
        Spin1Kind::II => vec![c(0., 0.), c(1., 0.), c(0., 0.)],
        Spin1Kind::III {
            plus_modulus,
            phi_plus,
            phi_zero,
            phi_minus,
        } => {
            let p = check_radius(plus_modulus)?;
            let z = (1.0 - 2.0 * p * p).max(0.0).sqrt();
            let cos = ((phi_plus + phi_minus - 2.0 * phi_zero) / 2.0).cos();
            // The phase condition only binds when both moduli are non-zero.
            if p * z * cos.abs() > FAMILY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "phases violate cos((phi_plus + phi_minus - 2 phi_zero)/2) = 0 (got {cos:e})"
                )));
            }
            vec![
                C64::from_polar(p, phi_plus),
                C64::from_polar(z, phi_zero),
                C64::from_polar(p, phi_minus),
            ]
        }
    };
    Ok(state(&[3], amps))
}

/// Kind-III state with `φ₀ = (φ₊ + φ₋ − π)/2` chosen to satisfy the phase
/// condition.
pub fn spin1_family(plus_modulus: f64, phi_plus: f64, phi_minus: f64) -> Result<StateVector> {
    spin1_single(Spin1Kind::III {
        plus_modulus,
        phi_plus,
        phi_zero: (phi_plus + phi_minus - PI) / 2.0,
        phi_minus,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    #[serde(skip)]
    pub state: StateVector,
    /// Generator family under which the entry is maximally entangled.
    pub generators: GeneratorChoice,
}

/// Every name accepted by [`lookup`].
pub const NAMES: &[&str] = &[
    "epr+", "epr-", "bell+", "bell-", "eq12", "eq12-1", "eq12-2", "eq12-3", "ghz+", "ghz-",
    "two-qubit", "three-qubit", "phase-0", "phase-1", "phase-2", "twin-0", "twin-1", "twin-2",
    "spin1-I", "spin1-II", "spin1-III",
];

fn take_params(
    name: &str,
    given: &BTreeMap<String, f64>,
    defaults: &[(&str, f64)],
) -> Result<BTreeMap<String, f64>> {
    if let Some(k) = given.keys().find(|k| !defaults.iter().any(|(d, _)| d == k)) {
        return Err(Error::InvalidParameter(format!("`{name}` takes no parameter `{k}`")));
    }
    Ok(defaults
        .iter()
        .map(|&(k, v)| (k.to_string(), given.get(k).copied().unwrap_or(v)))
        .collect())
}

/// Builds a named entry. Families take their free parameters from `params`
/// and fall back to defaults for anything missing.
pub fn lookup(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let (parameters, state) = match name {
        "epr+" | "epr-" | "bell+" | "bell-" | "ghz+" | "ghz-" | "eq12" | "eq12-1" | "eq12-2"
        | "eq12-3" | "spin1-II" => {
            let p = take_params(name, params, &[])?;
            let s = match name {
                "epr+" => epr(Sign::Plus),
                "epr-" => epr(Sign::Minus),
                "bell+" => bell(Sign::Plus),
                "bell-" => bell(Sign::Minus),
                "ghz+" => ghz(Sign::Plus),
                "ghz-" => ghz(Sign::Minus),
                "spin1-II" => spin1_single(Spin1Kind::II)?,
                _ => {
                    let idx = name.strip_prefix("eq12-").map_or(0, |d| d.parse().unwrap_or(0));
                    eq12_basis()[idx].clone()
                }
            };
            (p, s)
        }
        "two-qubit" => {
            let p = take_params(
                name,
                params,
                &[("r", 0.5), ("phi11", 0.), ("phi12", 0.), ("phi21", 0.)],
            )?;
            let s = two_qubit_family(p["r"], p["phi11"], p["phi12"], p["phi21"])?;
            (p, s)
        }
        "three-qubit" => {
            let p = take_params(
                name,
                params,
                &[("r", 0.5), ("phi111", 0.), ("phi121", 0.), ("phi212", 0.)],
            )?;
            let s = three_qubit_family(p["r"], p["phi111"], p["phi121"], p["phi212"])?;
            (p, s)
        }
        "phase-0" | "phase-1" | "phase-2" | "twin-0" | "twin-1" | "twin-2" => {
            let p = take_params(name, params, &[])?;
            let k: usize = name[name.len() - 1..].parse().expect("digit suffix");
            let s = if name.starts_with("phase") {
                su2_phase_state(k)?
            } else {
                photon_twin_basis()[k].clone()
            };
            (p, s)
        }
        "spin1-I" => {
            let p = take_params(name, params, &[("phi", 0.)])?;
            let s = spin1_single(Spin1Kind::I { phi: p["phi"] })?;
            (p, s)
        }
        "spin1-III" => {
            let p = take_params(
                name,
                params,
                &[
                    ("plus_modulus", 0.5),
                    ("phi_plus", 0.),
                    ("phi_zero", PI / 2.0),
                    ("phi_minus", 0.),
                ],
            )?;
            let s = spin1_single(Spin1Kind::III {
                plus_modulus: p["plus_modulus"],
                phi_plus: p["phi_plus"],
                phi_zero: p["phi_zero"],
                phi_minus: p["phi_minus"],
            })?;
            (p, s)
        }
        other => return Err(Error::UnknownState(other.to_string())),
    };
    Ok(CatalogEntry {
        name: name.to_string(),
        parameters,
        state,
        // |0,0⟩ has vanishing spin-1 expectations, so only su(3) tells the
        // twin kets apart from entangled states.
        generators: if name.starts_with("twin") {
            GeneratorChoice::SuN
        } else {
            GeneratorChoice::Auto
        },
    })
}
