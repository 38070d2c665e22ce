//! Three-level Λ atoms in a two-mode cavity with a leaky Stokes mode.
//!
//! Factor order is atoms first (levels 1, 2, 3 at local indices 0, 1, 2),
//! then the pump mode, then the Stokes mode. The Hamiltonian is
//!
//! ```text
//! H = ω_P a†_P a_P + ω_S a†_S a_S + Σ_f (ω₁₂ R₂₂(f) + ω₁₃ R₃₃(f))
//!   + Σ_f (g_P R₂₁(f) a_P + g_S R₃₂(f) a†_S + h.c.)
//! ```
//!
//! and the density matrix obeys
//! `ρ̇ = −i[H, ρ] + κ(2 a_S ρ a†_S − a†_S a_S ρ − ρ a†_S a_S)`, integrated with
//! fixed-step classical RK4. With two atoms and one pump photon the system is
//! driven from `|1,1⟩|1_P⟩|0_S⟩` through `|ψ₁⟩ = (|2,1⟩ + |1,2⟩)/√2 |0,0⟩` and
//! `|ψ₂⟩ = (|3,1⟩ + |1,3⟩)/√2 |0_P⟩|1_S⟩` into the dark state
//! `|ψ_fin⟩ = (|3,1⟩ + |1,3⟩)/√2 |0,0⟩`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::tensor::{CompositeSpace, DensityMatrix, StateVector};
use crate::{Error, Result, C64};

/// Largest Hilbert-space dimension accepted.
pub const MAX_DIM: usize = 4096;
/// Allowed deviation of `Tr ρ` from 1 before integration aborts.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Smallest sector population [`atomic_conditional_state`] will condition on.
pub const MIN_SECTOR_POPULATION: f64 = 1e-6;
/// RK4 is stable on the imaginary axis for `|λ dt| < 2√2`.
const RK4_IMAGINARY_LIMIT: f64 = 2.0 * std::f64::consts::SQRT_2;

/// How the 2 → 3 transition couples to the Stokes mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StokesCoupling {
    /// `g_S R₃₂ a†_S + h.c.`: the 2 → 3 decay emits a Stokes photon.
    #[default]
    Emission,
    /// `g_S R₃₂ a_S + h.c.`: the 2 → 3 decay absorbs a Stokes photon.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub atoms: usize,
    pub pump_cutoff: usize,
    pub stokes_cutoff: usize,
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_12: f64,
    pub omega_13: f64,
    pub g_p: f64,
    pub g_s: f64,
    pub kappa: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Record observables every this many steps.
    pub output_stride: usize,
    pub stokes_coupling: StokesCoupling,
}

impl Default for SimConfig {
    /// Two atoms, one pump photon, both transitions resonant and
    /// `g_P = g_S = κ = 0.1`.
    fn default() -> Self {
        let omega_12 = 10.0;
        let omega_13 = 3.0;
        Self {
            atoms: 2,
            pump_cutoff: 1,
            stokes_cutoff: 1,
            omega_p: omega_12,
            omega_s: omega_12 - omega_13,
            omega_12,
            omega_13,
            g_p: 0.1,
            g_s: 0.1,
            kappa: 0.1,
            t_final: 200.0,
            dt: 1e-3,
            output_stride: 1000,
            stokes_coupling: StokesCoupling::Emission,
        }
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.atoms == 0 {
            return bad("at least one atom is required".into());
        }
        if self.pump_cutoff == 0 || self.stokes_cutoff == 0 {
            return bad("Fock cutoffs must be at least 1".into());
        }
        let reals = [
            ("omega_p", self.omega_p),
            ("omega_s", self.omega_s),
            ("omega_12", self.omega_12),
            ("omega_13", self.omega_13),
            ("g_p", self.g_p),
            ("g_s", self.g_s),
            ("kappa", self.kappa),
            ("t_final", self.t_final),
        ];
        for (name, v) in reals {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.omega_12 <= self.omega_13 {
            return bad("level 3 must lie below level 2 (omega_12 > omega_13)".into());
        }
        if self.output_stride == 0 {
            return bad("output_stride must be at least 1".into());
        }
        build_space(self).map(|_| ())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// `[3; atoms] ⊗ (N_P + 1) ⊗ (N_S + 1)`, capped at [`MAX_DIM`].
pub fn build_space(config: &SimConfig) -> Result<CompositeSpace> {
    let mut dims = vec![3; config.atoms];
    dims.push(config.pump_cutoff + 1);
    dims.push(config.stokes_cutoff + 1);
    let space = CompositeSpace::new(dims)?;
    if space.total_dim() > MAX_DIM {
        return Err(Error::InvalidDims(format!(
            "total dimension {} exceeds {MAX_DIM}",
            space.total_dim()
        )));
    }
    Ok(space)
}

/// Sparse operator entries `(row, col, value)`; duplicates add.
type Entries = Vec<(usize, usize, C64)>;

/// Hamiltonian and jump operator of one configuration in sparse form.
#[derive(Clone, Debug)]
pub struct LambdaSystem {
    config: SimConfig,
    space: CompositeSpace,
    h_diag: Vec<f64>,
    h_off: Entries,
    stokes_lowering: Vec<(usize, usize, f64)>,
    n_pump: Vec<f64>,
    n_stokes: Vec<f64>,
    n1: Vec<f64>,
    n2: Vec<f64>,
}

impl LambdaSystem {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let space = build_space(config)?;
        let a = config.atoms;
        let d = space.total_dim();
        let mut h_diag = vec![0.0; d];
        let mut h_off = Entries::new();
        let mut stokes_lowering = Vec::new();
        let mut n_pump = vec![0.0; d];
        let mut n_stokes = vec![0.0; d];
        let mut n1 = vec![0.0; d];
        let mut n2 = vec![0.0; d];

        for idx in 0..d {
            let multi = space.multi_index(idx);
            let (levels, modes) = multi.split_at(a);
            let (p, s) = (modes[0], modes[1]);
            let excited2 = levels.iter().filter(|&&l| l == 1).count() as f64;
            let excited3 = levels.iter().filter(|&&l| l == 2).count() as f64;
            h_diag[idx] = config.omega_p * p as f64
                + config.omega_s * s as f64
                + config.omega_12 * excited2
                + config.omega_13 * excited3;
            n_pump[idx] = p as f64;
            n_stokes[idx] = s as f64;
            n1[idx] = p as f64 + excited2 + excited3;
            n2[idx] = match config.stokes_coupling {
                StokesCoupling::Emission => s as f64 - excited3,
                StokesCoupling::Literal => s as f64 + excited3,
            };

            if s > 0 {
                let mut to = multi.clone();
                to[a + 1] = s - 1;
                stokes_lowering.push((space.index(&to), idx, (s as f64).sqrt()));
            }

            for f in 0..a {
                // g_P R₂₁(f) a_P: level 1 → 2, absorbing a pump photon.
                if levels[f] == 0 && p > 0 {
                    let mut to = multi.clone();
                    to[f] = 1;
                    to[a] = p - 1;
                    let v = C64::new(config.g_p * (p as f64).sqrt(), 0.0);
                    push_hermitian(&mut h_off, space.index(&to), idx, v);
                }
                // 2 → 3 with a Stokes photon emitted (or absorbed).
                if levels[f] == 1 {
                    let target_s = match config.stokes_coupling {
                        StokesCoupling::Emission => (s < config.stokes_cutoff).then_some(s + 1),
                        StokesCoupling::Literal => s.checked_sub(1),
                    };
                    if let Some(ns) = target_s {
                        let mut to = multi.clone();
                        to[f] = 2;
                        to[a + 1] = ns;
                        let amp = (s.max(ns) as f64).sqrt();
                        let v = C64::new(config.g_s * amp, 0.0);
                        push_hermitian(&mut h_off, space.index(&to), idx, v);
                    }
                }
            }
        }
        h_off.retain(|e| e.2 != C64::new(0.0, 0.0));
        Ok(Self {
            config: config.clone(),
            space,
            h_diag,
            h_off,
            stokes_lowering,
            n_pump,
            n_stokes,
            n1,
            n2,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn hamiltonian(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut h = DMatrix::from_diagonal(&DVector::from_iterator(
            d,
            self.h_diag.iter().map(|&e| C64::new(e, 0.0)),
        ));
        for &(i, j, v) in &self.h_off {
            h[(i, j)] += v;
        }
        h
    }

    pub fn stokes_lowering(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for &(i, j, v) in &self.stokes_lowering {
            m[(i, j)] += C64::new(v, 0.0);
        }
        m
    }

    /// `a†_P a_P + Σ_f (R₂₂(f) + R₃₃(f))`, diagonal.
    pub fn n1(&self) -> &[f64] {
        &self.n1
    }

    /// `a†_S a_S − Σ_f R₃₃(f)` (emission coupling) or `a†_S a_S + Σ_f R₃₃(f)`
    /// (literal coupling), diagonal.
    pub fn n2(&self) -> &[f64] {
        &self.n2
    }

    /// Bound on the spectral radius of the Liouvillian: Gershgorin spread of
    /// `H` plus `4κN_S` for the dissipator.
    pub fn spectral_radius_bound(&self) -> f64 {
        let d = self.dim();
        let mut radius = vec![0.0; d];
        for &(i, _, v) in &self.h_off {
            radius[i] += v.norm();
        }
        let hi = (0..d).map(|i| self.h_diag[i] + radius[i]).fold(f64::MIN, f64::max);
        let lo = (0..d).map(|i| self.h_diag[i] - radius[i]).fold(f64::MAX, f64::min);
        (hi - lo) + 4.0 * self.config.kappa * self.config.stokes_cutoff as f64
    }

    /// Largest stable step implied by [`Self::spectral_radius_bound`].
    pub fn max_stable_dt(&self) -> f64 {
        let r = self.spectral_radius_bound();
        if r > 0.0 {
            RK4_IMAGINARY_LIMIT / r
        } else {
            f64::INFINITY
        }
    }

    /// Writes `L(ρ)` into `out`; both are row-major `d × d`.
    fn liouvillian(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim();
        let kappa = self.config.kappa;
        for i in 0..d {
            let (hi, ni) = (self.h_diag[i], self.n_stokes[i]);
            let row = &mut out[i * d..(i + 1) * d];
            let src = &rho[i * d..(i + 1) * d];
            for j in 0..d {
                let coherent = C64::new(0.0, -(hi - self.h_diag[j]));
                let decay = -kappa * (ni + self.n_stokes[j]);
                row[j] = src[j] * (coherent + decay);
            }
        }
        let minus_i = C64::new(0.0, -1.0);
        for &(i, k, h) in &self.h_off {
            let a = minus_i * h;
            for j in 0..d {
                out[i * d + j] += a * rho[k * d + j];
            }
            let b = -a;
            for r in 0..d {
                out[r * d + k] += b * rho[r * d + i];
            }
        }
        if kappa != 0.0 {
            for &(i, k, v) in &self.stokes_lowering {
                for &(j, l, w) in &self.stokes_lowering {
                    out[i * d + j] += rho[k * d + l] * (2.0 * kappa * v * w);
                }
            }
        }
    }

    fn observe(&self, t: f64, rho: &[C64]) -> Record {
        let d = self.dim();
        let diag = |w: &[f64]| (0..d).map(|i| w[i] * rho[i * d + i].re).sum::<f64>();
        let trace = (0..d).map(|i| rho[i * d + i].re).sum();
        let (fid, p1, p2) = if self.config.atoms == 2 {
            let targets = TwoAtomTargets::new(&self.space);
            (
                sparse_overlap(&targets.fin, rho, d),
                sparse_overlap(&targets.psi1, rho, d),
                sparse_overlap(&targets.psi2, rho, d),
            )
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        Record {
            t,
            trace,
            n_pump: diag(&self.n_pump),
            n_stokes: diag(&self.n_stokes),
            fidelity_final: fid,
            pop_psi1: p1,
            pop_psi2: p2,
            n1: diag(&self.n1),
            n2: diag(&self.n2),
        }
    }
}

fn push_hermitian(entries: &mut Entries, to: usize, from: usize, v: C64) {
    entries.push((to, from, v));
    entries.push((from, to, v.conj()));
}

/// `⟨v|ρ|v⟩` for a sparse real vector.
fn sparse_overlap(v: &[(usize, f64)], rho: &[C64], d: usize) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for &(i, a) in v {
        for &(j, b) in v {
            acc += rho[i * d + j] * (a * b);
        }
    }
    acc.re
}

/// Sparse forms of the named two-atom states.
struct TwoAtomTargets {
    initial: Vec<(usize, f64)>,
    psi1: Vec<(usize, f64)>,
    psi2: Vec<(usize, f64)>,
    fin: Vec<(usize, f64)>,
}

impl TwoAtomTargets {
    fn new(space: &CompositeSpace) -> Self {
        let h = FRAC_1_SQRT_2;
        let at = |l1, l2, p, s| space.index(&[l1, l2, p, s]);
        Self {
            initial: vec![(at(0, 0, 1, 0), 1.0)],
            psi1: vec![(at(1, 0, 0, 0), h), (at(0, 1, 0, 0), h)],
            psi2: vec![(at(2, 0, 0, 1), h), (at(0, 2, 0, 1), h)],
            fin: vec![(at(2, 0, 0, 0), h), (at(0, 2, 0, 0), h)],
        }
    }
}

fn two_atom_state(config: &SimConfig, pick: impl Fn(&TwoAtomTargets) -> &Vec<(usize, f64)>) -> Result<StateVector> {
    if config.atoms != 2 {
        return Err(Error::InvalidParameter(format!(
            "the target states are defined for two atoms, config has {}",
            config.atoms
        )));
    }
    let space = build_space(config)?;
    let t = TwoAtomTargets::new(&space);
    let mut v = DVector::zeros(space.total_dim());
    for &(i, a) in pick(&t) {
        v[i] = C64::new(a, 0.0);
    }
    StateVector::from_vector(space, v)
}

/// `(|3,1⟩ + |1,3⟩)/√2 ⊗ |0_P⟩ ⊗ |0_S⟩`.
pub fn final_state(config: &SimConfig) -> Result<StateVector> {
    two_atom_state(config, |t| &t.fin)
}

/// `(|2,1⟩ + |1,2⟩)/√2 ⊗ |0_P⟩ ⊗ |0_S⟩`.
pub fn psi1_state(config: &SimConfig) -> Result<StateVector> {
    two_atom_state(config, |t| &t.psi1)
}

/// `(|3,1⟩ + |1,3⟩)/√2 ⊗ |0_P⟩ ⊗ |1_S⟩`.
pub fn psi2_state(config: &SimConfig) -> Result<StateVector> {
    two_atom_state(config, |t| &t.psi2)
}

/// All atoms in level 1, one pump photon, no Stokes photons.
pub fn initial_state(config: &SimConfig) -> Result<StateVector> {
    if config.atoms == 2 {
        return two_atom_state(config, |t| &t.initial);
    }
    let space = build_space(config)?;
    let mut multi = vec![0; config.atoms + 2];
    multi[config.atoms] = 1;
    StateVector::basis(space, &multi)
}

/// Build only the Hamiltonian, densely.
pub fn build_hamiltonian(config: &SimConfig) -> Result<DMatrix<C64>> {
    Ok(LambdaSystem::new(config)?.hamiltonian())
}

/// Starting point of an evolution.
#[derive(Clone, Debug)]
pub enum Initial {
    /// [`initial_state`].
    Default,
    Pure(StateVector),
    Mixed(DensityMatrix),
}

/// Observables at one recorded time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    pub trace: f64,
    pub n_pump: f64,
    pub n_stokes: f64,
    /// `⟨ψ_fin|ρ|ψ_fin⟩`; NaN unless there are two atoms.
    pub fidelity_final: f64,
    pub pop_psi1: f64,
    pub pop_psi2: f64,
    pub n1: f64,
    pub n2: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Trajectory {
    pub const CSV_HEADER: &'static str = "t,trace,n_pump,n_stokes,fidelity_final,pop_psi1,pop_psi2";

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// One row per recorded time; values printed in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.t, r.trace, r.n_pump, r.n_stokes, r.fidelity_final, r.pop_psi1, r.pop_psi2
            );
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub trajectory: Trajectory,
    pub final_state: DensityMatrix,
}

/// Integrates the master equation from `initial` to `t_final`.
pub fn evolve(config: &SimConfig, initial: Initial) -> Result<Evolution> {
    evolve_observed(config, initial, |_, _| {})
}

/// Like [`evolve`], additionally handing `ρ(t)` to `observer` at every
/// recorded time.
pub fn evolve_observed(
    config: &SimConfig,
    initial: Initial,
    mut observer: impl FnMut(f64, &DensityMatrix),
) -> Result<Evolution> {
    let system = LambdaSystem::new(config)?;
    let d = system.dim();
    let max_dt = system.max_stable_dt();
    if config.dt > max_dt {
        return Err(Error::UnstableStep {
            dt: config.dt,
            radius: system.spectral_radius_bound(),
            suggested: max_dt,
        });
    }
    let rho0 = match initial {
        Initial::Default => initial_state(config)?.projector(),
        Initial::Pure(s) => {
            check_dim(d, s.space().total_dim())?;
            s.projector()
        }
        Initial::Mixed(r) => {
            check_dim(d, r.dim())?;
            r
        }
    };
    let mut rho: Vec<C64> = rho0.matrix().transpose().iter().copied().collect();
    let mut k1 = vec![C64::new(0.0, 0.0); d * d];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    let dt = config.dt;
    let steps = config.steps();
    let mut trajectory = Trajectory::default();
    let mut record = |step: usize, rho: &[C64], traj: &mut Trajectory| {
        let t = step as f64 * dt;
        traj.records.push(system.observe(t, rho));
        observer(t, &to_density(rho, d));
    };
    record(0, &rho, &mut trajectory);

    for step in 1..=steps {
        system.liouvillian(&rho, &mut k1);
        axpy_into(&mut tmp, &rho, &k1, dt / 2.0);
        system.liouvillian(&tmp, &mut k2);
        axpy_into(&mut tmp, &rho, &k2, dt / 2.0);
        system.liouvillian(&tmp, &mut k3);
        axpy_into(&mut tmp, &rho, &k3, dt);
        system.liouvillian(&tmp, &mut k4);
        let w = dt / 6.0;
        for i in 0..d * d {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        hermitize(&mut rho, d);

        let trace: f64 = (0..d).map(|i| rho[i * d + i].re).sum();
        let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
        let drift = (trace - 1.0).abs();
        if !(drift <= TRACE_DRIFT_LIMIT) || !(purity <= 1.0 + TRACE_DRIFT_LIMIT) {
            return Err(Error::TraceDrift {
                step,
                time: step as f64 * dt,
                drift: if drift.is_finite() { drift.max(purity - 1.0) } else { f64::INFINITY },
                dt,
                suggested: (dt / 10.0).min(max_dt),
            });
        }
        if step % config.output_stride == 0 || step == steps {
            record(step, &rho, &mut trajectory);
        }
    }
    Ok(Evolution {
        trajectory,
        final_state: to_density(&rho, d),
    })
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn axpy_into(out: &mut [C64], base: &[C64], dir: &[C64], h: f64) {
    for ((o, b), k) in out.iter_mut().zip(base).zip(dir) {
        *o = b + k * h;
    }
}

fn hermitize(rho: &mut [C64], d: usize) {
    for i in 0..d {
        rho[i * d + i].im = 0.0;
        for j in i + 1..d {
            let avg = (rho[i * d + j] + rho[j * d + i].conj()) * 0.5;
            rho[i * d + j] = avg;
            rho[j * d + i] = avg.conj();
        }
    }
}

fn to_density(rho: &[C64], d: usize) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(DMatrix::from_row_slice(d, d, rho))
}

/// `⟨ψ_fin|ρ|ψ_fin⟩`; two atoms only.
pub fn fidelity_final(rho: &DensityMatrix, config: &SimConfig) -> Result<f64> {
    let target = final_state(config)?;
    rho.overlap(target.amplitudes())
}

/// Atomic state conditioned on an empty cavity and both atoms in levels
/// {1, 3}, relabelled as a two-qubit state (level 1 → `|+⟩`, level 3 → `|−⟩`).
#[derive(Clone, Debug)]
pub struct AtomicState {
    pub rho: DensityMatrix,
    /// Probability of the conditioning event.
    pub population: f64,
}

impl AtomicState {
    pub fn principal_state(&self) -> Result<StateVector> {
        self.rho.principal_state(CompositeSpace::new(vec![2, 2])?)
    }
}

pub fn atomic_conditional_state(rho: &DensityMatrix, config: &SimConfig) -> Result<AtomicState> {
    if config.atoms != 2 {
        return Err(Error::InvalidParameter(format!(
            "conditioning is defined for two atoms, config has {}",
            config.atoms
        )));
    }
    let space = build_space(config)?;
    check_dim(space.total_dim(), rho.dim())?;
    let levels = [0usize, 2];
    let slots: Vec<usize> = levels
        .iter()
        .flat_map(|&l1| levels.iter().map(move |&l2| (l1, l2)))
        .map(|(l1, l2)| space.index(&[l1, l2, 0, 0]))
        .collect();
    let m = rho.matrix();
    let sub = DMatrix::from_fn(4, 4, |i, j| m[(slots[i], slots[j])]);
    let population = sub.trace().re;
    if !(population >= MIN_SECTOR_POPULATION) {
        return Err(Error::EmptySector(population));
    }
    Ok(AtomicState {
        rho: DensityMatrix::from_matrix_unchecked(sub.unscale(population)),
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{epr, Sign};
    use crate::certify::certify_generators;
    use crate::generators::pauli_set;
    use crate::tensor::hermiticity_defect;
    use approx::assert_abs_diff_eq;

    fn quick(cfg: SimConfig) -> SimConfig {
        SimConfig { t_final: 5.0, dt: 1e-2, output_stride: 50, ..cfg }
    }

    #[test]
    fn space_sizes() {
        let dim = |a, np, ns| {
            build_space(&SimConfig { atoms: a, pump_cutoff: np, stokes_cutoff: ns, ..Default::default() })
                .map(|s| s.total_dim())
        };
        assert_eq!(dim(2, 1, 1).unwrap(), 36);
        assert_eq!(dim(1, 1, 1).unwrap(), 12);
        assert_eq!(dim(4, 2, 2).unwrap(), 729);
        assert!(dim(7, 2, 2).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let bad = [
            SimConfig { atoms: 0, ..Default::default() },
            SimConfig { pump_cutoff: 0, ..Default::default() },
            SimConfig { kappa: -1.0, ..Default::default() },
            SimConfig { dt: 0.0, ..Default::default() },
            SimConfig { omega_13: 12.0, ..Default::default() },
            SimConfig { output_stride: 0, ..Default::default() },
            SimConfig { g_p: f64::NAN, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn config_json_fields() {
        let text = r#"{"atoms":2,"pump_cutoff":1,"stokes_cutoff":1,"omega_p":10,"omega_s":7,
            "omega_12":10,"omega_13":3,"g_p":0.1,"g_s":0.1,"kappa":0.1,"t_final":200,
            "dt":0.001,"output_stride":1000}"#;
        assert_eq!(SimConfig::from_json(text).unwrap(), SimConfig::default());
        assert!(SimConfig::from_json(r#"{"atomz":2}"#).is_err());
        let partial = SimConfig::from_json(r#"{"g_p":0,"g_s":0}"#).unwrap();
        assert_eq!(partial.g_p, 0.0);
        assert_eq!(partial.kappa, 0.1);
        let lit = SimConfig::from_json(r#"{"stokes_coupling":"literal"}"#).unwrap();
        assert_eq!(lit.stokes_coupling, StokesCoupling::Literal);
    }

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_excitations() {
        for coupling in [StokesCoupling::Emission, StokesCoupling::Literal] {
            for (a, np, ns) in [(2, 1, 1), (2, 2, 2), (3, 1, 2)] {
                let cfg = SimConfig {
                    atoms: a,
                    pump_cutoff: np,
                    stokes_cutoff: ns,
                    stokes_coupling: coupling,
                    ..Default::default()
                };
                let sys = LambdaSystem::new(&cfg).unwrap();
                let h = sys.hamiltonian();
                assert!(hermiticity_defect(&h) <= 1e-12);
                for n in [sys.n1(), sys.n2()] {
                    let nm = DMatrix::from_diagonal(&DVector::from_iterator(
                        n.len(),
                        n.iter().map(|&x| C64::new(x, 0.0)),
                    ));
                    let comm = &h * &nm - &nm * &h;
                    assert!(comm.norm() <= 1e-12, "{coupling:?} {a} {np} {ns}");
                }
            }
        }
    }

    #[test]
    fn emission_and_literal_couplings_differ() {
        let e = build_hamiltonian(&SimConfig::default()).unwrap();
        let l = build_hamiltonian(&SimConfig {
            stokes_coupling: StokesCoupling::Literal,
            ..Default::default()
        })
        .unwrap();
        let space = build_space(&SimConfig::default()).unwrap();
        let from = space.index(&[1, 0, 0, 0]);
        assert_abs_diff_eq!(e[(space.index(&[2, 0, 0, 1]), from)].re, 0.1);
        assert_eq!(l[(space.index(&[2, 0, 0, 1]), from)].re, 0.0);
        let from = space.index(&[1, 0, 0, 1]);
        assert_abs_diff_eq!(l[(space.index(&[2, 0, 0, 0]), from)].re, 0.1);
    }

    #[test]
    fn liouvillian_matches_dense_form() {
        let cfg = SimConfig { kappa: 0.37, ..Default::default() };
        let sys = LambdaSystem::new(&cfg).unwrap();
        let d = sys.dim();
        let h = sys.hamiltonian();
        let a = sys.stokes_lowering();
        let n = a.adjoint() * &a;
        let rho = DMatrix::from_fn(d, d, |i, j| C64::new((i * 7 + j) as f64 % 5.0, (i as f64 - j as f64) * 0.1));
        let i = C64::new(0.0, 1.0);
        let want = (&h * &rho - &rho * &h) * -i
            + (&a * &rho * a.adjoint() * C64::new(2.0, 0.0) - &n * &rho - &rho * &n) * C64::new(cfg.kappa, 0.0);
        let flat: Vec<C64> = rho.transpose().iter().copied().collect();
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        sys.liouvillian(&flat, &mut out);
        let got = DMatrix::from_row_slice(d, d, &out);
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn target_states() {
        let cfg = SimConfig::default();
        let fin = final_state(&cfg).unwrap();
        let init = initial_state(&cfg).unwrap();
        assert_eq!(fin.inner(&init).unwrap().norm(), 0.0);
        assert_abs_diff_eq!(fidelity_final(&fin.projector(), &cfg).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(fidelity_final(&init.projector(), &cfg).unwrap(), 0.0);
        let mix = DensityMatrix::new((fin.projector().into_matrix() + init.projector().into_matrix()).scale(0.5)).unwrap();
        assert_abs_diff_eq!(fidelity_final(&mix, &cfg).unwrap(), 0.5, epsilon = 1e-15);
        let three = SimConfig { atoms: 3, ..Default::default() };
        assert!(fidelity_final(&DensityMatrix::maximally_mixed(108), &three).is_err());
        assert_eq!(initial_state(&three).unwrap().amplitude(&[0, 0, 0, 1, 0]).re, 1.0);
    }

    #[test]
    fn conditional_state_of_targets() {
        let cfg = SimConfig::default();
        let fin = final_state(&cfg).unwrap();
        let at = atomic_conditional_state(&fin.projector(), &cfg).unwrap();
        assert_abs_diff_eq!(at.population, 1.0, epsilon = 1e-15);
        let psi = at.principal_state().unwrap();
        assert_abs_diff_eq!(psi.fidelity(&epr(Sign::Plus)).unwrap(), 1.0, epsilon = 1e-12);
        let rep = certify_generators(&psi, &[pauli_set(), pauli_set()], 1e-10).unwrap();
        assert!(rep.residual < 1e-20);

        let init = initial_state(&cfg).unwrap();
        assert!(matches!(
            atomic_conditional_state(&init.projector(), &cfg),
            Err(Error::EmptySector(p)) if p == 0.0
        ));
    }

    #[test]
    fn zero_coupling_is_stationary() {
        let cfg = quick(SimConfig { g_p: 0.0, g_s: 0.0, ..Default::default() });
        let ev = evolve(&cfg, Initial::Default).unwrap();
        for r in &ev.trajectory.records {
            assert_eq!(r.fidelity_final, 0.0);
            assert_abs_diff_eq!(r.n_pump, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(r.trace, 1.0, epsilon = 1e-14);
        }
        let init = initial_state(&cfg).unwrap();
        assert_abs_diff_eq!(ev.final_state.overlap(init.amplitudes()).unwrap(), 1.0, epsilon = 1e-12);
    }

    /// `exp(−iHt) ψ` by exact diagonalization.
    fn exact_evolution(h: &DMatrix<C64>, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let eig = h.clone().symmetric_eigen();
        let v = &eig.eigenvectors;
        let mut coeffs = v.adjoint() * psi;
        for (c, e) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        v * coeffs
    }

    #[test]
    fn closed_evolution_matches_exact_diagonalization() {
        let cfg = SimConfig { kappa: 0.0, g_p: 0.3, g_s: 0.2, t_final: 12.0, dt: 2e-3, output_stride: 3000, ..Default::default() };
        let sys = LambdaSystem::new(&cfg).unwrap();
        let init = initial_state(&cfg).unwrap();
        let mut times = Vec::new();
        let mut worst = 0.0f64;
        evolve_observed(&cfg, Initial::Default, |t, rho| {
            let psi = exact_evolution(&sys.hamiltonian(), init.amplitudes(), t);
            let exact = &psi * psi.adjoint();
            worst = worst.max((rho.matrix() - exact).norm());
            times.push(t);
        })
        .unwrap();
        assert_eq!(times.len(), 3);
        assert!(worst < 1e-9, "{worst:e}");
    }

    #[test]
    fn pump_rabi_oscillation() {
        // Without the Stokes coupling the pump photon is shared by the
        // symmetric single excitation: P(initial) = cos²(√2 g t).
        let g = 0.1;
        let cfg = SimConfig { g_p: g, g_s: 0.0, kappa: 0.0, t_final: 20.0, dt: 1e-3, output_stride: 1000, ..Default::default() };
        let init = initial_state(&cfg).unwrap();
        let mut worst = 0.0f64;
        evolve_observed(&cfg, Initial::Default, |t, rho| {
            let want = (2f64.sqrt() * g * t).cos().powi(2);
            worst = worst.max((rho.overlap(init.amplitudes()).unwrap() - want).abs());
        })
        .unwrap();
        assert!(worst < 1e-10, "{worst:e}");
    }

    #[test]
    fn recording_schedule() {
        let cfg = SimConfig { t_final: 1.05, dt: 0.01, output_stride: 50, ..Default::default() };
        let ev = evolve(&cfg, Initial::Default).unwrap();
        let times = ev.trajectory.times();
        assert_eq!(times.len(), 4);
        assert_abs_diff_eq!(times[3], 1.05, epsilon = 1e-12);
        let csv = ev.trajectory.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), Trajectory::CSV_HEADER);
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let cfg = SimConfig { dt: 1.0, ..Default::default() };
        assert!(matches!(evolve(&cfg, Initial::Default), Err(Error::UnstableStep { .. })));
    }

    #[test]
    fn initial_dimension_checked() {
        let cfg = quick(SimConfig::default());
        let wrong = epr(Sign::Plus);
        assert!(matches!(
            evolve(&cfg, Initial::Pure(wrong)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
