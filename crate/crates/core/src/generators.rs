//! Hermitian generator families for the local symmetry algebras and their
//! embedding into the composite space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::tensor::{hermiticity_defect, CompositeSpace};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// σˣ, σʸ, σᶻ.
    Pauli,
    /// Spin projections Sₓ, S_y, S_z for spin `twice_s / 2`.
    Spin { twice_s: u32 },
    /// Generalized Gell-Mann basis of su(n), `Tr(gᵢgⱼ) = 2δᵢⱼ`.
    SuN,
}

impl GeneratorKind {
    /// Whether the set spans the full traceless Hermitian space of its factor.
    pub fn is_complete(&self, local_dim: usize) -> bool {
        match self {
            GeneratorKind::Pauli | GeneratorKind::SuN => true,
            GeneratorKind::Spin { .. } => local_dim == 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    local_dim: usize,
    kind: GeneratorKind,
    labels: Vec<String>,
    matrices: Vec<DMatrix<C64>>,
}

impl GeneratorSet {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn is_complete(&self) -> bool {
        self.kind.is_complete(self.local_dim)
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &DMatrix<C64>)> {
        self.labels.iter().map(String::as_str).zip(&self.matrices)
    }

    /// Conjugates every member by `u`: `g ↦ u g u†`.
    pub fn rotated(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.local_dim || u.ncols() != self.local_dim {
            return Err(Error::DimensionMismatch {
                expected: self.local_dim,
                found: u.nrows(),
            });
        }
        let ud = u.adjoint();
        Ok(Self {
            matrices: self.matrices.iter().map(|g| u * g * &ud).collect(),
            ..self.clone()
        })
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrices with `|+⟩ → 0`, `|−⟩ → 1`.
pub fn pauli_set() -> GeneratorSet {
    let o = c(0., 0.);
    let sx = DMatrix::from_row_slice(2, 2, &[o, c(1., 0.), c(1., 0.), o]);
    let sy = DMatrix::from_row_slice(2, 2, &[o, c(0., -1.), c(0., 1.), o]);
    let sz = DMatrix::from_row_slice(2, 2, &[c(1., 0.), o, o, c(-1., 0.)]);
    GeneratorSet {
        local_dim: 2,
        kind: GeneratorKind::Pauli,
        labels: vec!["sigma_x".into(), "sigma_y".into(), "sigma_z".into()],
        matrices: vec![sx, sy, sz],
    }
}

/// Spin matrices for spin `s` (so `2s` must be a positive integer), built from
/// the ladder operators. Index `k` holds projection `m = s − k`.
pub fn spin_set(s: f64) -> Result<GeneratorSet> {
    let twice = 2.0 * s;
    if !(twice >= 1.0) || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "spin {s} is not a positive half-integer"
        )));
    }
    Ok(spin_set_twice(twice.round() as u32))
}

pub(crate) fn spin_set_twice(twice_s: u32) -> GeneratorSet {
    let n = twice_s as usize + 1;
    let s = twice_s as f64 / 2.0;
    let m = |k: usize| s - k as f64;
    let mut raise = DMatrix::<C64>::zeros(n, n);
    for k in 1..n {
        raise[(k - 1, k)] = c((s * (s + 1.0) - m(k) * (m(k) + 1.0)).sqrt(), 0.);
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower).scale(0.5);
    let sy = (&raise - &lower) * c(0., -0.5);
    let sz = DMatrix::from_diagonal(&DVector::from_fn(n, |k, _| c(m(k), 0.)));
    GeneratorSet {
        local_dim: n,
        kind: GeneratorKind::Spin { twice_s },
        labels: vec!["S_x".into(), "S_y".into(), "S_z".into()],
        matrices: vec![sx, sy, sz],
    }
}

/// Generalized Gell-Mann basis: symmetric and antisymmetric off-diagonal pairs
/// followed by `n − 1` diagonal members, all with `Tr(gᵢgⱼ) = 2δᵢⱼ`. For
/// `n = 2` this is exactly σˣ, σʸ, σᶻ.
pub fn su_n_set(n: usize) -> Result<GeneratorSet> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("su(n) needs n >= 2, got {n}")));
    }
    let mut labels = Vec::with_capacity(n * n - 1);
    let mut matrices = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            let mut sym = DMatrix::zeros(n, n);
            sym[(j, k)] = c(1., 0.);
            sym[(k, j)] = c(1., 0.);
            labels.push(format!("sym({j},{k})"));
            matrices.push(sym);

            let mut asym = DMatrix::zeros(n, n);
            asym[(j, k)] = c(0., -1.);
            asym[(k, j)] = c(0., 1.);
            labels.push(format!("asym({j},{k})"));
            matrices.push(asym);
        }
    }
    for l in 1..n {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let diag = DVector::from_fn(n, |i, _| match i.cmp(&l) {
            std::cmp::Ordering::Less => c(scale, 0.),
            std::cmp::Ordering::Equal => c(-(l as f64) * scale, 0.),
            std::cmp::Ordering::Greater => c(0., 0.),
        });
        labels.push(format!("diag({l})"));
        matrices.push(DMatrix::from_diagonal(&diag));
    }
    Ok(GeneratorSet {
        local_dim: n,
        kind: GeneratorKind::SuN,
        labels,
        matrices,
    })
}

/// Which family to place on every factor of a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorChoice {
    /// Pauli on every factor; only valid for qubits.
    Pauli,
    /// Spin `(n − 1)/2` projections on a factor of dimension `n`.
    Spin,
    /// Full su(n) on every factor.
    SuN,
    /// Pauli on qubits, spin projections elsewhere.
    Auto,
}

impl std::str::FromStr for GeneratorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pauli" => Ok(Self::Pauli),
            "spin" => Ok(Self::Spin),
            "sun" | "su_n" | "su(n)" => Ok(Self::SuN),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidParameter(format!(
                "unknown generator family `{other}` (expected pauli, spin, sun or auto)"
            ))),
        }
    }
}

/// One generator set per factor of `space`.
pub fn sets_for(space: &CompositeSpace, choice: GeneratorChoice) -> Result<Vec<GeneratorSet>> {
    space
        .dims()
        .iter()
        .map(|&n| match (choice, n) {
            (GeneratorChoice::Pauli, 2) | (GeneratorChoice::Auto, 2) => Ok(pauli_set()),
            (GeneratorChoice::Pauli, n) => Err(Error::InvalidParameter(format!(
                "Pauli generators need qubit factors, found dimension {n}"
            ))),
            (GeneratorChoice::Spin, n) | (GeneratorChoice::Auto, n) => {
                Ok(spin_set_twice(n as u32 - 1))
            }
            (GeneratorChoice::SuN, n) => su_n_set(n),
        })
        .collect()
}

/// `1 ⊗ … ⊗ g ⊗ … ⊗ 1` with `g` on factor `ell`.
pub fn embed(g: &DMatrix<C64>, ell: usize, space: &CompositeSpace) -> Result<DMatrix<C64>> {
    space.check_factor(ell)?;
    let n = space.dims()[ell];
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.nrows(),
        });
    }
    let left: usize = space.dims()[..ell].iter().product();
    let right = space.stride(ell);
    let full = DMatrix::<C64>::identity(left, left)
        .kronecker(g)
        .kronecker(&DMatrix::<C64>::identity(right, right));
    Ok(full)
}

/// `embed(g, ell) · ψ` without forming the full operator.
pub fn apply_local(
    g: &DMatrix<C64>,
    ell: usize,
    space: &CompositeSpace,
    psi: &DVector<C64>,
) -> Result<DVector<C64>> {
    space.check_factor(ell)?;
    let n = space.dims()[ell];
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.nrows(),
        });
    }
    if psi.len() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            found: psi.len(),
        });
    }
    let stride = space.stride(ell);
    let block = n * stride;
    let mut out = DVector::zeros(psi.len());
    for base in (0..psi.len()).step_by(block) {
        for inner in 0..stride {
            let off = base + inner;
            for a in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..n {
                    acc += g[(a, b)] * psi[off + b * stride];
                }
                out[off + a * stride] = acc;
            }
        }
    }
    Ok(out)
}

/// Largest entrywise deviation from Hermiticity and the absolute trace.
pub fn defects(g: &DMatrix<C64>) -> (f64, f64) {
    (hermiticity_defect(g), g.trace().norm())
}
