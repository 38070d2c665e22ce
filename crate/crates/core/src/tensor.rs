//! Pure states and density matrices on a tensor product of finite factors.
//!
//! Amplitudes are stored row-major over the factor indices: the leftmost
//! factor varies slowest. For qubits local index 0 is `|+⟩` and 1 is `|−⟩`;
//! for spin-1 factors 0, 1, 2 are `|+⟩`, `|0⟩`, `|−⟩`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Normalization tolerance applied to every constructed state.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Allowed negative eigenvalue before a matrix is rejected as a state.
pub const NEGATIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompositeSpace {
    dims: Vec<usize>,
    total: usize,
}

impl CompositeSpace {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::InvalidDims("no factors".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDims(format!(
                "factor dimension {d} is below 2"
            )));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidDims("total dimension overflows".into()))?;
        Ok(Self { dims, total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn check_factor(&self, ell: usize) -> Result<()> {
        if ell < self.dims.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: ell,
                factors: self.dims.len(),
            })
        }
    }

    /// Distance in the flat index between consecutive values of factor `ell`.
    pub fn stride(&self, ell: usize) -> usize {
        self.dims[ell + 1..].iter().product()
    }

    /// Flat index of a multi-index.
    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        multi
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % n;
            flat /= n;
        }
        out
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: CompositeSpace,
    amps: DVector<C64>,
}

/// Builds a normalized state from raw amplitudes; see [`StateVector::new`].
pub fn make_state(dims: &[usize], amplitudes: Vec<C64>) -> Result<StateVector> {
    StateVector::new(CompositeSpace::new(dims.to_vec())?, amplitudes)
}

impl StateVector {
    /// Divides `amplitudes` by their norm; vectors already of unit norm to
    /// rounding are kept bit-for-bit. Rejects length mismatches and the zero
    /// vector.
    pub fn new(space: CompositeSpace, amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(space, DVector::from_vec(amplitudes))
    }

    pub fn from_vector(space: CompositeSpace, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: amps.len(),
            });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let amps = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            amps
        } else {
            amps.unscale(norm)
        };
        Ok(Self { space, amps })
    }

    /// The product basis state with the given local indices.
    pub fn basis(space: CompositeSpace, multi: &[usize]) -> Result<Self> {
        if multi.len() != space.num_factors() {
            return Err(Error::DimensionMismatch {
                expected: space.num_factors(),
                found: multi.len(),
            });
        }
        for (ell, (&i, &n)) in multi.iter().zip(space.dims()).enumerate() {
            if i >= n {
                return Err(Error::InvalidParameter(format!(
                    "local index {i} out of range for factor {ell} of dimension {n}"
                )));
            }
        }
        let mut amps = DVector::zeros(space.total_dim());
        amps[space.index(multi)] = C64::new(1.0, 0.0);
        Ok(Self { space, amps })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn dims(&self) -> &[usize] {
        self.space.dims()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, multi: &[usize]) -> C64 {
        self.amps[self.space.index(multi)]
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.total_dim(),
                found: other.space.total_dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn slices(&self, direction: usize) -> Result<SliceFamily> {
        slices(self, direction)
    }

    pub fn partial_trace(&self, keep: usize) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// One reduced density matrix per factor.
    pub fn reduced_states(&self) -> Vec<DensityMatrix> {
        (0..self.space.num_factors())
            .map(|k| partial_trace(self, k).expect("factor index in range"))
            .collect()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            m: &self.amps * self.amps.adjoint(),
        }
    }

    pub fn to_file(&self) -> StateFile {
        StateFile {
            dims: self.space.dims().to_vec(),
            amplitudes: self.amps.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("state file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        file.into_state()
    }
}

/// On-disk form of a state: `{"dims":[…], "amplitudes":[[re,im],…]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn into_state(self) -> Result<StateVector> {
        let space = CompositeSpace::new(self.dims)?;
        if self.amplitudes.len() != space.total_dim() {
            return Err(Error::Format(format!(
                "{} amplitudes given for total dimension {}",
                self.amplitudes.len(),
                space.total_dim()
            )));
        }
        let amps = self
            .amplitudes
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        StateVector::new(space, amps)
    }
}

/// The parallel slices of a coefficient tensor along one factor.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceFamily {
    pub direction: usize,
    pub slices: Vec<DVector<C64>>,
}

impl SliceFamily {
    /// Inverse of [`slices`]: writes every slice back into a flat amplitude
    /// vector over `space`.
    pub fn reassemble(&self, space: &CompositeSpace) -> Result<DVector<C64>> {
        space.check_factor(self.direction)?;
        let n = space.dims()[self.direction];
        if self.slices.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.slices.len(),
            });
        }
        let stride = space.stride(self.direction);
        let outer = space.total_dim() / (n * stride);
        let mut out = DVector::zeros(space.total_dim());
        for (a, slice) in self.slices.iter().enumerate() {
            if slice.len() != outer * stride {
                return Err(Error::DimensionMismatch {
                    expected: outer * stride,
                    found: slice.len(),
                });
            }
            for o in 0..outer {
                for i in 0..stride {
                    out[o * n * stride + a * stride + i] = slice[o * stride + i];
                }
            }
        }
        Ok(out)
    }
}

/// Slice `a` fixes the index of factor `direction` to `a` and flattens the
/// remaining factors row-major.
pub fn slices(state: &StateVector, direction: usize) -> Result<SliceFamily> {
    let space = state.space();
    space.check_factor(direction)?;
    let n = space.dims()[direction];
    let stride = space.stride(direction);
    let outer = space.total_dim() / (n * stride);
    let slices = (0..n)
        .map(|a| {
            DVector::from_iterator(
                outer * stride,
                (0..outer).flat_map(|o| {
                    let base = o * n * stride + a * stride;
                    state.amps.rows(base, stride).iter().copied().collect::<Vec<_>>()
                }),
            )
        })
        .collect();
    Ok(SliceFamily { direction, slices })
}

/// Reduced state of factor `keep`: `ρ[a][b] = ⟨slice_b|slice_a⟩`.
pub fn partial_trace(state: &StateVector, keep: usize) -> Result<DensityMatrix> {
    let fam = slices(state, keep)?;
    let n = fam.slices.len();
    let m = DMatrix::from_fn(n, n, |a, b| fam.slices[b].dotc(&fam.slices[a]));
    Ok(DensityMatrix { m })
}

/// Hermitian, positive, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within the module
    /// tolerances.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "shape {}x{} is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let herm = hermiticity_defect(&m);
        if herm > DENSITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let rho = Self { m };
        let min = rho.min_eigenvalue();
        if min < -NEGATIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    /// Skips validation; for matrices that are density matrices by
    /// construction up to rounding.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Self { m }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n).unscale(n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.m.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvector of the largest eigenvalue, as a state on `space`.
    pub fn principal_state(&self, space: CompositeSpace) -> Result<StateVector> {
        if space.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: space.total_dim(),
            });
        }
        let eig = self.m.clone().symmetric_eigen();
        let k = eig.eigenvalues.imax();
        StateVector::from_vector(space, eig.eigenvectors.column(k).into_owned())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, psi: &DVector<C64>) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        Ok(psi.dotc(&(&self.m * psi)).re)
    }

    /// Frobenius distance to `identity / dim`.
    pub fn distance_from_maximally_mixed(&self) -> f64 {
        let n = self.dim();
        let shift = C64::new(1.0 / n as f64, 0.0);
        let mut d = self.m.clone();
        for i in 0..n {
            d[(i, i)] -= shift;
        }
        d.norm()
    }
}

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `−Σ p ln p` over the spectrum, in nats; eigenvalues are clipped to `[0, 1]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|&p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.m.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell() -> StateVector {
        make_state(&[2, 2], vec![c(FRAC_1_SQRT_2, 0.), c(0., 0.), c(0., 0.), c(FRAC_1_SQRT_2, 0.)]).unwrap()
    }

    fn eq12() -> StateVector {
        make_state(&[2, 2], vec![c(0.5, 0.), c(0., 0.5), c(0., 0.5), c(0.5, 0.)]).unwrap()
    }

    #[test]
    fn space_rejects_bad_dims() {
        assert!(CompositeSpace::new(vec![]).is_err());
        assert!(CompositeSpace::new(vec![2, 1]).is_err());
        assert!(CompositeSpace::new(vec![usize::MAX, 3]).is_err());
        let s = CompositeSpace::new(vec![2, 3, 4]).unwrap();
        assert_eq!(s.total_dim(), 24);
        assert_eq!(s.index(&[1, 2, 3]), 23);
        assert_eq!(s.multi_index(17), vec![1, 1, 1]);
    }

    #[test]
    fn make_state_normalizes() {
        let s = make_state(&[2, 2], vec![c(2., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert_eq!(s.amplitudes()[0], c(1., 0.));
        let plus = make_state(&[2], vec![c(1., 0.), c(0., 0.)]).unwrap();
        assert_abs_diff_eq!(plus.amplitudes().norm(), 1.0, epsilon = NORM_TOL);
        assert_abs_diff_eq!(bell().amplitudes().norm(), 1.0, epsilon = NORM_TOL);
    }

    #[test]
    fn make_state_errors() {
        assert!(matches!(
            make_state(&[2, 2], vec![c(1., 0.); 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
        assert!(matches!(make_state(&[2, 2], vec![c(0., 0.); 4]), Err(Error::ZeroVector)));
    }

    #[test]
    fn partial_trace_examples() {
        let rho = bell().partial_trace(0).unwrap();
        assert_abs_diff_eq!(rho.distance_from_maximally_mixed(), 0.0, epsilon = 1e-15);

        let pp = make_state(&[2, 2], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let rho = pp.partial_trace(1).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0);
        assert_abs_diff_eq!(rho.purity(), 1.0);

        let rho = eq12().partial_trace(0).unwrap();
        assert_abs_diff_eq!(rho.distance_from_maximally_mixed(), 0.0, epsilon = 1e-15);

        assert!(matches!(
            bell().partial_trace(2),
            Err(Error::IndexOutOfRange { index: 2, factors: 2 })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(DensityMatrix::maximally_mixed(2).entropy(), LN_2, epsilon = 1e-14);
        assert_abs_diff_eq!(
            DensityMatrix::maximally_mixed(3).entropy(),
            3f64.ln(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(bell().projector().entropy(), 0.0, epsilon = 1e-12);
        for k in 0..2 {
            assert_abs_diff_eq!(eq12().partial_trace(k).unwrap().entropy(), LN_2, epsilon = 1e-12);
        }
    }

    #[test]
    fn purity_examples() {
        assert_abs_diff_eq!(bell().projector().purity(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(DensityMatrix::maximally_mixed(2).purity(), 0.5);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.75, 0.), c(0.25, 0.)]));
        let rho = DensityMatrix::new(m).unwrap();
        assert_abs_diff_eq!(rho.purity(), 5.0 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.1, 0.), c(0.2, 0.), c(0.5, 0.)]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian(_))));
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5, 0.), c(-0.5, 0.)]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidDensityMatrix(_))));
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.), c(0.6, 0.)]));
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn slice_examples() {
        let fam = eq12().slices(0).unwrap();
        assert_eq!(fam.slices[0].as_slice(), &[c(0.5, 0.), c(0., 0.5)]);
        assert_eq!(fam.slices[1].as_slice(), &[c(0., 0.5), c(0.5, 0.)]);

        let pp = make_state(&[2, 2], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let fam = pp.slices(1).unwrap();
        assert_eq!(fam.slices[0].as_slice(), &[c(1., 0.), c(0., 0.)]);
        assert_eq!(fam.slices[1].as_slice(), &[c(0., 0.), c(0., 0.)]);

        let mut amps = vec![c(0., 0.); 8];
        amps[0] = c(1., 0.);
        amps[7] = c(1., 0.);
        let ghz = make_state(&[2, 2, 2], amps).unwrap();
        let fam = ghz.slices(0).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_abs_diff_eq!(fam.slices[0][0].re, h, epsilon = 1e-15);
        assert_eq!(fam.slices[0].rows(1, 3).iter().filter(|z| z.norm() > 0.0).count(), 0);
        assert_abs_diff_eq!(fam.slices[1][3].re, h, epsilon = 1e-15);
        assert_eq!(fam.slices[1].rows(0, 3).iter().filter(|z| z.norm() > 0.0).count(), 0);
    }

    #[test]
    fn middle_slice_layout() {
        // dims [2,3,2], direction 1: slice a collects (i, a, k) in (i, k) order.
        let amps: Vec<C64> = (0..12).map(|i| c(i as f64 + 1.0, 0.)).collect();
        let s = make_state(&[2, 3, 2], amps).unwrap();
        let fam = s.slices(1).unwrap();
        let n = s.amplitudes();
        let want = [n[2], n[3], n[8], n[9]];
        assert_eq!(fam.slices[1].as_slice(), &want);
        assert_eq!(fam.reassemble(s.space()).unwrap(), *n);
    }

    #[test]
    fn state_file_round_trip_and_rejection() {
        let s = eq12();
        let back = StateVector::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"dims":[2,2],"amplitudes":[[1,0],[0,0],[0,0]]}"#;
        assert!(matches!(StateVector::from_json(bad), Err(Error::Format(_))));
        let junk = r#"{"dims":[2,2],"amps":[]}"#;
        assert!(matches!(StateVector::from_json(junk), Err(Error::Json(_))));
    }

    #[test]
    fn principal_state_of_projector() {
        let rho = eq12().projector();
        let psi = rho.principal_state(CompositeSpace::new(vec![2, 2]).unwrap()).unwrap();
        assert_abs_diff_eq!(psi.fidelity(&eq12()).unwrap(), 1.0, epsilon = 1e-12);
    }
}
