//! Single-mode states and operators on the truncated Fock space `|0⟩ … |N⟩`.
//!
//! The heralded filters used by the loss-suppression protocol are all diagonal
//! in the Fock basis:
//!
//! * noiseless attenuation `|n⟩ → νⁿ|n⟩`, `0 < ν ≤ 1`;
//! * noiseless amplification normalized on the first `N+1` Fock states,
//!   `G_N(g) = g^{−N} Σ gⁿ |n⟩⟨n|`, so its largest entry is exactly one;
//! * phase shifts `e^{inφ}`.
//!
//! Dimensions are always explicit: nothing in this crate grows a truncation on
//! its own.

use std::f64::consts::TAU;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, HERMITIAN_TOL, PSD_FLOOR, TRACE_TOL};

/// Pure (possibly subnormalized) state of one bosonic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: DVector<Complex64>,
}

impl FockState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("a Fock state needs dim >= 1".into()));
        }
        let state = FockState {
            amplitudes: DVector::from_vec(amplitudes),
        };
        let norm = state.norm_squared();
        if !(norm > 0.0 && norm <= 1.0 + TRACE_TOL) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    /// `c0|0⟩ + c1|1⟩`, the vacuum/single-photon superposition.
    pub fn qubit(c0: Complex64, c1: Complex64) -> Result<Self> {
        Self::new(vec![c0, c1])
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: n + 1,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[n] = c(1.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalize(&self) -> Self {
        let n = self.norm_squared().sqrt();
        FockState {
            amplitudes: self.amplitudes.unscale(n),
        }
    }

    /// Projector `|ψ⟩⟨ψ|` (unnormalized if the state is).
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Linear operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
}

impl Operator {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidInput(
                "operator dimension must be >= 1".into(),
            ));
        }
        Ok(Operator { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    /// Operator that is exactly diagonal with the given entries.
    pub fn diagonal_filter(entries: &[Complex64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput(
                "operator dimension must be >= 1".into(),
            ));
        }
        Ok(Operator {
            matrix: DMatrix::from_diagonal(&DVector::from_column_slice(entries)),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Operator {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Operator {
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(Operator {
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    /// `A ⊗ I_ref`, with the operator acting on the first tensor factor.
    pub fn tensor_identity(&self, ref_dim: usize) -> Self {
        Operator {
            matrix: self.matrix.kronecker(&CMatrix::identity(ref_dim, ref_dim)),
        }
    }

    /// Restriction to the span of `|0⟩ … |dim−1⟩`.
    pub fn leading_block(&self, dim: usize) -> Result<Self> {
        if dim == 0 || dim > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(Operator {
            matrix: self.matrix.view((0, 0), (dim, dim)).into_owned(),
        })
    }
}

impl Mul for &Operator {
    type Output = Operator;

    /// Panics on a dimension mismatch; use [`Operator::compose`] to get an error instead.
    fn mul(self, rhs: &Operator) -> Operator {
        self.compose(rhs).expect("operator dimensions must match")
    }
}

/// Possibly unnormalized single-mode (or joint) density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and `0 < Tr ≤ 1`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let rho = DensityMatrix { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "shape {}x{} is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let min_ev = linalg::hermitian_eigenvalues(m)[0];
        if min_ev < PSD_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        let tr = self.trace();
        if !(tr > 0.0 && tr <= 1.0 + TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} outside (0, 1]")));
        }
        Ok(())
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let entries: Vec<Complex64> = probabilities.iter().map(|&p| c(p)).collect();
        Self::new(DMatrix::from_diagonal(&DVector::from_vec(entries)))
    }

    pub fn pure(state: &FockState) -> Self {
        state.density()
    }

    /// Random full-rank state `W W† / Tr(W W†)` with a complex Ginibre `W`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let w = CMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        });
        let m = &w * w.adjoint();
        let tr = linalg::real_trace(&m);
        DensityMatrix {
            matrix: linalg::hermitian_part(&m).unscale(tr),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        linalg::real_trace(&self.matrix)
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= TRACE_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::ZeroSuccess { probability: tr });
        }
        Ok(DensityMatrix {
            matrix: self.matrix.unscale(tr),
        })
    }

    pub fn population(&self, n: usize) -> f64 {
        self.matrix[(n, n)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix)[0]
    }

    /// `⟨ψ|ρ|ψ⟩` for a pure reference state.
    pub fn overlap(&self, state: &FockState) -> Result<f64> {
        check_dim(self.dim(), state.dim())?;
        Ok(linalg::expectation(&self.matrix, state.amplitudes()))
    }

    /// Zeroes every Fock-basis coherence.
    pub fn dephased(&self) -> Self {
        DensityMatrix {
            matrix: DMatrix::from_diagonal(&self.matrix.diagonal()),
        }
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        DensityMatrix {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Noiseless attenuation `diag(ν⁰, ν¹, …, ν^{dim−1})`.
pub fn attenuator_filter(nu: f64, dim: usize) -> Result<Operator> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::domain("nu", nu, "0 < nu <= 1"));
    }
    if dim < 1 {
        return Err(Error::InvalidInput("dim must be >= 1".into()));
    }
    let entries: Vec<Complex64> = (0..dim).map(|n| c(nu.powi(n as i32))).collect();
    Operator::diagonal_filter(&entries)
}

/// Normalized noiseless amplifier `G_N(g) = diag(g^{−N}, g^{1−N}, …, 1)` on `N+1` levels.
pub fn amplifier_filter(g: f64, n_max: usize) -> Result<Operator> {
    if !(g >= 1.0 && g.is_finite()) {
        return Err(Error::domain("g", g, "finite g >= 1"));
    }
    let top = n_max as i32;
    let entries: Vec<Complex64> = (0..=top).map(|n| c(g.powi(n - top))).collect();
    Operator::diagonal_filter(&entries)
}

/// Phase shift `diag(e^{i·nφ})`.
pub fn phase_shift(phi: f64, dim: usize) -> Result<Operator> {
    if dim < 1 {
        return Err(Error::InvalidInput("dim must be >= 1".into()));
    }
    let entries: Vec<Complex64> = (0..dim)
        .map(|n| Complex64::from_polar(1.0, (n as f64 * phi).rem_euclid(TAU)))
        .collect();
    Operator::diagonal_filter(&entries)
}

/// `(F ρ F†, Tr[F ρ F†])`: the conditional output and its heralding probability.
pub fn apply_filter(op: &Operator, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    check_dim(op.dim(), rho.dim())?;
    let out = op.matrix() * rho.matrix() * op.matrix().adjoint();
    let out = DensityMatrix::from_matrix_unchecked(out);
    let p = out.trace();
    Ok((out, p))
}

/// Serializable complex scalar, `{ "re": …, "im": … }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for Complex64 {
    fn from(z: ComplexValue) -> Self {
        Complex64::new(z.re, z.im)
    }
}
