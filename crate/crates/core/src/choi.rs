//! Choi matrices of single-rail qubit channels.
//!
//! The probe is one photon shared between a channel mode `V` and a reference
//! mode `H`, `|Ψ+⟩ = (|1⟩_V|0⟩_H + |0⟩_V|1⟩_H)/√2`. Passing `V` through a
//! passive channel (possibly with Fock-diagonal filters) never creates
//! photons, so the output lives on the ordered basis
//!
//! | index | label | meaning                         |
//! |-------|-------|---------------------------------|
//! | 0     | `00`  | photon lost                     |
//! | 1     | `10`  | photon in the channel mode `V`  |
//! | 2     | `01`  | photon in the reference mode `H`|
//!
//! Labels are written `nV nH`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::fock::{check_dim, DensityMatrix, FockState};
use crate::linalg::{self, c, CMatrix, HERMITIAN_TOL, PSD_FLOOR, TRACE_TOL};

pub const CHOI_BASIS: [&str; 3] = ["00", "10", "01"];

/// Success probabilities below this are treated as zero.
pub const MIN_SUCCESS: f64 = 1e-15;

/// Index of each two-mode Fock state `|nV nH⟩` in a `V ⊗ H` product space of qubit modes.
const JOINT_INDEX: [usize; 3] = [0, 2, 1];
const JOINT_DOUBLE: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    entries: CMatrix,
    normalized: bool,
}

impl ChoiMatrix {
    /// Validates a 3×3 Hermitian PSD matrix; `normalized` is set when its trace is one.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.shape() != (3, 3) {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: entries.nrows(),
            });
        }
        let herm = linalg::hermiticity_error(&entries);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "Choi matrix not Hermitian ({herm:e})"
            )));
        }
        let min_ev = linalg::hermitian_eigenvalues(&entries)[0];
        if min_ev < PSD_FLOOR {
            return Err(Error::InvalidState(format!(
                "Choi matrix has eigenvalue {min_ev:e}"
            )));
        }
        let tr = linalg::real_trace(&entries);
        if !(tr > 0.0 && tr <= 1.0 + TRACE_TOL) {
            return Err(Error::InvalidState(format!(
                "Choi trace {tr} outside (0, 1]"
            )));
        }
        Ok(Self::from_entries_unchecked(entries))
    }

    pub(crate) fn from_entries_unchecked(entries: CMatrix) -> Self {
        let normalized = (linalg::real_trace(&entries) - 1.0).abs() <= TRACE_TOL;
        ChoiMatrix {
            entries,
            normalized,
        }
    }

    /// Choi state of the identity channel, `|Ψ+⟩⟨Ψ+|`.
    pub fn identity() -> Self {
        let v = psi_plus();
        Self::from_entries_unchecked(&v * v.adjoint())
    }

    /// Projects a two-mode state on `V ⊗ H` (both truncated at one photon) onto the Choi basis.
    pub fn from_joint_state(rho: &DensityMatrix) -> Result<Self> {
        check_dim(4, rho.dim())?;
        let double = rho.population(JOINT_DOUBLE);
        if double.abs() > HERMITIAN_TOL {
            return Err(Error::ChoiSupport(format!("|11> population {double:e}")));
        }
        let entries = CMatrix::from_fn(3, 3, |r, col| rho.entry(JOINT_INDEX[r], JOINT_INDEX[col]));
        Ok(Self::from_entries_unchecked(entries))
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        linalg::real_trace(&self.entries)
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr < MIN_SUCCESS {
            return Err(Error::ZeroSuccess { probability: tr });
        }
        Ok(ChoiMatrix {
            entries: self.entries.unscale(tr),
            normalized: true,
        })
    }

    /// `⟨00|χ|00⟩`, the weight of the lost-photon outcome.
    pub fn vacuum_weight(&self) -> f64 {
        self.entries[(0, 0)].re
    }

    /// `⟨01|χ|10⟩`.
    pub fn coherence(&self) -> Complex64 {
        self.entries[(2, 1)]
    }

    /// Applies `e^{inφ}` on the channel mode so that `⟨01|χ|10⟩` is real and nonnegative.
    pub fn with_real_coherence(&self) -> Self {
        let phi = self.coherence().arg();
        let u = CMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0),
            Complex64::from_polar(1.0, -phi),
            c(1.0),
        ]));
        ChoiMatrix {
            entries: u.adjoint() * &self.entries * u,
            normalized: self.normalized,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.entries)[0]
    }

    /// Uhlmann fidelity between two normalized Choi matrices.
    pub fn state_fidelity(&self, other: &ChoiMatrix) -> f64 {
        linalg::uhlmann_fidelity(&self.entries, &other.entries)
    }

    pub fn trace_distance(&self, other: &ChoiMatrix) -> f64 {
        linalg::trace_distance(&self.entries, &other.entries)
    }
}

/// `|Ψ+⟩` in the Choi basis.
pub fn psi_plus() -> DVector<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![c(0.0), c(s), c(s)])
}

/// `Σ_j (A_j ⊗ I)|Ψ+⟩⟨Ψ+|(A_j ⊗ I)†` on the three-dimensional support, unnormalized.
///
/// The trace equals the heralding probability of the channel on the probe.
pub fn choi_of_channel(ch: &KrausChannel) -> Result<ChoiMatrix> {
    if ch.dim() != 2 {
        return Err(Error::ChoiSupport(format!(
            "channel acts on {} Fock levels, expected the vacuum/single-photon subspace",
            ch.dim()
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = CMatrix::zeros(3, 3);
    for a in ch.kraus_ops() {
        if a.entry(1, 0).norm() > HERMITIAN_TOL {
            return Err(Error::ChoiSupport(format!(
                "Kraus operator creates a photon (<1|A|0> = {})",
                a.entry(1, 0)
            )));
        }
        // (A ⊗ I)|Ψ+⟩ = (A|1⟩|0⟩ + A|0⟩|1⟩)/√2
        let v = DVector::from_vec(vec![
            a.entry(0, 1) * s,
            a.entry(1, 1) * s,
            a.entry(0, 0) * s,
        ]);
        entries += &v * v.adjoint();
    }
    Ok(ChoiMatrix::from_entries_unchecked(entries))
}

/// `F = ⟨Ψ+|χ|Ψ+⟩` for a normalized Choi matrix.
pub fn channel_fidelity(chi: &ChoiMatrix) -> Result<f64> {
    if !chi.is_normalized() {
        return Err(Error::NotNormalized { norm: chi.trace() });
    }
    Ok(linalg::expectation(chi.entries(), &psi_plus()).clamp(0.0, 1.0))
}

/// Probability that an injected photon survives the (conditional) channel:
/// `⟨1|M(|1⟩⟨1|)|1⟩ / Tr M(|1⟩⟨1|)`.
pub fn effective_transmittance(ch: &KrausChannel) -> Result<f64> {
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ch.dim(),
        });
    }
    let out = ch.apply(&FockState::fock(1, 2)?.density())?;
    let p = out.trace();
    if p < MIN_SUCCESS {
        return Err(Error::ZeroSuccess { probability: p });
    }
    Ok((out.population(1) / p).clamp(0.0, 1.0))
}

/// Channel fidelity of amplification-only compensation (`ν = 1`) with gain `g`:
/// `¼(g^{−1}+τ)² / (½[τ² + (2−τ²)g^{−2}])`.
pub fn naive_strategy_fidelity(tau: f64, g: f64) -> Result<f64> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::domain("g", g, "finite g > 0"));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::domain("tau", tau, "0 < tau <= 1"));
    }
    let t2 = tau * tau;
    let inv = 1.0 / g;
    Ok(0.25 * (inv + tau).powi(2) / (0.5 * (t2 + (2.0 - t2) * inv * inv)))
}

/// `(g_opt, F_max) = ((2−τ²)/τ, (3−τ²)/(4−2τ²))` for amplification-only compensation.
pub fn naive_strategy_optimum(tau: f64) -> (f64, f64) {
    let t2 = tau * tau;
    ((2.0 - t2) / tau, (3.0 - t2) / (4.0 - 2.0 * t2))
}

/// Matched-gain channel fidelity `1/(1 + ν²(1−τ²)/2)`.
pub fn matched_fidelity(tau: f64, nu: f64) -> f64 {
    1.0 / (1.0 + nu * nu * (1.0 - tau * tau) / 2.0)
}

/// Matched-gain effective transmittance `1/(1 + ν²(1−τ²))`.
pub fn matched_transmittance(tau: f64, nu: f64) -> f64 {
    1.0 / (1.0 + nu * nu * (1.0 - tau * tau))
}
