//! Kraus channels on a truncated Fock space: the pure-loss channel and the
//! loss-suppressed channel `attenuate → lose → amplify`.
//!
//! The pure-loss channel with amplitude transmittance `τ` restricted to
//! `n ≤ N` has the `N+1` Kraus operators
//!
//! ```text
//! A_j = Σ_{m=0}^{N−j} sqrt(C(m+j, j)) (1−τ²)^{j/2} τ^m |m⟩⟨m+j|
//! ```
//!
//! where `A_j` removes exactly `j` photons. Sandwiching it between the
//! attenuator `νⁿ` and the normalized amplifier `G_N(g)` gives the effective
//! channel with Kraus operators `G_N(g) A_j νⁿ`. On the matched manifold
//! `g·ν·τ = 1` those collapse to `g^{−N} ν^j B_j` with `B_j = A_0^{−1} A_j`,
//! which makes the `ν^{2j}` suppression of `j`-photon losses explicit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{amplifier_filter, attenuator_filter, check_dim, DensityMatrix, Operator};
use crate::linalg::{self, c, CMatrix};

/// Largest supported truncation. `τ^{−N}` in `A_0^{−1}` loses precision beyond this.
pub const MAX_TRUNCATION: usize = 16;

/// Slack allowed above one in the spectrum of `Σ A_j†A_j`.
pub const TRACE_NONINCREASING_TOL: f64 = 1e-10;

/// `|g·ν·τ − 1|` below which parameters are reported as matched.
pub const MATCHED_TOL: f64 = 1e-12;

/// `|g·ν·τ − 1|` above which the simplified (matched-only) form is refused.
pub const SIMPLIFIED_FORM_TOL: f64 = 1e-9;

/// Ordered set of Kraus operators of one trace-nonincreasing map.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<Operator>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let ch = Self::from_ops_unchecked(ops)?;
        let top = ch.max_effect_eigenvalue();
        if top > 1.0 + TRACE_NONINCREASING_TOL {
            return Err(Error::InvalidInput(format!(
                "Kraus operators increase trace: largest eigenvalue of sum A^dag A is {top}"
            )));
        }
        Ok(ch)
    }

    fn from_ops_unchecked(ops: Vec<Operator>) -> Result<Self> {
        let dim = ops.first().map(Operator::dim).ok_or_else(|| {
            Error::InvalidInput("a channel needs at least one Kraus operator".into())
        })?;
        for op in &ops {
            check_dim(dim, op.dim())?;
        }
        Ok(KrausChannel { dim, ops })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            dim,
            ops: vec![Operator::identity(dim)],
        }
    }

    /// Single-Kraus channel of a heralded filter.
    pub fn from_filter(op: Operator) -> Self {
        KrausChannel {
            dim: op.dim(),
            ops: vec![op],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.ops
    }

    /// `Σ_j A_j† A_j`.
    pub fn effect(&self) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| {
                acc + a.matrix().adjoint() * a.matrix()
            })
    }

    pub fn max_effect_eigenvalue(&self) -> f64 {
        *linalg::hermitian_eigenvalues(&self.effect())
            .last()
            .expect("dim >= 1")
    }

    /// `‖Σ A_j†A_j − I‖_max`.
    pub fn completeness_defect(&self) -> f64 {
        linalg::max_abs_diff(&self.effect(), &CMatrix::identity(self.dim, self.dim))
    }

    /// `Σ A_j ρ A_j†`, unnormalized.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_dim(self.dim, rho.dim())?;
        let out = self
            .ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| {
                acc + a.matrix() * rho.matrix() * a.matrix().adjoint()
            });
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        check_dim(self.dim, next.dim)?;
        let ops = next
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b * a))
            .collect();
        Ok(KrausChannel { dim: self.dim, ops })
    }

    /// `L ⊗ I_ref`: the channel acting on the first factor of a bipartite system.
    pub fn tensor_identity(&self, ref_dim: usize) -> KrausChannel {
        KrausChannel {
            dim: self.dim * ref_dim,
            ops: self
                .ops
                .iter()
                .map(|a| a.tensor_identity(ref_dim))
                .collect(),
        }
    }

    /// Restriction to `|0⟩ … |dim−1⟩`; that span must be invariant under every Kraus operator.
    pub fn leading_block(&self, dim: usize) -> Result<KrausChannel> {
        if dim == 0 || dim > self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        for a in &self.ops {
            for row in dim..self.dim {
                for col in 0..dim {
                    if a.entry(row, col).norm() > linalg::HERMITIAN_TOL {
                        return Err(Error::InvalidInput(format!(
                            "subspace of the first {dim} Fock states is not invariant"
                        )));
                    }
                }
            }
        }
        let ops = self
            .ops
            .iter()
            .map(|a| a.leading_block(dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(KrausChannel { dim, ops })
    }
}

/// Operating point of the loss-suppression protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Amplitude transmittance of the lossy channel.
    pub tau: f64,
    /// Noiseless attenuation applied before the channel.
    pub nu: f64,
    /// Noiseless amplification gain applied after the channel.
    pub g: f64,
    /// Fock truncation `N`.
    pub n_max: usize,
}

impl ChannelParams {
    pub fn new(tau: f64, nu: f64, g: f64, n_max: usize) -> Result<Self> {
        check_tau(tau)?;
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::domain("nu", nu, "0 < nu <= 1"));
        }
        if !(g >= 1.0 && g.is_finite()) {
            return Err(Error::domain("g", g, "finite g >= 1"));
        }
        check_truncation(n_max)?;
        Ok(ChannelParams { tau, nu, g, n_max })
    }

    /// Parameters with the matched gain `g = 1/(ν τ)`.
    pub fn matched(tau: f64, nu: f64, n_max: usize) -> Result<Self> {
        Self::new(tau, nu, 1.0 / (nu * tau), n_max)
    }

    pub fn identity(n_max: usize) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, n_max)
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn matching_error(&self) -> f64 {
        (self.g * self.nu * self.tau - 1.0).abs()
    }

    pub fn is_matched(&self) -> bool {
        self.matching_error() <= MATCHED_TOL
    }

    fn require_matched(&self) -> Result<()> {
        if self.matching_error() > SIMPLIFIED_FORM_TOL {
            return Err(Error::UnmatchedGain {
                product: self.g * self.nu * self.tau,
            });
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::domain("tau", tau, "0 < tau <= 1"));
    }
    Ok(())
}

fn check_truncation(n_max: usize) -> Result<()> {
    if n_max > MAX_TRUNCATION {
        return Err(Error::TruncationTooLarge {
            n_max,
            max: MAX_TRUNCATION,
        });
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Kraus operators `A_0 … A_N` of the pure-loss channel.
pub fn loss_channel(tau: f64, n_max: usize) -> Result<KrausChannel> {
    check_tau(tau)?;
    check_truncation(n_max)?;
    let dim = n_max + 1;
    let loss = 1.0 - tau * tau;
    let ops = (0..dim)
        .map(|j| {
            let mut m = CMatrix::zeros(dim, dim);
            for row in 0..dim - j {
                let amp =
                    binomial(row + j, j).sqrt() * loss.powf(j as f64 / 2.0) * tau.powi(row as i32);
                m[(row, row + j)] = c(amp);
            }
            Operator::from_matrix(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KrausChannel { dim, ops })
}

/// `Σ A_j ρ A_j†`.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

/// Attenuate, lose, amplify: Kraus operators `G_N(g) · A_j · νⁿ`. Valid for any gain.
pub fn suppressed_channel_direct(p: &ChannelParams) -> Result<KrausChannel> {
    let p = ChannelParams::new(p.tau, p.nu, p.g, p.n_max)?;
    let attenuate = KrausChannel::from_filter(attenuator_filter(p.nu, p.dim())?);
    let amplify = KrausChannel::from_filter(amplifier_filter(p.g, p.n_max)?);
    attenuate
        .then(&loss_channel(p.tau, p.n_max)?)?
        .then(&amplify)
}

/// `A_0^{−1} = diag(τ^{−n})`, in closed form.
fn inverse_no_loss_operator(tau: f64, dim: usize) -> Result<Operator> {
    let entries: Vec<Complex64> = (0..dim).map(|n| c(tau.powi(-(n as i32)))).collect();
    Operator::diagonal_filter(&entries)
}

/// `B_j = A_0^{−1} A_j` for `j = 0 … N` (`B_0 = I`).
pub fn loss_suppression_operators(tau: f64, n_max: usize) -> Result<Vec<Operator>> {
    let loss = loss_channel(tau, n_max)?;
    let inv = inverse_no_loss_operator(tau, n_max + 1)?;
    Ok(loss.kraus_ops().iter().map(|a| &inv * a).collect())
}

/// Matched-gain form `{g^{−N} ν^j B_j}`; refuses parameters off `g ν τ = 1`.
pub fn suppressed_channel_simplified(p: &ChannelParams) -> Result<KrausChannel> {
    let p = ChannelParams::new(p.tau, p.nu, p.g, p.n_max)?;
    p.require_matched()?;
    let prefactor = p.g.powi(-(p.n_max as i32));
    let ops = loss_suppression_operators(p.tau, p.n_max)?
        .iter()
        .enumerate()
        .map(|(j, b)| b.scale(prefactor * p.nu.powi(j as i32)))
        .collect();
    Ok(KrausChannel { dim: p.dim(), ops })
}

/// Heralding probability `g^{−2N} [1 + Σ_{j≥1} ν^{2j} Tr(B_j†B_j ρ)]` for matched gain.
pub fn success_probability(p: &ChannelParams, rho_in: &DensityMatrix) -> Result<f64> {
    let p = ChannelParams::new(p.tau, p.nu, p.g, p.n_max)?;
    p.require_matched()?;
    check_dim(p.dim(), rho_in.dim())?;
    if !rho_in.is_normalized() {
        return Err(Error::NotNormalized {
            norm: rho_in.trace(),
        });
    }
    let b = loss_suppression_operators(p.tau, p.n_max)?;
    let losses: f64 = b
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, bj)| {
            let effect = bj.matrix().adjoint() * bj.matrix();
            p.nu.powi(2 * j as i32) * (effect * rho_in.matrix()).trace().re
        })
        .sum();
    Ok(p.g.powi(-2 * p.n_max as i32) * (1.0 + losses))
}

/// Success probability for the pure input `c0|0⟩ + c1|1⟩`, any gain:
/// `|c0|² g^{−2} + |c1|² ν² [τ² + (1−τ²) g^{−2}]`.
///
/// The expression is the `N = 1` protocol. For a larger truncation the
/// normalized amplifier contributes an extra `g^{−2(N−1)}`, which is included
/// so the value stays equal to `Tr M(ρ)`.
pub fn qubit_success_probability(c0: Complex64, c1: Complex64, p: &ChannelParams) -> Result<f64> {
    let p = ChannelParams::new(p.tau, p.nu, p.g, p.n_max)?;
    let (w0, w1) = (c0.norm_sqr(), c1.norm_sqr());
    if ((w0 + w1) - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm: w0 + w1 });
    }
    if p.n_max == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 2,
        });
    }
    let g2 = p.g.powi(-2);
    let t2 = p.tau * p.tau;
    let qubit = w0 * g2 + w1 * p.nu * p.nu * (t2 + (1.0 - t2) * g2);
    Ok(qubit * p.g.powi(-2 * (p.n_max as i32 - 1)))
}
