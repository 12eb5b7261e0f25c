//! Simulated coincidence tomography of single-rail qubit channels and
//! maximum-likelihood reconstruction of their Choi matrices.
//!
//! The canonical measurement set is the six polarization projectors
//! `H, V, D, A, R, L` on the one-photon block `{|10⟩, |01⟩}` plus a
//! vacuum-monitor projector `|00⟩⟨00|` for lost photons. These operators are
//! all block diagonal, so they only see the photon-number-conserving part of
//! χ; that is exactly the support of any passive channel combined with
//! Fock-diagonal filters. Reconstruction from such a set returns a
//! block-diagonal estimate. A set spanning all nine Hermitian directions is
//! reconstructed without that restriction.
//!
//! The estimator maximizes the Poisson likelihood with free overall rate,
//! which reduces to the multinomial likelihood of the exposure-weighted
//! frequencies. With `G = Σ e_k Π_k` the problem is mapped onto the POVM
//! `Π̃_k = e_k G^{−½} Π_k G^{−½}` and solved by the diluted fixed point
//!
//! ```text
//! ρ ← (I + εR) ρ (I + εR) / Tr[…],   R = Σ_k (f_k / Tr[Π̃_k ρ]) Π̃_k
//! ```
//!
//! which keeps every iterate positive semidefinite and increases the
//! likelihood at each step.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, HERMITIAN_TOL, PSD_FLOOR, TRACE_TOL};

/// Smallest total count accepted for reconstruction.
pub const MIN_TOTAL_COUNTS: f64 = 100.0;

const FULL_RANK: usize = 9;
const BLOCK_RANK: usize = 5;
const RANK_TOL: f64 = 1e-10;

/// One analyzer setting, a rank-one projector on the Choi space.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    label: String,
    projector: CMatrix,
}

impl MeasurementSetting {
    pub fn new(label: impl Into<String>, projector: CMatrix) -> Result<Self> {
        if projector.shape() != (3, 3) {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: projector.nrows(),
            });
        }
        if linalg::hermiticity_error(&projector) > HERMITIAN_TOL {
            return Err(Error::InvalidInput("projector is not Hermitian".into()));
        }
        if linalg::hermitian_eigenvalues(&projector)[0] < PSD_FLOOR {
            return Err(Error::InvalidInput("projector is not positive".into()));
        }
        if linalg::real_trace(&projector) > 1.0 + TRACE_TOL {
            return Err(Error::InvalidInput("projector trace exceeds one".into()));
        }
        Ok(MeasurementSetting {
            label: label.into(),
            projector,
        })
    }

    /// `|v⟩⟨v|` for a vector over `(|00⟩, |10⟩, |01⟩)`; `v` is normalized first.
    pub fn from_vector(label: impl Into<String>, v: [Complex64; 3]) -> Result<Self> {
        let v = DVector::from_column_slice(&v);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("zero projector vector".into()));
        }
        let v = v.unscale(norm);
        Self::new(label, &v * v.adjoint())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    fn is_block_diagonal(&self) -> bool {
        [(0, 1), (0, 2)]
            .iter()
            .all(|&(r, col)| self.projector[(r, col)].norm() <= HERMITIAN_TOL)
    }
}

/// Polarization projectors on `{|10⟩, |01⟩}` plus the vacuum monitor.
pub fn canonical_settings() -> Vec<MeasurementSetting> {
    let o = c(0.0);
    let one = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    // |10⟩ carries the photon in the channel mode (V), |01⟩ in the reference mode (H).
    [
        ("H", [o, o, one]),
        ("V", [o, one, o]),
        ("D", [o, one, one]),
        ("A", [o, one, -one]),
        ("R", [o, one, i]),
        ("L", [o, one, -i]),
        ("loss", [one, o, o]),
    ]
    .into_iter()
    .map(|(label, v)| MeasurementSetting::from_vector(label, v).expect("fixed vectors"))
    .collect()
}

/// Canonical set plus vacuum/one-photon superposition projectors; spans all Hermitian 3×3 matrices.
pub fn extended_settings() -> Vec<MeasurementSetting> {
    let o = c(0.0);
    let one = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    let mut settings = canonical_settings();
    settings.extend(
        [
            ("loss+V", [one, one, o]),
            ("loss+iV", [one, i, o]),
            ("loss+H", [one, o, one]),
            ("loss+iH", [one, o, i]),
        ]
        .into_iter()
        .map(|(label, v)| MeasurementSetting::from_vector(label, v).expect("fixed vectors")),
    );
    settings
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    pub counts: u64,
    /// Relative acquisition weight.
    pub exposure: f64,
}

/// A count-like value (integer counts or exact expected counts) for one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub setting: MeasurementSetting,
    pub value: f64,
    pub exposure: f64,
}

impl From<&CountRecord> for Observation {
    fn from(r: &CountRecord) -> Self {
        Observation {
            setting: r.setting.clone(),
            value: r.counts as f64,
            exposure: r.exposure,
        }
    }
}

/// `total · e_k · Tr[Π_k χ]` for each setting.
pub fn expected_counts(
    chi: &ChoiMatrix,
    settings: &[MeasurementSetting],
    exposures: &[f64],
    total_counts: f64,
) -> Result<Vec<f64>> {
    if !chi.is_normalized() {
        return Err(Error::NotNormalized { norm: chi.trace() });
    }
    if settings.len() != exposures.len() {
        return Err(Error::DimensionMismatch {
            expected: settings.len(),
            found: exposures.len(),
        });
    }
    if let Some(&e) = exposures.iter().find(|&&e| !(e >= 0.0 && e.is_finite())) {
        return Err(Error::domain("exposure", e, "finite exposure >= 0"));
    }
    Ok(settings
        .iter()
        .zip(exposures)
        .map(|(s, &e)| {
            let p = (s.projector() * chi.entries()).trace().re.max(0.0);
            total_counts * e * p
        })
        .collect())
}

/// Poisson-sampled counts with unit exposure per setting.
pub fn simulate_counts(
    chi: &ChoiMatrix,
    settings: &[MeasurementSetting],
    total_counts: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    simulate_counts_with_exposures(
        chi,
        settings,
        &vec![1.0; settings.len()],
        total_counts,
        seed,
    )
}

pub fn simulate_counts_with_exposures(
    chi: &ChoiMatrix,
    settings: &[MeasurementSetting],
    exposures: &[f64],
    total_counts: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if total_counts == 0 {
        return Err(Error::InvalidInput("total_counts must be positive".into()));
    }
    let means = expected_counts(chi, settings, exposures, total_counts as f64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    settings
        .iter()
        .zip(exposures)
        .zip(means)
        .map(|((setting, &exposure), mean)| {
            let counts = if mean > 0.0 {
                let dist = Poisson::new(mean)
                    .map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?;
                dist.sample(&mut rng) as u64
            } else {
                0
            };
            Ok(CountRecord {
                setting: setting.clone(),
                counts,
                exposure,
            })
        })
        .collect()
}

/// Exact expected counts packaged as observations, for noiseless reconstruction.
pub fn ideal_observations(
    chi: &ChoiMatrix,
    settings: &[MeasurementSetting],
    total_counts: f64,
) -> Result<Vec<Observation>> {
    let exposures = vec![1.0; settings.len()];
    let values = expected_counts(chi, settings, &exposures, total_counts)?;
    Ok(settings
        .iter()
        .zip(values)
        .map(|(s, value)| Observation {
            setting: s.clone(),
            value,
            exposure: 1.0,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlOptions {
    /// Dilution ε of the fixed-point step.
    pub dilution: f64,
    /// Stop once the max-norm change of an iterate drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MlOptions {
    fn default() -> Self {
        MlOptions {
            dilution: 0.5,
            tolerance: 1e-9,
            max_iterations: 100_000,
        }
    }
}

impl MlOptions {
    /// Tighter step bound for noiseless frequencies, whose fixed point is the generating χ.
    pub fn exact_data() -> Self {
        MlOptions {
            tolerance: 1e-12,
            ..MlOptions::default()
        }
    }
}

/// What part of χ the settings determine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// All nine real parameters.
    Full,
    /// Only `⟨00|χ|00⟩` and the one-photon block.
    BlockDiagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub choi: ChoiMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub last_update: f64,
    /// `Σ f_k ln q_k` with frequencies normalized to one.
    pub log_likelihood: f64,
    pub support: Support,
}

/// Real coordinates of a Hermitian 3×3 matrix.
fn hermitian_coordinates(m: &CMatrix) -> [f64; 9] {
    [
        m[(0, 0)].re,
        m[(1, 1)].re,
        m[(2, 2)].re,
        m[(1, 2)].re,
        m[(1, 2)].im,
        m[(0, 1)].re,
        m[(0, 1)].im,
        m[(0, 2)].re,
        m[(0, 2)].im,
    ]
}

fn frame_rank(settings: &[&MeasurementSetting]) -> usize {
    if settings.is_empty() {
        return 0;
    }
    let frame = DMatrix::from_fn(9, settings.len(), |r, col| {
        hermitian_coordinates(settings[col].projector())[r]
    });
    frame.rank(RANK_TOL)
}

/// Checks informational completeness of the settings with nonzero exposure.
pub fn classify_support(settings: &[&MeasurementSetting]) -> Result<Support> {
    let rank = frame_rank(settings);
    if rank == FULL_RANK {
        return Ok(Support::Full);
    }
    if settings.iter().all(|s| s.is_block_diagonal()) {
        if rank == BLOCK_RANK {
            return Ok(Support::BlockDiagonal);
        }
        return Err(Error::RankDeficient {
            rank,
            required: BLOCK_RANK,
        });
    }
    Err(Error::RankDeficient {
        rank,
        required: FULL_RANK,
    })
}

/// Runs the diluted fixed-point iteration; returns the last iterate even without convergence.
pub fn maximum_likelihood(data: &[Observation], opts: &MlOptions) -> Result<Reconstruction> {
    if let Some(o) = data.iter().find(|o| {
        !(o.value >= 0.0 && o.value.is_finite() && o.exposure >= 0.0 && o.exposure.is_finite())
    }) {
        return Err(Error::InvalidInput(format!(
            "setting {} has invalid value {} or exposure {}",
            o.setting.label(),
            o.value,
            o.exposure
        )));
    }
    let used: Vec<&Observation> = data.iter().filter(|o| o.exposure > 0.0).collect();
    let total: f64 = used.iter().map(|o| o.value).sum();
    if total < MIN_TOTAL_COUNTS {
        return Err(Error::InvalidInput(format!(
            "total counts {total} below the minimum {MIN_TOTAL_COUNTS}"
        )));
    }
    let settings: Vec<&MeasurementSetting> = used.iter().map(|o| &o.setting).collect();
    let support = classify_support(&settings)?;

    let metric = used.iter().fold(CMatrix::zeros(3, 3), |acc, o| {
        acc + o.setting.projector().scale(o.exposure)
    });
    let inv_sqrt = linalg::hermitian_function(&metric, |x| 1.0 / x.sqrt());
    let povm: Vec<CMatrix> = used
        .iter()
        .map(|o| (&inv_sqrt * o.setting.projector() * &inv_sqrt).scale(o.exposure))
        .collect();
    let freqs: Vec<f64> = used.iter().map(|o| o.value / total).collect();

    let log_likelihood = |rho: &CMatrix| -> f64 {
        povm.iter()
            .zip(&freqs)
            .filter(|(_, &f)| f > 0.0)
            .map(|(p, &f)| f * (p * rho).trace().re.max(f64::MIN_POSITIVE).ln())
            .sum()
    };

    let identity = CMatrix::identity(3, 3);
    let mut rho = identity.unscale(3.0);
    let mut ll = log_likelihood(&rho);
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let r = povm.iter().zip(&freqs).filter(|(_, &f)| f > 0.0).fold(
            CMatrix::zeros(3, 3),
            |acc, (p, &f)| {
                let q = (p * &rho).trace().re.max(f64::MIN_POSITIVE);
                acc + p.scale(f / q)
            },
        );
        let step = (&identity + r.scale(opts.dilution)).unscale(1.0 + opts.dilution);
        let next = &step * &rho * step.adjoint();
        let next = linalg::hermitian_part(&next).unscale(linalg::real_trace(&next));
        last_update = linalg::max_abs_diff(&next, &rho);
        rho = next;
        let next_ll = log_likelihood(&rho);
        debug_assert!(
            next_ll >= ll - 1e-12 * ll.abs().max(1.0),
            "likelihood decreased: {ll} -> {next_ll}"
        );
        ll = next_ll;
        if last_update < opts.tolerance {
            break;
        }
    }

    let chi = &inv_sqrt * &rho * &inv_sqrt;
    let chi = linalg::hermitian_part(&chi).unscale(linalg::real_trace(&chi));
    Ok(Reconstruction {
        choi: ChoiMatrix::from_entries_unchecked(chi),
        iterations,
        converged: last_update < opts.tolerance,
        last_update,
        log_likelihood: ll,
        support,
    })
}

/// Maximum-likelihood Choi matrix from count records; non-convergence is an error.
pub fn reconstruct_choi(records: &[CountRecord]) -> Result<Reconstruction> {
    let data: Vec<Observation> = records.iter().map(Observation::from).collect();
    reconstruct_observations(&data)
}

pub fn reconstruct_observations(data: &[Observation]) -> Result<Reconstruction> {
    reconstruct_with(data, &MlOptions::default())
}

/// [`maximum_likelihood`] with non-convergence reported as an error.
pub fn reconstruct_with(data: &[Observation], opts: &MlOptions) -> Result<Reconstruction> {
    let rec = maximum_likelihood(data, opts)?;
    if !rec.converged {
        return Err(Error::NonConvergence {
            iterations: rec.iterations,
            last_update: rec.last_update,
        });
    }
    Ok(rec)
}
