//! End-to-end loss suppression: run states through the protocol, sweep the
//! amplification gain, and pick the attenuation for a target fidelity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{qubit_success_probability, suppressed_channel_direct, ChannelParams};
use crate::choi::{self, ChoiMatrix, MIN_SUCCESS};
use crate::error::{Error, Result};
use crate::fock::{check_dim, DensityMatrix, FockState};
use crate::linalg::c;

/// Default gain-grid density for sweeps.
pub const POINTS_PER_DECADE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// `g ν τ = 1`.
    Matched,
    /// Amplification only, `ν = 1`, unmatched gain.
    Naive,
    Custom,
}

impl Strategy {
    pub fn classify(p: &ChannelParams) -> Self {
        if p.is_matched() {
            Strategy::Matched
        } else if p.nu == 1.0 {
            Strategy::Naive
        } else {
            Strategy::Custom
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Matched => "matched",
            Strategy::Naive => "naive",
            Strategy::Custom => "custom",
        }
    }
}

/// How the attenuation `ν` is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy", content = "nu")]
pub enum NuPolicy {
    /// `ν = min[1/(gτ), 1]`: matched wherever the gain allows it.
    Fig4,
    Fixed(f64),
    /// `ν = 1`.
    Naive,
}

impl NuPolicy {
    pub fn nu(&self, tau: f64, g: f64) -> f64 {
        match *self {
            NuPolicy::Fig4 => (1.0 / (g * tau)).min(1.0),
            NuPolicy::Fixed(nu) => nu,
            NuPolicy::Naive => 1.0,
        }
    }
}

/// Pure qubit probe `c0|0⟩ + c1|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl Probe {
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self> {
        let norm = c0.norm_sqr() + c1.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Probe { c0, c1 })
    }

    /// `|c0|² = |c1|² = ½`.
    pub fn balanced() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Probe { c0: c(s), c1: c(s) }
    }

    /// The probe embedded in `|0⟩ … |n_max⟩`.
    pub fn state(&self, n_max: usize) -> Result<FockState> {
        let mut amps = vec![c(0.0); n_max.max(1) + 1];
        amps[0] = self.c0;
        amps[1] = self.c1;
        FockState::new(amps)
    }
}

impl Default for Probe {
    fn default() -> Self {
        Probe::balanced()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub strategy: Strategy,
    pub tau: f64,
    pub nu: f64,
    pub g: f64,
    pub fidelity: f64,
    pub t_eff: f64,
    pub p_succ: f64,
    pub p_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub taus: Vec<f64>,
    pub gains: Vec<f64>,
    pub nu_policy: NuPolicy,
    pub probe: Probe,
    pub truncation: usize,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() || self.gains.is_empty() {
            return Err(Error::InvalidInput("sweep grids must be nonempty".into()));
        }
        if self.truncation == 0 {
            return Err(Error::InvalidInput(
                "sweeps need the single-photon level, truncation >= 1".into(),
            ));
        }
        Probe::new(self.probe.c0, self.probe.c1)?;
        Ok(())
    }
}

/// `points` gains spaced logarithmically on `[min, max]`, endpoints included.
pub fn log_gain_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    check_gain_range(min, max, points)?;
    if points == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => min,
            i if i == points - 1 => max,
            i => (lo + step * i as f64).exp(),
        })
        .collect())
}

/// `points` gains spaced evenly on `[min, max]`, endpoints included.
pub fn linear_gain_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    check_gain_range(min, max, points)?;
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                max
            } else {
                min + step * i as f64
            }
        })
        .collect())
}

/// Number of points giving [`POINTS_PER_DECADE`] resolution on `[min, max]`.
pub fn default_gain_points(min: f64, max: f64) -> usize {
    if max <= min {
        return 1;
    }
    (POINTS_PER_DECADE as f64 * (max / min).log10()).ceil() as usize + 1
}

fn check_gain_range(min: f64, max: f64, points: usize) -> Result<()> {
    if !(min >= 1.0 && min.is_finite()) {
        return Err(Error::domain("gain-min", min, "finite gain >= 1"));
    }
    if !(max >= min && max.is_finite()) {
        return Err(Error::domain("gain-max", max, "finite gain >= gain-min"));
    }
    if points == 0 {
        return Err(Error::InvalidInput("gain-points must be >= 1".into()));
    }
    Ok(())
}

/// Runs `ρ` through attenuation, loss and amplification; returns the normalized
/// output and the heralding probability.
pub fn run_protocol(rho_in: &DensityMatrix, p: &ChannelParams) -> Result<(DensityMatrix, f64)> {
    check_dim(p.dim(), rho_in.dim())?;
    check_input_normalized(rho_in)?;
    let out = suppressed_channel_direct(p)?.apply(rho_in)?;
    condition(out)
}

/// Same as [`run_protocol`] for a joint state of the channel mode and a
/// reference system of dimension `ref_dim`, ordered `channel ⊗ reference`.
pub fn run_protocol_with_reference(
    rho_joint: &DensityMatrix,
    p: &ChannelParams,
    ref_dim: usize,
) -> Result<(DensityMatrix, f64)> {
    check_dim(p.dim() * ref_dim, rho_joint.dim())?;
    check_input_normalized(rho_joint)?;
    let out = suppressed_channel_direct(p)?
        .tensor_identity(ref_dim)
        .apply(rho_joint)?;
    condition(out)
}

fn check_input_normalized(rho: &DensityMatrix) -> Result<()> {
    if !rho.is_normalized() {
        return Err(Error::NotNormalized { norm: rho.trace() });
    }
    Ok(())
}

fn condition(out: DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let p_succ = out.trace();
    if p_succ < MIN_SUCCESS {
        return Err(Error::ZeroSuccess {
            probability: p_succ,
        });
    }
    Ok((out.normalized()?, p_succ))
}

/// Unnormalized Choi matrix of the protocol restricted to the vacuum/single-photon block.
pub fn protocol_choi(p: &ChannelParams) -> Result<ChoiMatrix> {
    let ch = suppressed_channel_direct(p)?.leading_block(2)?;
    choi::choi_of_channel(&ch)
}

/// Relative success probability of the probe; equals one for `τ = ν = g = 1`.
pub fn relative_success(p: &ChannelParams, probe: &Probe) -> Result<f64> {
    qubit_success_probability(probe.c0, probe.c1, p)
}

/// Evaluates every figure of merit at one operating point.
pub fn evaluate_point(p: &ChannelParams, probe: &Probe) -> Result<SweepRecord> {
    let ch = suppressed_channel_direct(p)?;
    let block = ch.leading_block(2)?;
    let chi = choi::choi_of_channel(&block)?.normalized()?;
    let fidelity = choi::channel_fidelity(&chi)?;
    let t_eff = choi::effective_transmittance(&block)?;
    let p_succ = ch.apply(&probe.state(p.n_max)?.density())?.trace();
    let p_rel = relative_success(p, probe)?;
    Ok(SweepRecord {
        strategy: Strategy::classify(p),
        tau: p.tau,
        nu: p.nu,
        g: p.g,
        fidelity,
        t_eff,
        p_succ,
        p_rel,
    })
}

/// One record per `(τ, g)` point, ordered τ-major then by the gain grid.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    let points: Vec<(f64, f64)> = plan
        .taus
        .iter()
        .flat_map(|&tau| plan.gains.iter().map(move |&g| (tau, g)))
        .collect();
    points
        .par_iter()
        .map(|&(tau, g)| {
            let nu = plan.nu_policy.nu(tau, g);
            let p = ChannelParams::new(tau, nu, g, plan.truncation)?;
            evaluate_point(&p, &plan.probe)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuOptimum {
    pub nu: f64,
    pub g: f64,
    pub p_succ: f64,
}

/// Largest attenuation `ν` (hence highest success) whose matched protocol reaches
/// `target_fidelity`, from `ν² = 2(1−F)/(F(1−τ²))` clipped to `(0, 1]`.
pub fn optimize_nu(tau: f64, target_fidelity: f64, probe: &Probe) -> Result<NuOptimum> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::domain("tau", tau, "0 < tau <= 1"));
    }
    if target_fidelity.is_nan() || target_fidelity <= 0.0 {
        return Err(Error::domain(
            "target_fidelity",
            target_fidelity,
            "0 < F < 1",
        ));
    }
    if target_fidelity >= 1.0 {
        return Err(Error::Infeasible(
            "F = 1 is only reached asymptotically as nu -> 0".into(),
        ));
    }
    let loss = 1.0 - tau * tau;
    let nu = if loss == 0.0 {
        1.0
    } else {
        let nu2 = 2.0 * (1.0 - target_fidelity) / (target_fidelity * loss);
        nu2.min(1.0).sqrt()
    };
    let p = ChannelParams::matched(tau, nu, 1)?;
    let probe = Probe::new(probe.c0, probe.c1)?;
    Ok(NuOptimum {
        nu,
        g: p.g,
        p_succ: relative_success(&p, &probe)?,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::choi::{channel_fidelity, matched_fidelity, matched_transmittance};
    use crate::fock::FockState;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn balanced_state() -> DensityMatrix {
        Probe::balanced().state(1).unwrap().density()
    }

    #[test]
    fn identity_protocol_is_transparent() {
        let rho = balanced_state();
        let (out, p) = run_protocol(&rho, &ChannelParams::identity(1).unwrap()).unwrap();
        assert!(crate::linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
        assert!(close(p, 1.0, 1e-15));
    }

    #[test]
    fn matched_balanced_state() {
        let s = FRAC_1_SQRT_2;
        let p = ChannelParams::new(s, s, 2.0, 1).unwrap();
        let psi = Probe::balanced().state(1).unwrap();
        let (out, p_succ) = run_protocol(&psi.density(), &p).unwrap();
        assert!(close(p_succ, 0.28125, 1e-12));
        // ρ_out ∝ ψψ† + 0.125|0⟩⟨0|: ⟨ψ|ρ|ψ⟩ = (1 + 0.0625)/1.125.
        assert!(close(out.overlap(&psi).unwrap(), 1.0625 / 1.125, 1e-12));
        let chi = protocol_choi(&p).unwrap().normalized().unwrap();
        assert!(close(
            channel_fidelity(&chi).unwrap(),
            0.888888888889,
            1e-11
        ));
    }

    #[test]
    fn naive_compensation_leaves_vacuum_excess() {
        let tau = FRAC_1_SQRT_2;
        let p = ChannelParams::new(tau, 1.0, 1.0 / tau, 1).unwrap();
        let psi = Probe::balanced().state(1).unwrap();
        let raw = suppressed_channel_direct(&p)
            .unwrap()
            .apply(&psi.density())
            .unwrap();
        // Signal term carries g^{-2}; strip it and the pure part to expose the excess.
        let scaled = raw.matrix().scale(p.g * p.g) - psi.density().matrix();
        assert!(close(scaled[(0, 0)].re, 0.25, 1e-12));
        assert!(scaled[(0, 1)].norm() < 1e-12 && scaled[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn matched_vacuum_noise_weight() {
        for (tau, nu) in [(0.5, 0.3), (0.8, 0.9), (0.3, 0.05)] {
            let p = ChannelParams::matched(tau, nu, 1).unwrap();
            let (c0, c1) = (c(0.6), Complex64::new(0.0, 0.8));
            let psi = FockState::qubit(c0, c1).unwrap();
            let raw = suppressed_channel_direct(&p)
                .unwrap()
                .apply(&psi.density())
                .unwrap();
            let rel = raw.matrix().scale(p.g * p.g) - psi.density().matrix();
            let expected = (1.0 - tau * tau) * nu * nu * c1.norm_sqr();
            assert!(close(rel[(0, 0)].re, expected, 1e-12 * (1.0 + expected)));
        }
    }

    #[test]
    fn zero_success_is_reported() {
        // The diagonal filters never annihilate a state, so exercise the conditioning step directly.
        let out = DensityMatrix::from_matrix_unchecked(crate::linalg::CMatrix::zeros(2, 2));
        assert!(matches!(condition(out), Err(Error::ZeroSuccess { .. })));
        let tiny = DensityMatrix::from_matrix_unchecked(
            crate::linalg::CMatrix::identity(2, 2).scale(1e-17),
        );
        assert!(matches!(condition(tiny), Err(Error::ZeroSuccess { .. })));
    }

    #[test]
    fn unnormalized_input_rejected() {
        let rho = DensityMatrix::diagonal(&[0.2, 0.3]).unwrap();
        assert!(matches!(
            run_protocol(&rho, &ChannelParams::identity(1).unwrap()),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn sweep_single_identity_point() {
        let plan = SweepPlan {
            taus: vec![1.0],
            gains: vec![1.0],
            nu_policy: NuPolicy::Fig4,
            probe: Probe::balanced(),
            truncation: 1,
        };
        let recs = run_sweep(&plan).unwrap();
        assert_eq!(recs.len(), 1);
        let r = recs[0];
        assert_eq!(r.strategy, Strategy::Matched);
        for v in [r.fidelity, r.t_eff, r.p_succ, r.p_rel] {
            assert!(close(v, 1.0, 1e-12));
        }
    }

    #[test]
    fn sweep_fig4_matched_point() {
        let tau = 0.5f64.sqrt();
        let plan = SweepPlan {
            taus: vec![tau],
            gains: vec![2.0],
            nu_policy: NuPolicy::Fig4,
            probe: Probe::balanced(),
            truncation: 1,
        };
        let r = run_sweep(&plan).unwrap()[0];
        assert!(close(r.nu, 0.70710678, 1e-8));
        assert!(close(r.fidelity, 0.888888888889, 1e-11));
        assert!(close(r.t_eff, 0.8, 1e-12));
        assert!(close(r.p_succ, 0.28125, 1e-12));
        assert!(close(r.p_rel, 0.28125, 1e-12));
    }

    #[test]
    fn sweep_ordering_is_tau_major() {
        let plan = SweepPlan {
            taus: vec![0.9, 0.5],
            gains: vec![1.0, 2.0, 3.0],
            nu_policy: NuPolicy::Naive,
            probe: Probe::balanced(),
            truncation: 1,
        };
        let recs = run_sweep(&plan).unwrap();
        let keys: Vec<(f64, f64)> = recs.iter().map(|r| (r.tau, r.g)).collect();
        assert_eq!(
            keys,
            vec![
                (0.9, 1.0),
                (0.9, 2.0),
                (0.9, 3.0),
                (0.5, 1.0),
                (0.5, 2.0),
                (0.5, 3.0)
            ]
        );
    }

    #[test]
    fn sweep_with_larger_truncation_keeps_qubit_metrics() {
        let mk = |truncation| SweepPlan {
            taus: vec![0.6],
            gains: vec![1.2, 2.5],
            nu_policy: NuPolicy::Fig4,
            probe: Probe::balanced(),
            truncation,
        };
        let a = run_sweep(&mk(1)).unwrap();
        let b = run_sweep(&mk(3)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(close(x.fidelity, y.fidelity, 1e-12));
            assert!(close(x.t_eff, y.t_eff, 1e-12));
            assert!(close(y.p_succ, y.p_rel, 1e-14));
            assert!(close(y.p_succ, x.p_succ * y.g.powi(-4), 1e-14));
        }
    }

    #[test]
    fn sweep_rejects_empty_grid() {
        let plan = SweepPlan {
            taus: vec![],
            gains: vec![1.0],
            nu_policy: NuPolicy::Fig4,
            probe: Probe::balanced(),
            truncation: 1,
        };
        assert!(run_sweep(&plan).is_err());
    }

    #[test]
    fn relative_success_examples() {
        let probe = Probe::balanced();
        assert!(close(
            relative_success(&ChannelParams::identity(1).unwrap(), &probe).unwrap(),
            1.0,
            1e-15
        ));
        let s = FRAC_1_SQRT_2;
        let p = ChannelParams::new(s, s, 2.0, 1).unwrap();
        assert!(close(relative_success(&p, &probe).unwrap(), 0.28125, 1e-12));
        let vac = Probe::new(c(1.0), c(0.0)).unwrap();
        assert!(close(relative_success(&p, &vac).unwrap(), 0.25, 1e-15));
    }

    #[test]
    fn grids() {
        let g = log_gain_grid(1.0, 100.0, 3).unwrap();
        assert_eq!(g[0], 1.0);
        assert_eq!(g[2], 100.0);
        assert!(close(g[1], 10.0, 1e-12));
        assert_eq!(log_gain_grid(2.0, 2.0, 1).unwrap(), vec![2.0]);
        assert_eq!(linear_gain_grid(1.0, 2.0, 3).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(default_gain_points(1.0, 10.0), 201);
        assert!(log_gain_grid(0.5, 2.0, 3).is_err());
        assert!(log_gain_grid(2.0, 1.0, 3).is_err());
        assert!(log_gain_grid(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn optimize_nu_examples() {
        let tau = 0.5f64.sqrt();
        let probe = Probe::balanced();
        let opt = optimize_nu(tau, 1.0 / 1.125, &probe).unwrap();
        assert!(close(opt.nu * opt.nu, 0.5, 1e-12));
        assert!(close(opt.g, 2.0, 1e-12));
        assert!(close(opt.p_succ, 0.28125, 1e-12));

        let bare = matched_fidelity(tau, 1.0);
        let opt = optimize_nu(tau, bare, &probe).unwrap();
        assert!(close(opt.nu, 1.0, 1e-12));
        assert!(close(opt.g, 1.0 / tau, 1e-12));

        let tau = 0.5;
        let opt = optimize_nu(tau, 0.999, &probe).unwrap();
        assert!(close(opt.nu * opt.nu, 2.0 * (0.001 / 0.999) / 0.75, 1e-15));
        let chi = protocol_choi(&ChannelParams::new(tau, opt.nu, opt.g, 1).unwrap())
            .unwrap()
            .normalized()
            .unwrap();
        assert!(close(channel_fidelity(&chi).unwrap(), 0.999, 1e-9));
    }

    #[test]
    fn optimize_nu_rejects_infeasible_targets() {
        let probe = Probe::balanced();
        assert!(matches!(
            optimize_nu(0.5, 1.0, &probe),
            Err(Error::Infeasible(_))
        ));
        assert!(optimize_nu(0.5, 0.0, &probe).is_err());
        assert!(optimize_nu(0.0, 0.9, &probe).is_err());
        let lossless = optimize_nu(1.0, 0.99, &probe).unwrap();
        assert_eq!(lossless.nu, 1.0);
    }

    #[test]
    fn matched_closed_forms_on_a_grid() {
        for tau in [0.3, 0.5, 0.8] {
            for nu in [0.1, 0.4, 0.9] {
                let p = ChannelParams::matched(tau, nu, 1).unwrap();
                let r = evaluate_point(&p, &Probe::balanced()).unwrap();
                assert!(close(r.fidelity, matched_fidelity(tau, nu), 1e-10));
                assert!(close(r.t_eff, matched_transmittance(tau, nu), 1e-10));
            }
        }
    }
}
