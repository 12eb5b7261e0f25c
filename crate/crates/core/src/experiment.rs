//! Model of the two-photon-interference implementation of the protocol.
//!
//! The amplifier is driven by an idler photon `cos θ|0⟩_V|1⟩_H + sin θ|1⟩_V|0⟩_H`
//! and realizes the filter `G_1(g)` with `g = tan θ`, heralding less often than
//! the ideal filter by `g²/(2(1+g²))`. Imperfect two-photon interference
//! (Hong-Ou-Mandel visibility `V < 1`) is modeled as a mixture of the ideal
//! heralded filter with its Fock-dephased counterpart:
//!
//! ```text
//! E(ρ) = V · GρG† + (1−V) · D(GρG†)
//! ```
//!
//! where `D` removes all Fock-basis coherences. This is a modeling assumption:
//! it has the right `V = 1` limit and a single free parameter, nothing more.
//! Along the matched curve the model gives a channel fidelity of
//! `(1+V)/(2 + ν²(1−τ²))`, saturating at `(1+V)/2` as `g → ∞`.
//!
//! In the experiment the attenuation is folded into the probe preparation, so
//! measured relative rates are multiplied by the attenuator's heralding
//! probability (`½(1+ν²)` for the balanced probe) before being compared with
//! the ideal success probability.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{loss_channel, qubit_success_probability, ChannelParams, KrausChannel};
use crate::choi::{self, ChoiMatrix};
use crate::error::{Error, Result};
use crate::fock::{amplifier_filter, attenuator_filter, Operator};
use crate::linalg::c;
use crate::protocol::Probe;

/// Default Hong-Ou-Mandel visibility.
pub const MEASURED_VISIBILITY: f64 = 0.947;
/// Measured channel fidelity of the identity channel; a calibration baseline for overlays.
pub const IDENTITY_CHANNEL_FIDELITY: f64 = 0.958;
/// Rough collection × detection efficiency of the heralding arm.
pub const DEFAULT_ETA_CD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// Idler polarization angle, radians.
    pub theta: f64,
    pub visibility: f64,
    /// Combined collection × detection efficiency.
    pub eta_cd: f64,
    pub nu: f64,
    pub tau: f64,
}

impl ExperimentParams {
    pub fn new(theta: f64, visibility: f64, eta_cd: f64, nu: f64, tau: f64) -> Result<Self> {
        gain(theta)?;
        check_visibility(visibility)?;
        if !(eta_cd > 0.0 && eta_cd <= 1.0) {
            return Err(Error::domain("eta_cd", eta_cd, "0 < eta_cd <= 1"));
        }
        // Range checks for tau and nu.
        ChannelParams::new(tau, nu, 1.0, 1)?;
        Ok(ExperimentParams {
            theta,
            visibility,
            eta_cd,
            nu,
            tau,
        })
    }

    /// Parameters realizing gain `g`.
    pub fn with_gain(g: f64, visibility: f64, eta_cd: f64, nu: f64, tau: f64) -> Result<Self> {
        Self::new(theta_for_gain(g)?, visibility, eta_cd, nu, tau)
    }

    pub fn gain(&self) -> f64 {
        gain(self.theta).expect("validated at construction")
    }
}

/// `g = tan θ` for `θ ∈ [π/4, π/2)`.
pub fn gain(theta: f64) -> Result<f64> {
    if !(FRAC_PI_4..FRAC_PI_2).contains(&theta) {
        return Err(Error::domain("theta", theta, "pi/4 <= theta < pi/2"));
    }
    // tan(π/4) rounds to just below one in binary floating point.
    Ok(theta.tan().max(1.0))
}

pub fn theta_for_gain(g: f64) -> Result<f64> {
    if !(g >= 1.0 && g.is_finite()) {
        return Err(Error::domain("g", g, "finite g >= 1"));
    }
    Ok(g.atan().max(FRAC_PI_4))
}

/// Success of the interference amplifier relative to the optimal `G_1(g)`: `g²/(2(1+g²))`.
pub fn implementation_penalty(g: f64) -> Result<f64> {
    if g.is_nan() || g < 1.0 {
        return Err(Error::domain("g", g, "g >= 1"));
    }
    let g2 = g * g;
    Ok(g2 / (2.0 * (1.0 + g2)))
}

fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain("visibility", v, "0 <= V <= 1"));
    }
    Ok(())
}

/// Kraus form of `V·GρG† + (1−V)·D(GρG†)` with `G = G_N(g)`.
pub fn imperfect_amplifier_channel(g: f64, visibility: f64, n_max: usize) -> Result<KrausChannel> {
    check_visibility(visibility)?;
    let amp = amplifier_filter(g, n_max)?;
    let dim = n_max + 1;
    let mut ops = vec![amp.scale(visibility.sqrt())];
    if visibility < 1.0 {
        let weight = (1.0 - visibility).sqrt();
        for n in 0..dim {
            let mut proj = vec![c(0.0); dim];
            proj[n] = c(weight);
            ops.push(&Operator::diagonal_filter(&proj)? * &amp);
        }
    }
    KrausChannel::new(ops)
}

/// Attenuation, loss, and the imperfect amplifier on the vacuum/single-photon space.
pub fn imperfect_protocol_channel(
    tau: f64,
    nu: f64,
    g: f64,
    visibility: f64,
) -> Result<KrausChannel> {
    let attenuate = KrausChannel::from_filter(attenuator_filter(nu, 2)?);
    attenuate
        .then(&loss_channel(tau, 1)?)?
        .then(&imperfect_amplifier_channel(g, visibility, 1)?)
}

/// Normalized Choi matrix predicted by the model.
pub fn model_choi(tau: f64, nu: f64, g: f64, visibility: f64) -> Result<ChoiMatrix> {
    choi::choi_of_channel(&imperfect_protocol_channel(tau, nu, g, visibility)?)?.normalized()
}

pub fn model_fidelity(tau: f64, nu: f64, g: f64, visibility: f64) -> Result<f64> {
    choi::channel_fidelity(&model_choi(tau, nu, g, visibility)?)
}

/// Model fidelity on the matched curve, `(1+V)/(2 + ν²(1−τ²))`.
pub fn matched_model_fidelity(tau: f64, nu: f64, visibility: f64) -> f64 {
    (1.0 + visibility) / (2.0 + nu * nu * (1.0 - tau * tau))
}

/// High-gain limit of the model fidelity, `(1+V)/2`.
pub fn saturation_fidelity(visibility: f64) -> f64 {
    (1.0 + visibility) / 2.0
}

/// Predicted coincidence rates for one setting, absolute and normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPrediction {
    /// Heralded rate per probe pair, including `η_Cη_D` and the implementation penalty.
    pub absolute_rate: f64,
    /// Rate of the identity configuration (`τ = ν = 1`) through the same heralding stage.
    pub reference_rate: f64,
    /// `absolute_rate / reference_rate`, as read off the raw data.
    pub p_rel_raw: f64,
    /// `p_rel_raw` times the attenuator heralding probability; comparable with the ideal success probability.
    pub p_rel: f64,
}

pub fn experiment_prediction(p: &ExperimentParams, probe: &Probe) -> Result<ExperimentPrediction> {
    let p = ExperimentParams::new(p.theta, p.visibility, p.eta_cd, p.nu, p.tau)?;
    let probe = Probe::new(probe.c0, probe.c1)?;
    let g = p.gain();
    // The attenuator is absorbed into the state preparation: the probe is
    // prepared as (c0|0⟩ + ν c1|1⟩)/√s, where s is the attenuator's heralding probability.
    let s = probe.c0.norm_sqr() + p.nu * p.nu * probe.c1.norm_sqr();
    let prepared_c0 = probe.c0 / s.sqrt();
    let prepared_c1: Complex64 = probe.c1 * (p.nu / s.sqrt());
    let transmitted = ChannelParams::new(p.tau, 1.0, g, 1)?;
    let p_prepared = qubit_success_probability(prepared_c0, prepared_c1, &transmitted)?;
    let stage = p.eta_cd * implementation_penalty(g)?;
    let absolute_rate = stage * p_prepared;
    let p_rel_raw = absolute_rate / stage;
    Ok(ExperimentPrediction {
        absolute_rate,
        reference_rate: stage,
        p_rel_raw,
        p_rel: s * p_rel_raw,
    })
}

/// Corrected relative success probability; see [`experiment_prediction`].
pub fn experimental_p_rel(p: &ExperimentParams, probe: &Probe) -> Result<f64> {
    Ok(experiment_prediction(p, probe)?.p_rel)
}
