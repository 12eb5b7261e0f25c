//! Fixtures shared by the benchmarks.

use fockchan_core::protocol::{default_gain_points, log_gain_grid};
use fockchan_core::tomography::{canonical_settings, simulate_counts};
use fockchan_core::{ChannelParams, CountRecord, NuPolicy, Probe, Result, SweepPlan};

/// Default loss levels over gains 1 to 10 at 200 points per decade.
pub fn default_sweep_plan(truncation: usize) -> Result<SweepPlan> {
    Ok(SweepPlan {
        taus: [0.75f64, 0.5, 0.25].iter().map(|t2| t2.sqrt()).collect(),
        gains: log_gain_grid(1.0, 10.0, default_gain_points(1.0, 10.0))?,
        nu_policy: NuPolicy::Fig4,
        probe: Probe::balanced(),
        truncation,
    })
}

/// Canonical-setting counts of the protocol channel at a matched point.
pub fn sampled_counts(tau: f64, nu: f64, total_counts: u64, seed: u64) -> Result<Vec<CountRecord>> {
    let p = ChannelParams::matched(tau, nu, 1)?;
    let chi = fockchan_core::protocol::protocol_choi(&p)?.normalized()?;
    simulate_counts(&chi, &canonical_settings(), total_counts, seed)
}
