//! Randomized invariants of the filters, channels and protocol.

use fockchan_core::channels::{
    loss_suppression_operators, success_probability, suppressed_channel_direct,
    suppressed_channel_simplified, ChannelParams,
};
use fockchan_core::choi::{
    channel_fidelity, choi_of_channel, effective_transmittance, matched_fidelity,
    matched_transmittance,
};
use fockchan_core::fock::{amplifier_filter, apply_filter, attenuator_filter, phase_shift};
use fockchan_core::linalg::{hermiticity_error, max_abs_diff, CMatrix};
use fockchan_core::protocol::{
    evaluate_point, log_gain_grid, optimize_nu, protocol_choi, run_protocol,
    run_protocol_with_reference, run_sweep, NuPolicy, Probe, SweepPlan,
};
use fockchan_core::{ChoiMatrix, Complex64, DensityMatrix, FockState, Operator};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(dim: usize, seed: u64) -> DensityMatrix {
    DensityMatrix::random(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_probe(seed: u64) -> Probe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Probe::new(
        Complex64::new(theta.cos(), 0.0),
        Complex64::from_polar(theta.sin(), phi),
    )
    .unwrap()
}

/// Arbitrary complex matrix; `apply_filter` accepts any square operator.
fn random_operator(dim: usize, seed: u64) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    Operator::from_matrix(m).unwrap()
}

fn kraus_weights(p: &ChannelParams, rho: &DensityMatrix) -> Vec<f64> {
    suppressed_channel_direct(p)
        .unwrap()
        .kraus_ops()
        .iter()
        .map(|k| {
            (k.matrix() * rho.matrix() * k.matrix().adjoint())
                .trace()
                .re
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn apply_filter_preserves_hermiticity_and_positivity(
        dim in 1usize..=6,
        kind in 0u8..4,
        x in 0.05f64..1.0,
        seed in any::<u64>(),
    ) {
        let rho = random_state(dim, seed);
        let op = match kind {
            0 => attenuator_filter(x, dim).unwrap(),
            1 => amplifier_filter(1.0 / x, dim - 1).unwrap(),
            2 => phase_shift(x * 10.0, dim).unwrap(),
            _ => random_operator(dim, seed.wrapping_add(1)),
        };
        let (out, p) = apply_filter(&op, &rho).unwrap();
        prop_assert!(hermiticity_error(out.matrix()) <= 1e-12);
        prop_assert!(out.min_eigenvalue() >= -1e-10);
        prop_assert!(p >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn direct_and_simplified_forms_agree(
        n_max in 1usize..=4,
        tau in 0.2f64..=1.0,
        nu in 0.1f64..=1.0,
        seed in any::<u64>(),
    ) {
        let p = ChannelParams::matched(tau, nu, n_max).unwrap();
        let rho = random_state(n_max + 1, seed);
        let direct = suppressed_channel_direct(&p).unwrap().apply(&rho).unwrap();
        let simple = suppressed_channel_simplified(&p).unwrap().apply(&rho).unwrap();
        prop_assert!(max_abs_diff(direct.matrix(), simple.matrix()) <= 1e-10);
    }

    #[test]
    fn success_probability_is_bounded_below(
        n_max in 1usize..=5,
        tau in 0.2f64..=1.0,
        nu in 0.05f64..=1.0,
        seed in any::<u64>(),
    ) {
        let p = ChannelParams::matched(tau, nu, n_max).unwrap();
        let rho = random_state(n_max + 1, seed);
        let bound = p.g.powi(-2 * n_max as i32);
        let p_general = success_probability(&p, &rho).unwrap();
        let trace = suppressed_channel_direct(&p).unwrap().apply(&rho).unwrap().trace();
        prop_assert!(p_general >= bound * (1.0 - 1e-12));
        prop_assert!((p_general - trace).abs() <= 1e-12 * trace.max(1.0));
    }

    #[test]
    fn unmatched_success_is_bounded_below(
        n_max in 1usize..=4,
        tau in 0.1f64..=1.0,
        nu in 0.05f64..=1.0,
        g in 1.0f64..50.0,
        seed in any::<u64>(),
    ) {
        let p = ChannelParams::new(tau, nu, g, n_max).unwrap();
        let rho = random_state(n_max + 1, seed);
        let trace = suppressed_channel_direct(&p).unwrap().apply(&rho).unwrap().trace();
        prop_assert!(trace >= g.powi(-2 * n_max as i32) * (nu * tau).powi(2 * n_max as i32) * (1.0 - 1e-12));
        prop_assert!(trace <= 1.0 + 1e-12);
    }

    #[test]
    fn j_photon_terms_scale_as_nu_to_2j(
        n_max in 1usize..=4,
        tau in 0.3f64..=0.95,
        nu_idx in 0usize..3,
        seed in any::<u64>(),
    ) {
        let nu = [0.1, 0.2, 0.5][nu_idx];
        let rho = random_state(n_max + 1, seed);
        let full = kraus_weights(&ChannelParams::matched(tau, nu, n_max).unwrap(), &rho);
        let half = kraus_weights(&ChannelParams::matched(tau, nu / 2.0, n_max).unwrap(), &rho);
        // Re-matching the gain rescales every term by the common g^{−2N}; the
        // weight relative to the lossless term isolates ν^{2j}.
        for j in 1..=n_max {
            let ratio = (half[j] / half[0]) / (full[j] / full[0]);
            let expected = 4f64.powi(-(j as i32));
            prop_assert!((ratio / expected - 1.0).abs() <= 1e-9, "j={} ratio={}", j, ratio);
        }
    }

    #[test]
    fn qubit_success_matches_general_form(
        tau in 0.2f64..=1.0,
        nu in 0.05f64..=1.0,
        seed in any::<u64>(),
    ) {
        let p = ChannelParams::matched(tau, nu, 1).unwrap();
        let probe = random_probe(seed);
        let rho = probe.state(1).unwrap().density();
        let p_qubit = fockchan_core::channels::qubit_success_probability(probe.c0, probe.c1, &p).unwrap();
        let p_general = success_probability(&p, &rho).unwrap();
        prop_assert!((p_qubit - p_general).abs() <= 1e-12);
    }

    #[test]
    fn state_and_channel_pictures_agree(
        tau in 0.1f64..=1.0,
        nu in 0.05f64..=1.0,
        g in 1.0f64..30.0,
    ) {
        let p = ChannelParams::new(tau, nu, g, 1).unwrap();
        let joint = joint_psi_plus();
        let (out, _) = run_protocol_with_reference(&joint, &p, 2).unwrap();
        let state_picture = ChoiMatrix::from_joint_state(&out).unwrap();
        let state_f = channel_fidelity(&state_picture).unwrap();
        let channel_f = channel_fidelity(&protocol_choi(&p).unwrap().normalized().unwrap()).unwrap();
        prop_assert!((state_f - channel_f).abs() <= 1e-10);
        let record = evaluate_point(&p, &Probe::balanced()).unwrap();
        prop_assert!((record.fidelity - state_f).abs() <= 1e-10);
    }

    #[test]
    fn phase_conjugation_leaves_fidelity_unchanged(
        tau in 0.1f64..=1.0,
        nu in 0.05f64..=1.0,
        g in 1.0f64..30.0,
        phi in -10.0f64..10.0,
    ) {
        let p = ChannelParams::new(tau, nu, g, 1).unwrap();
        let ch = suppressed_channel_direct(&p).unwrap();
        let before = fockchan_core::KrausChannel::from_filter(phase_shift(phi, 2).unwrap());
        let after = fockchan_core::KrausChannel::from_filter(phase_shift(-phi, 2).unwrap());
        let wrapped = before.then(&ch).unwrap().then(&after).unwrap();
        let f0 = channel_fidelity(&choi_of_channel(&ch).unwrap().normalized().unwrap()).unwrap();
        let f1 = channel_fidelity(&choi_of_channel(&wrapped).unwrap().normalized().unwrap()).unwrap();
        prop_assert!((f0 - f1).abs() <= 1e-12);
    }

    #[test]
    fn matched_closed_forms_match_pipeline(
        tau in 0.1f64..=1.0,
        nu in 0.05f64..=1.0,
    ) {
        let p = ChannelParams::matched(tau, nu, 1).unwrap();
        let ch = suppressed_channel_direct(&p).unwrap();
        let f = channel_fidelity(&choi_of_channel(&ch).unwrap().normalized().unwrap()).unwrap();
        let t = effective_transmittance(&ch).unwrap();
        prop_assert!((f - matched_fidelity(tau, nu)).abs() <= 1e-10);
        prop_assert!((t - matched_transmittance(tau, nu)).abs() <= 1e-10);
    }

    #[test]
    fn optimize_nu_reaches_target(
        tau2 in 0.05f64..0.95,
        target in 0.7f64..0.9999,
    ) {
        let tau = tau2.sqrt();
        let opt = optimize_nu(tau, target, &Probe::balanced()).unwrap();
        let p = ChannelParams::matched(tau, opt.nu, 1).unwrap();
        let chi = protocol_choi(&p).unwrap().normalized().unwrap();
        let achieved = channel_fidelity(&chi).unwrap();
        if opt.nu < 1.0 {
            prop_assert!((achieved - target).abs() <= 1e-9);
        } else {
            prop_assert!(achieved >= target - 1e-9);
        }
        let probe = Probe::balanced().state(1).unwrap().density();
        let (_, p_succ) = run_protocol(&probe, &p).unwrap();
        prop_assert!((p_succ - opt.p_succ).abs() <= 1e-12);
    }
}

/// `|Ψ+⟩⟨Ψ+|` on channel ⊗ reference, both two-level.
fn joint_psi_plus() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    // Ordering channel ⊗ reference: |01⟩ → index 1, |10⟩ → index 2.
    FockState::new(vec![z, Complex64::new(s, 0.0), Complex64::new(s, 0.0), z])
        .unwrap()
        .density()
}

#[test]
fn filters_are_mutual_inverses_up_to_prefactor() {
    for n_max in 0..=8 {
        for nu in [0.1, 0.3, 0.5, 0.9, 1.0] {
            let g = 1.0 / nu;
            let prod = attenuator_filter(nu, n_max + 1)
                .unwrap()
                .compose(&amplifier_filter(g, n_max).unwrap())
                .unwrap();
            let expected = CMatrix::identity(n_max + 1, n_max + 1).scale(g.powi(-(n_max as i32)));
            assert!(max_abs_diff(prod.matrix(), &expected) <= 1e-14);
        }
    }
}

#[test]
fn phase_shift_is_unitary() {
    for dim in 1..=8 {
        for phi in [-7.0, -0.3, 0.0, 1.0, 3.2, 100.0] {
            let u = phase_shift(phi, dim).unwrap();
            let prod = u.dagger().compose(&u).unwrap();
            assert!(max_abs_diff(prod.matrix(), &CMatrix::identity(dim, dim)) <= 1e-12);
        }
    }
}

#[test]
fn suppression_operators_start_with_identity() {
    let b = loss_suppression_operators(0.6, 3).unwrap();
    assert_eq!(b.len(), 4);
    assert!(max_abs_diff(b[0].matrix(), &CMatrix::identity(4, 4)) <= 1e-15);
}

#[test]
fn vacuum_noise_term_scales_as_nu_squared() {
    for tau2 in [0.25, 0.5, 0.75] {
        let tau: f64 = f64::sqrt(tau2);
        let noise_ratio = |nu: f64| {
            let chi = protocol_choi(&ChannelParams::matched(tau, nu, 1).unwrap()).unwrap();
            // Vacuum noise relative to the undisturbed vacuum-input term.
            chi.entry(0, 0).re / chi.entry(2, 2).re
        };
        let reference = noise_ratio(1.0);
        for nu in [0.1, 0.2, 0.5] {
            let rel = noise_ratio(nu) / reference / (nu * nu);
            assert!((rel - 1.0).abs() <= 1e-9, "tau2={tau2} nu={nu} rel={rel}");
        }
    }
}

fn fig4_plan(tau: f64, gains: Vec<f64>) -> SweepPlan {
    SweepPlan {
        taus: vec![tau],
        gains,
        nu_policy: NuPolicy::Fig4,
        probe: Probe::balanced(),
        truncation: 1,
    }
}

#[test]
fn fig4_curves_are_monotone() {
    for tau2 in [0.25, 0.5, 0.75] {
        let records = run_sweep(&fig4_plan(
            f64::sqrt(tau2),
            log_gain_grid(1.0, 100.0, 100).unwrap(),
        ))
        .unwrap();
        for w in records.windows(2) {
            assert!(
                w[1].fidelity >= w[0].fidelity - 1e-12,
                "tau2={tau2} g={}",
                w[1].g
            );
            assert!(w[1].t_eff >= w[0].t_eff - 1e-12, "tau2={tau2} g={}", w[1].g);
        }
    }
}

#[test]
fn fig4_fidelity_approaches_one() {
    let r = run_sweep(&fig4_plan(0.5, vec![100.0, 1e3, 1e4])).unwrap();
    // ν = 1/(gτ) = 0.02 at g = 100: F = 1/(1 + 0.0004 · 0.75 / 2).
    assert!(
        (r[0].fidelity - 1.0 / 1.00015).abs() <= 1e-12,
        "F={}",
        r[0].fidelity
    );
    for (rec, g) in r.iter().zip([100.0, 1e3, 1e4]) {
        let deficit = 1.0 - rec.fidelity;
        assert!(
            deficit <= 0.375 / (0.25 * g * g),
            "g={g} F={}",
            rec.fidelity
        );
    }
    assert!(r[2].fidelity >= 0.9999999);
}

#[test]
fn success_scales_as_inverse_gain_squared() {
    for tau2 in [0.25, 0.5, 0.75] {
        let tau: f64 = f64::sqrt(tau2);
        for g in [20.0, 40.0, 80.0] {
            let r = run_sweep(&fig4_plan(tau, vec![g, 2.0 * g])).unwrap();
            let ratio = r[1].p_succ / r[0].p_succ;
            assert!(
                (ratio / 0.25 - 1.0).abs() <= 0.05,
                "tau2={tau2} g={g} ratio={ratio}"
            );
        }
    }
}

#[test]
fn random_state_inputs_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in 1..=6 {
        let rho = DensityMatrix::random(dim, &mut rng);
        assert!(rho.validate().is_ok());
    }
}
