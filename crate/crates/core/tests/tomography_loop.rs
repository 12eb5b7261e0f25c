//! Closed-loop tomography: simulate counts from a known χ and reconstruct it.

use fockchan_core::channels::{loss_channel, suppressed_channel_direct, ChannelParams};
use fockchan_core::choi::choi_of_channel;
use fockchan_core::linalg::CMatrix;
use fockchan_core::tomography::{
    canonical_settings, extended_settings, ideal_observations, maximum_likelihood,
    reconstruct_choi, reconstruct_with, simulate_counts, MlOptions, Support,
};
use fockchan_core::{ChoiMatrix, Complex64, KrausChannel, Operator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random passive qubit channel: diagonal Kraus operators plus a photon-loss
/// operator, rescaled so the largest effect eigenvalue lies in [0.3, 1].
fn random_passive_channel<R: Rng>(rng: &mut R) -> KrausChannel {
    let z = Complex64::new(0.0, 0.0);
    let mut mats: Vec<CMatrix> = (0..2)
        .map(|_| CMatrix::from_row_slice(2, 2, &[complex(rng), z, z, complex(rng)]))
        .collect();
    mats.push(CMatrix::from_row_slice(2, 2, &[z, complex(rng), z, z]));
    let effect = mats
        .iter()
        .fold(CMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
    let top = effect[(0, 0)].re.max(effect[(1, 1)].re);
    let target: f64 = rng.random_range(0.3..=1.0);
    let scale = (target / top).sqrt();
    KrausChannel::new(
        mats.into_iter()
            .map(|m| Operator::from_matrix(m.scale(scale)).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Random channel whose Kraus operators mix vacuum and one-photon amplitudes
/// without creating photons (upper triangular in the Fock basis).
fn random_general_channel<R: Rng>(rng: &mut R) -> KrausChannel {
    let z = Complex64::new(0.0, 0.0);
    let mats: Vec<CMatrix> = (0..3)
        .map(|_| CMatrix::from_row_slice(2, 2, &[complex(rng), complex(rng), z, complex(rng)]))
        .collect();
    let effect = mats
        .iter()
        .fold(CMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
    let top = fockchan_core::linalg::hermitian_eigenvalues(&effect)[1];
    let scale = (0.9 / top).sqrt();
    KrausChannel::new(
        mats.into_iter()
            .map(|m| Operator::from_matrix(m.scale(scale)).unwrap())
            .collect(),
    )
    .unwrap()
}

fn normalized_choi(ch: &KrausChannel) -> ChoiMatrix {
    choi_of_channel(ch).unwrap().normalized().unwrap()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[test]
fn exact_frequencies_recover_random_passive_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let settings = canonical_settings();
    for k in 0..50 {
        let truth = normalized_choi(&random_passive_channel(&mut rng));
        let data = ideal_observations(&truth, &settings, 1e6).unwrap();
        let rec = reconstruct_with(&data, &MlOptions::exact_data()).unwrap();
        assert_eq!(rec.support, Support::BlockDiagonal);
        let td = rec.choi.trace_distance(&truth);
        assert!(td <= 1e-7, "channel {k}: trace distance {td:e}");
        assert!(rec.choi.min_eigenvalue() >= -1e-10);
    }
}

#[test]
fn exact_frequencies_recover_general_channels_with_extended_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let settings = extended_settings();
    for k in 0..20 {
        let truth = normalized_choi(&random_general_channel(&mut rng));
        let data = ideal_observations(&truth, &settings, 1e6).unwrap();
        let rec = reconstruct_with(&data, &MlOptions::exact_data()).unwrap();
        assert_eq!(rec.support, Support::Full);
        let td = rec.choi.trace_distance(&truth);
        assert!(td <= 1e-7, "channel {k}: trace distance {td:e}");
    }
}

#[test]
fn sampled_reconstruction_of_loss_channel_is_accurate() {
    let truth = normalized_choi(&loss_channel(std::f64::consts::FRAC_1_SQRT_2, 1).unwrap());
    let settings = canonical_settings();
    let fidelities: Vec<f64> = (0..20)
        .map(|seed| {
            let counts = simulate_counts(&truth, &settings, 100_000, seed).unwrap();
            reconstruct_choi(&counts)
                .unwrap()
                .choi
                .state_fidelity(&truth)
        })
        .collect();
    let med = median(fidelities);
    assert!(med >= 0.99, "median fidelity {med}");
}

#[test]
fn reconstruction_error_decreases_with_counts() {
    let p = ChannelParams::matched(
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
        1,
    )
    .unwrap();
    let truth = normalized_choi(&suppressed_channel_direct(&p).unwrap());
    let settings = canonical_settings();
    let errors: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&total| {
            let per_seed = (0..15)
                .map(|seed| {
                    let counts = simulate_counts(&truth, &settings, total, 1000 + seed).unwrap();
                    reconstruct_choi(&counts)
                        .unwrap()
                        .choi
                        .trace_distance(&truth)
                })
                .collect();
            median(per_seed)
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn likelihood_is_monotone_when_iterating_by_hand() {
    let truth = normalized_choi(&loss_channel(0.6, 1).unwrap());
    let counts = simulate_counts(&truth, &canonical_settings(), 5_000, 5).unwrap();
    let data: Vec<_> = counts.iter().map(Into::into).collect();
    let mut previous = f64::NEG_INFINITY;
    for max_iterations in [1, 2, 5, 20, 100, 1000] {
        let opts = MlOptions {
            max_iterations,
            ..MlOptions::default()
        };
        let rec = maximum_likelihood(&data, &opts).unwrap();
        assert!(rec.log_likelihood >= previous - 1e-12);
        previous = rec.log_likelihood;
    }
}

#[test]
fn simulated_counts_are_reproducible() {
    let truth = normalized_choi(&loss_channel(0.8, 1).unwrap());
    let a = simulate_counts(&truth, &canonical_settings(), 10_000, 42).unwrap();
    let b = simulate_counts(&truth, &canonical_settings(), 10_000, 42).unwrap();
    let c = simulate_counts(&truth, &canonical_settings(), 10_000, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
