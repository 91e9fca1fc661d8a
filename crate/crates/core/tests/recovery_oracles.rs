mod common;

use common::*;
use dschan::bem::cebem_basis;
use dschan::channel::{apply_channel_time, generate_ds_channel, generate_support, ofdm_demodulate};
use dschan::linalg::UnitaryDft;
use dschan::pilot::assemble_frame;
use dschan::recovery::{
    ls_estimate, mutual_coherence, omp, somp, EstimatorSetup, SelectionMode, SompOptions, StopRule,
};
use dschan::smoothing::detect_strong_taps;
use dschan::{CMatrix, ChannelModel, OfdmSymbol, PilotPlan, C64};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn coherence_matches_brute_force() {
    let cfg = config(96, 16, 8, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    for _ in 0..20 {
        let phi = random_phi(&cfg, &mut rng);
        let fast = mutual_coherence(&phi.phi).unwrap();
        assert!((fast - coherence_oracle(&phi.phi)).abs() < 1e-12);
    }
}

#[test]
fn somp_matches_reference_implementation_on_noisy_data() {
    let cfg = config(128, 16, 8, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for _ in 0..30 {
        let phi = random_phi(&cfg, &mut rng);
        let y = CMatrix::from_fn(16, 3, |_, _| cgauss(&mut rng));
        let got = somp(&phi, &y, &SompOptions::iterations(4)).unwrap();
        let (order, x) = somp_oracle(&phi.phi, &y, 4);
        assert_eq!(got.selection_order, order);
        assert!(max_abs_diff(&got.x, &x) < 1e-9);
    }
}

#[test]
fn single_row_selection_equals_exhaustive_search() {
    let cfg = config(32, 4, 4, 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    for _ in 0..100 {
        let phi = random_phi(&cfg, &mut rng);
        let tap = sample(&mut rng, 4, 1).index(0);
        let (x, _) = joint_sparse(&phi, &[tap], 3, &mut rng);
        let y = &phi.phi * x;
        let got = somp(&phi, &y, &SompOptions::iterations(1)).unwrap();
        assert_eq!(got.support_rows, vec![best_single_column(&phi.phi, &y)]);
    }
}

#[test]
fn noiseless_joint_sparse_recovery_is_exact() {
    let cfg = config(256, 32, 8, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..100 {
        let phi = random_phi(&cfg, &mut rng);
        let taps = sample(&mut rng, 8, 2).into_vec();
        let (x, rows) = joint_sparse(&phi, &taps, 3, &mut rng);
        let y = &phi.phi * &x;
        let got = somp(&phi, &y, &SompOptions::iterations(4)).unwrap();
        assert_eq!(got.support_rows, rows);
        assert!(max_abs_diff(&got.x, &x) < 1e-9);
    }
}

#[test]
fn omp_is_somp_on_one_column_with_monotone_residual() {
    let cfg = config(128, 16, 8, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    let phi = random_phi(&cfg, &mut rng);
    let y: Vec<C64> = (0..16).map(|_| cgauss(&mut rng)).collect();
    let a = omp(&phi, &y, 6).unwrap();
    let (order, x) = somp_oracle(&phi.phi, &CMatrix::from_column_slice(16, 1, &y), 6);
    assert_eq!(a.selection_order, order);
    assert!(max_abs_diff(&a.x, &x) < 1e-9);
    assert!(a.residual_norms.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn block_mode_selects_whole_taps() {
    let cfg = config(256, 32, 8, 2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(305);
    let phi = random_phi(&cfg, &mut rng);
    let (x, rows) = joint_sparse(&phi, &[1, 6], 3, &mut rng);
    let y = &phi.phi * &x;
    let opts = SompOptions {
        stop: StopRule::Iterations(2),
        mode: SelectionMode::Block,
    };
    let got = somp(&phi, &y, &opts).unwrap();
    assert_eq!(got.support_rows, rows);
    assert!(max_abs_diff(&got.x, &x) < 1e-9);
}

#[test]
fn residual_stop_ends_once_data_is_explained() {
    let cfg = config(256, 32, 8, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(306);
    let phi = random_phi(&cfg, &mut rng);
    let (x, rows) = joint_sparse(&phi, &[0, 3], 3, &mut rng);
    let y = &phi.phi * &x;
    let opts = SompOptions {
        stop: StopRule::Residual {
            tol: 1e-9,
            max_iterations: 12,
        },
        mode: SelectionMode::Row,
    };
    let got = somp(&phi, &y, &opts).unwrap();
    assert_eq!(got.support_rows, rows);
    assert!(*got.residual_norms.last().unwrap() < 1e-9);
}

#[test]
fn ls_baseline_is_the_minimum_norm_solution() {
    let cfg = config(128, 16, 8, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(307);
    let phi = random_phi(&cfg, &mut rng);
    let y = CMatrix::from_fn(16, 3, |_, _| cgauss(&mut rng));
    let got = ls_estimate(&phi, &y).unwrap();
    let oracle = phi.phi.clone().pseudo_inverse(1e-12).unwrap() * &y;
    assert!(max_abs_diff(&got, &oracle) < 1e-10);
}

#[test]
fn detected_strong_taps_match_the_recovered_support() {
    let cfg = dschan::SystemConfig {
        antennas: 4,
        snr_db: None,
        channel_model: ChannelModel::BemExact,
        ..dschan::SystemConfig::desk_scale()
    };
    let n = cfg.subcarriers;
    let dft = UnitaryDft::new(n);
    let basis = cebem_basis(n, cfg.bem_order).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(308);
    for _ in 0..10 {
        let support = generate_support(cfg.taps, cfg.strong_taps, &mut rng).unwrap();
        let truth = generate_ds_channel(&cfg, &support, &basis, &mut rng).unwrap();
        let plan = PilotPlan::generate(&cfg, &mut rng).unwrap();
        let zeros = vec![C64::new(0.0, 0.0); plan.data_len()];
        let symbols: Vec<OfdmSymbol> = (0..cfg.antennas)
            .map(|a| {
                OfdmSymbol::from_freq(&dft, assemble_frame(&plan, &zeros, a).unwrap()).unwrap()
            })
            .collect();
        let y = ofdm_demodulate(&dft, &apply_channel_time(&truth, &symbols).unwrap()).unwrap();
        let setup = EstimatorSetup::new(&plan, &cfg).unwrap();
        let est = setup
            .estimate(&y, &SompOptions::iterations(cfg.strong_taps * cfg.antennas))
            .unwrap();
        assert_eq!(
            detect_strong_taps(&est.channel, cfg.strong_taps).unwrap(),
            support
        );
        let tap_rows: Vec<usize> = est
            .problem
            .support_rows
            .iter()
            .map(|r| r % cfg.taps)
            .collect();
        assert!(tap_rows.iter().all(|l| support.contains(l)));
    }
}
