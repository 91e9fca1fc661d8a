//! Dense numerical identities behind the estimator, runnable from the CLI.
//!
//! Each check builds the relevant operators as explicit matrices and compares
//! them against the structured fast paths used elsewhere in the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bem::{
    bem_reconstruct, cebem_basis, freq_channel_matrix, BemCoefficients, ChannelRealization,
};
use crate::channel::{apply_channel_time, ofdm_demodulate, OfdmSymbol, SystemConfig};
use crate::error::Result;
use crate::harness::nmse_db;
use crate::linalg::{dft_matrix, frobenius, CMatrix, UnitaryDft, C64, ZERO};
use crate::pilot::{assemble_frame, index_sets, qpsk_symbols, PilotPlan};
use crate::recovery::{extract_observations, pack_coefficients, EstimatorSetup, SompOptions};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// `N`-order identity shifted down circularly by `alpha` rows.
pub fn shift_matrix(n: usize, alpha: isize) -> CMatrix {
    CMatrix::from_fn(n, n, |m, k| {
        if (k as isize + alpha).rem_euclid(n as isize) as usize == m {
            C64::new(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

/// Largest `‖W diag(v_d) W^H − E^{↓α}‖_F` over all basis columns.
pub fn shift_identity_error(n: usize, order: usize) -> Result<f64> {
    let basis = cebem_basis(n, order)?;
    let w = dft_matrix(n);
    let mut worst: f64 = 0.0;
    for d in 0..order {
        let vd = CMatrix::from_diagonal(&basis.matrix().column(d).into_owned());
        let dense = &w * vd * w.adjoint();
        worst = worst.max(frobenius(&(dense - shift_matrix(n, basis.offset(d)))));
    }
    Ok(worst)
}

fn random_coefficients<R: Rng>(
    antennas: usize,
    order: usize,
    taps: usize,
    support: &[usize],
    rng: &mut R,
) -> BemCoefficients {
    BemCoefficients::from_fn(antennas, order, taps, |_, _, l| {
        if support.contains(&l) {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        } else {
            ZERO
        }
    })
}

fn small_config(n: usize, groups: usize, antennas: usize) -> SystemConfig {
    SystemConfig {
        subcarriers: n,
        pilot_groups: groups,
        taps: 8,
        strong_taps: 2,
        bem_order: 3,
        antennas,
        snr_db: None,
        ..SystemConfig::desk_scale()
    }
}

/// For every antenna and every pair `(d̄, d)`, checks that
/// `U_d̄ E^{↓α_d} diag(S)` equals `diag(P)[I]_{S_cen}` when `d̄ = d` and is
/// zero otherwise. Returns the largest deviation.
pub fn selection_identity_error(n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = n / 8;
    let cfg = small_config(n, groups, 2);
    let plan = PilotPlan::generate(&cfg, &mut rng)?;
    let sets = index_sets(&plan);
    let basis = cebem_basis(n, cfg.bem_order)?;
    let mut worst: f64 = 0.0;
    for a in 0..cfg.antennas {
        let data = qpsk_symbols(plan.data_len(), &mut rng);
        let frame = assemble_frame(&plan, &data, a)?;
        let diag_s = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(frame));
        let expected = CMatrix::from_fn(plan.groups(), n, |g, k| {
            if k == plan.centers[g] {
                plan.value(g, a)
            } else {
                ZERO
            }
        });
        for (dbar, rows) in sets.sets.iter().enumerate() {
            let u = CMatrix::from_fn(rows.len(), n, |r, k| {
                if rows[r] == k {
                    C64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            });
            for d in 0..cfg.bem_order {
                let product = &u * shift_matrix(n, basis.offset(d)) * &diag_s;
                let dev = if dbar == d {
                    frobenius(&(product - &expected))
                } else {
                    frobenius(&product)
                };
                worst = worst.max(dev);
            }
        }
    }
    Ok(worst)
}

/// Relative gap between the dense frequency-domain matrix and `W H_t W^H`
/// built entrywise from the time-domain channel.
pub fn freq_matrix_error(n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = cebem_basis(n, 3)?;
    let theta = random_coefficients(1, 3, 4, &[0, 1, 2, 3], &mut rng);
    let ch = bem_reconstruct(&theta, &basis)?;
    let ht = CMatrix::from_fn(n, n, |p, q| {
        let l = (p + n - q) % n;
        if l < ch.taps() {
            ch.get(0, p, l)
        } else {
            ZERO
        }
    });
    let w = dft_matrix(n);
    let direct = &w * ht * w.adjoint();
    let model = freq_channel_matrix(&theta, 0, &basis)?;
    Ok(frobenius(&(&model - &direct)) / frobenius(&direct))
}

/// Outcome of the noiseless, data-free, BEM-exact end-to-end check.
#[derive(Debug, Clone, Copy)]
pub struct ExactRecovery {
    /// `‖Y_R − Φ X‖_F / ‖Φ X‖_F`.
    pub observation_error: f64,
    pub nmse_db: f64,
}

/// Simulate a BEM-exact channel through the time-domain model and check both
/// the observation identity and end-to-end SOMP recovery.
pub fn exact_recovery(cfg: &SystemConfig, seed: u64) -> Result<ExactRecovery> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.subcarriers;
    let support = crate::channel::generate_support(cfg.taps, cfg.strong_taps, &mut rng)?;
    let basis = cebem_basis(n, cfg.bem_order)?;
    let theta = random_coefficients(cfg.antennas, cfg.bem_order, cfg.taps, &support, &mut rng);
    let truth = bem_reconstruct(&theta, &basis)?;
    let plan = PilotPlan::generate(cfg, &mut rng)?;
    let dft = UnitaryDft::new(n);
    let symbols = (0..cfg.antennas)
        .map(|a| {
            OfdmSymbol::from_freq(
                &dft,
                assemble_frame(&plan, &vec![ZERO; plan.data_len()], a)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let y = ofdm_demodulate(&dft, &apply_channel_time(&truth, &symbols)?)?;

    let setup = EstimatorSetup::new(&plan, cfg)?;
    let y_r = extract_observations(&y, &setup.sets)?;
    let model = &setup.phi.phi * pack_coefficients(&theta);
    let observation_error = frobenius(&(&y_r - &model)) / frobenius(&model);

    let est = setup.estimate(&y, &SompOptions::iterations(cfg.strong_taps * cfg.antennas))?;
    Ok(ExactRecovery {
        observation_error,
        nmse_db: nmse_db(&est.channel, &truth)?,
    })
}

/// Largest change of the selected received values when the data
/// subcarriers are zeroed, for a BEM-exact channel.
pub fn ici_free_deviation(cfg: &SystemConfig, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.subcarriers;
    let support = crate::channel::generate_support(cfg.taps, cfg.strong_taps, &mut rng)?;
    let basis = cebem_basis(n, cfg.bem_order)?;
    let theta = random_coefficients(cfg.antennas, cfg.bem_order, cfg.taps, &support, &mut rng);
    let truth: ChannelRealization = bem_reconstruct(&theta, &basis)?;
    let plan = PilotPlan::generate(cfg, &mut rng)?;
    let dft = UnitaryDft::new(n);
    let sets = index_sets(&plan);
    let received = |with_data: bool, rng: &mut ChaCha8Rng| -> Result<CMatrix> {
        let symbols = (0..cfg.antennas)
            .map(|a| {
                let data = if with_data {
                    qpsk_symbols(plan.data_len(), rng)
                } else {
                    vec![ZERO; plan.data_len()]
                };
                OfdmSymbol::from_freq(&dft, assemble_frame(&plan, &data, a)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let y = ofdm_demodulate(&dft, &apply_channel_time(&truth, &symbols)?)?;
        extract_observations(&y, &sets)
    };
    let with = received(true, &mut rng)?;
    let without = received(false, &mut rng)?;
    Ok(with
        .iter()
        .zip(without.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Run the full identity suite.
pub fn run_all() -> Vec<Check> {
    let mut checks = Vec::new();
    fn push(checks: &mut Vec<Check>, name: String, value: Result<f64>, tol: f64) {
        let (passed, detail) = match value {
            Ok(v) => (v < tol, format!("{v:.3e} (tol {tol:e})")),
            Err(e) => (false, e.to_string()),
        };
        checks.push(Check {
            name,
            passed,
            detail,
        });
    }
    for n in [8, 16, 64] {
        push(
            &mut checks,
            format!("shift identity N={n}"),
            shift_identity_error(n, 3),
            1e-9,
        );
    }
    push(
        &mut checks,
        "selection identity N=32".into(),
        selection_identity_error(32, 11),
        1e-9,
    );
    push(
        &mut checks,
        "frequency-domain matrix N=32".into(),
        freq_matrix_error(32, 12),
        1e-9,
    );
    let cfg = SystemConfig {
        subcarriers: 256,
        pilot_groups: 24,
        taps: 16,
        strong_taps: 2,
        bem_order: 3,
        antennas: 4,
        snr_db: None,
        ..SystemConfig::desk_scale()
    };
    match exact_recovery(&cfg, 13) {
        Ok(r) => {
            push(
                &mut checks,
                "observation identity N=256".into(),
                Ok(r.observation_error),
                1e-9,
            );
            checks.push(Check {
                name: "noiseless SOMP recovery N=256".into(),
                passed: r.nmse_db <= -120.0,
                detail: format!("NMSE {:.1} dB", r.nmse_db),
            });
        }
        Err(e) => push(
            &mut checks,
            "observation identity N=256".into(),
            Err(e),
            1e-9,
        ),
    }
    push(
        &mut checks,
        "ICI-free guard zones N=256".into(),
        ici_free_deviation(&cfg, 14),
        1e-9,
    );
    checks
}
