use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metric::nmse_db;
use crate::bem::cebem_basis;
use crate::channel::{
    add_noise, apply_channel_time, generate_ds_channel, generate_support, ofdm_demodulate,
    OfdmSymbol, SystemConfig,
};
use crate::error::Result;
use crate::linalg::{UnitaryDft, ZERO};
use crate::pilot::{assemble_frame, qpsk_symbols, PilotPlan};
use crate::recovery::{mutual_coherence, EstimatorSetup, SelectionMode, SompOptions, StopRule};
use crate::smoothing::{detect_strong_taps, linear_smooth, MAX_SMOOTHING_DOPPLER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "proposed")]
    Proposed,
    #[serde(rename = "proposed+smoothing")]
    ProposedSmoothed,
    /// Minimum-norm least squares on the same pilots.
    #[serde(rename = "ls-min-norm")]
    Ls,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [Self::Proposed, Self::ProposedSmoothed, Self::Ls];

    pub fn label(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::ProposedSmoothed => "proposed+smoothing",
            Self::Ls => "ls-min-norm",
        }
    }

    pub fn is_sparse(self) -> bool {
        !matches!(self, Self::Ls)
    }
}

/// Outcome of one Monte-Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub proposed_nmse_db: f64,
    /// `None` when the Doppler is too high for linear smoothing.
    pub smoothed_nmse_db: Option<f64>,
    pub ls_nmse_db: f64,
    pub mu_phi: f64,
    /// SOMP selected exactly the rows of the true support.
    pub support_hit: bool,
}

impl TrialResult {
    pub fn nmse(&self, kind: EstimatorKind) -> Option<f64> {
        match kind {
            EstimatorKind::Proposed => Some(self.proposed_nmse_db),
            EstimatorKind::ProposedSmoothed => self.smoothed_nmse_db,
            EstimatorKind::Ls => Some(self.ls_nmse_db),
        }
    }
}

/// One full pass: channel, pilots, propagation, noise, and all estimators.
pub fn run_trial(cfg: &SystemConfig, seed: u64) -> Result<TrialResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.subcarriers;

    let support = generate_support(cfg.taps, cfg.strong_taps, &mut rng)?;
    let basis = cebem_basis(n, cfg.bem_order)?;
    let truth = generate_ds_channel(cfg, &support, &basis, &mut rng)?;
    let plan = PilotPlan::generate(cfg, &mut rng)?;

    let dft = UnitaryDft::new(n);
    let symbols = (0..cfg.antennas)
        .map(|a| {
            let data = if cfg.zero_data {
                vec![ZERO; plan.data_len()]
            } else {
                qpsk_symbols(plan.data_len(), &mut rng)
            };
            OfdmSymbol::from_freq(&dft, assemble_frame(&plan, &data, a)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let clean = apply_channel_time(&truth, &symbols)?;
    let received = add_noise(&clean, cfg.snr_db.unwrap_or(f64::INFINITY), &mut rng)?;
    let y_freq = ofdm_demodulate(&dft, &received)?;

    let setup = EstimatorSetup::new(&plan, cfg)?;
    let opts = SompOptions {
        stop: StopRule::Iterations(match cfg.selection {
            SelectionMode::Row => cfg.strong_taps * cfg.antennas,
            SelectionMode::Block => cfg.strong_taps,
        }),
        mode: cfg.selection,
    };
    let proposed = setup.estimate(&y_freq, &opts)?;
    let ls = setup.estimate_ls(&y_freq)?;

    let smoothed_nmse_db = if cfg.doppler_norm < MAX_SMOOTHING_DOPPLER && n.is_multiple_of(4) {
        let strong = detect_strong_taps(&proposed.channel, cfg.strong_taps)?;
        let (smoothed, _) = linear_smooth(&proposed.channel, &strong)?;
        Some(nmse_db(&smoothed, &truth)?)
    } else {
        None
    };

    let phi = &setup.phi;
    let mut true_rows: Vec<usize> = (0..cfg.antennas)
        .flat_map(|a| support.iter().map(move |&l| phi.row_of(a, l)))
        .collect();
    true_rows.sort_unstable();

    Ok(TrialResult {
        seed,
        proposed_nmse_db: nmse_db(&proposed.channel, &truth)?,
        smoothed_nmse_db,
        ls_nmse_db: nmse_db(&ls.channel, &truth)?,
        mu_phi: mutual_coherence(&setup.phi.phi)?,
        support_hit: proposed.problem.support_rows == true_rows,
    })
}
