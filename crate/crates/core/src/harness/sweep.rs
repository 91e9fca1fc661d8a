use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::{run_trial, EstimatorKind, TrialResult};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    SnrDb,
    DopplerNorm,
    Antennas,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            Self::SnrDb => "SNR (dB)",
            Self::DopplerNorm => "normalized Doppler",
            Self::Antennas => "transmit antennas",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotRule {
    /// Keep `G` from the base configuration.
    #[default]
    Fixed,
    /// `G = 3 K N_t`, i.e. `3 K N_t (2D − 1)` pilot subcarriers in total.
    Proportional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub pilot_rule: PilotRule,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::param("sweep has no points"));
        }
        if self.trials == 0 {
            return Err(Error::param("sweep needs at least one trial per point"));
        }
        for i in 0..self.points.len() {
            config_at(self, i)?.validate()?;
        }
        Ok(())
    }
}

/// Configuration of sweep point `index`.
pub fn config_at(spec: &SweepSpec, index: usize) -> Result<SystemConfig> {
    let value = *spec
        .points
        .get(index)
        .ok_or_else(|| Error::param(format!("no sweep point {index}")))?;
    let mut cfg = spec.base.clone();
    match spec.axis {
        SweepAxis::SnrDb => cfg.snr_db = Some(value),
        SweepAxis::DopplerNorm => cfg.doppler_norm = value,
        SweepAxis::Antennas => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::param(format!(
                    "antenna count {value} is not a positive integer"
                )));
            }
            cfg.antennas = value as usize;
        }
    }
    if spec.pilot_rule == PilotRule::Proportional {
        cfg.pilot_groups = 3 * cfg.strong_taps * cfg.antennas;
    }
    Ok(cfg)
}

/// Seed of one trial, a SplitMix64 hash of `(base, point, trial)`.
pub fn trial_seed(base: u64, point: usize, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(base) ^ point as u64) ^ trial as u64)
}

/// One row per (point, estimator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub axis_value: f64,
    pub estimator: EstimatorKind,
    /// Empty when the estimator does not apply at this point.
    pub mean_nmse_db: Option<f64>,
    pub stderr: Option<f64>,
    pub mu_phi: f64,
    /// Defined only for sparse estimators.
    pub support_hit_rate: Option<f64>,
    /// Successful trials behind the row.
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// `(point index, trial index, message)` of every failed trial.
    pub failures: Vec<(usize, usize, String)>,
}

impl SweepTable {
    pub fn mean(&self, point: f64, kind: EstimatorKind) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.axis_value == point && r.estimator == kind)
            .and_then(|r| r.mean_nmse_db)
    }

    pub fn series(&self, kind: EstimatorKind) -> Vec<(f64, Option<f64>)> {
        self.rows
            .iter()
            .filter(|r| r.estimator == kind)
            .map(|r| (r.axis_value, r.mean_nmse_db))
            .collect()
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(spec: &SweepSpec, outcomes: Vec<Vec<Result<TrialResult>>>) -> Result<SweepTable> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (pi, point) in outcomes.into_iter().enumerate() {
        let mut ok = Vec::new();
        for (ti, outcome) in point.into_iter().enumerate() {
            match outcome {
                Ok(r) => ok.push(r),
                Err(e) => failures.push((pi, ti, e.to_string())),
            }
        }
        if ok.is_empty() {
            let mut reasons: Vec<&str> = failures
                .iter()
                .filter(|f| f.0 == pi)
                .map(|f| f.2.as_str())
                .collect();
            reasons.sort_unstable();
            reasons.dedup();
            reasons.truncate(3);
            return Err(Error::Degenerate(format!(
                "every trial failed at sweep point {} ({}): {}",
                pi,
                spec.points[pi],
                reasons.join("; ")
            )));
        }
        let mu = ok.iter().map(|r| r.mu_phi).sum::<f64>() / ok.len() as f64;
        let hit = ok.iter().filter(|r| r.support_hit).count() as f64 / ok.len() as f64;
        for kind in EstimatorKind::ALL {
            let values: Vec<f64> = ok.iter().filter_map(|r| r.nmse(kind)).collect();
            let (mean, stderr) = if values.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_and_stderr(&values);
                (Some(m), Some(s))
            };
            rows.push(SweepRow {
                axis_value: spec.points[pi],
                estimator: kind,
                mean_nmse_db: mean,
                stderr,
                mu_phi: mu,
                support_hit_rate: kind.is_sparse().then_some(hit).filter(|_| mean.is_some()),
                trials: values.len(),
                seed: spec.base.seed,
            });
        }
    }
    Ok(SweepTable {
        axis: spec.axis,
        rows,
        failures,
    })
}

/// Run every trial of every point on the global rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let configs: Vec<SystemConfig> = (0..spec.points.len())
        .map(|i| config_at(spec, i))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();
    let results: Vec<Result<TrialResult>> = jobs
        .par_iter()
        .map(|&(p, t)| run_trial(&configs[p], trial_seed(spec.base.seed, p, t)))
        .collect();
    let mut outcomes: Vec<Vec<Result<TrialResult>>> = configs.iter().map(|_| Vec::new()).collect();
    for ((p, _), r) in jobs.into_iter().zip(results) {
        outcomes[p].push(r);
    }
    aggregate(spec, outcomes)
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<SweepTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Degenerate(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}
