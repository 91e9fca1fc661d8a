//! Joint-sparse recovery of the BEM coefficients.
//!
//! The received pilots on `S_0 … S_{D−1}` form the observation matrix
//! `Y_R = Φ X + η_R` where `Φ = [diag(P_1) F, …, diag(P_Nt) F]`, `F` holds the
//! rows `S_cen` of the first `L` unitary DFT columns, and column `d` of `X`
//! stacks the order-`d` coefficients of every antenna.
//!
//! With the unitary DFT the selected received values carry an extra `√N`
//! relative to `Φ X`; [`extract_observations`] removes it so that `X` holds
//! the BEM coefficients themselves.

use serde::{Deserialize, Serialize};

use crate::bem::{bem_reconstruct, cebem_basis, BasisMatrix, BemCoefficients, ChannelRealization};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{dft_submatrix, frobenius, lstsq_full_rank, min_norm_solve, CMatrix, C64};
use crate::pilot::{index_sets, IndexSets, PilotPlan};

const RANK_TOL: f64 = 1e-10;

/// Antenna-major measurement matrix, `G × (N_t L)`.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    pub phi: CMatrix,
    pub antennas: usize,
    pub taps: usize,
}

impl MeasurementMatrix {
    /// Row of `X` for tap `tap` of antenna `antenna`.
    pub fn row_of(&self, antenna: usize, tap: usize) -> usize {
        antenna * self.taps + tap
    }
}

/// A posed (and possibly solved) joint-sparse problem.
#[derive(Debug, Clone)]
pub struct DcsProblem {
    pub y_r: CMatrix,
    pub phi: MeasurementMatrix,
    pub x: Option<CMatrix>,
    pub support_rows: Vec<usize>,
}

pub fn build_measurement_matrix(plan: &PilotPlan, taps: usize) -> Result<MeasurementMatrix> {
    plan.validate()?;
    let n = plan.subcarriers;
    if taps == 0 || taps > n {
        return Err(Error::param(format!("need 0 < L <= N, got L = {taps}")));
    }
    let f = dft_submatrix(n, &plan.centers, taps);
    let antennas = plan.antennas();
    let g = plan.groups();
    let mut phi = CMatrix::zeros(g, antennas * taps);
    for a in 0..antennas {
        for row in 0..g {
            let p = plan.value(row, a);
            for l in 0..taps {
                phi[(row, a * taps + l)] = p * f[(row, l)];
            }
        }
    }
    Ok(MeasurementMatrix {
        phi,
        antennas,
        taps,
    })
}

/// Largest normalized inner product between distinct columns.
pub fn mutual_coherence(a: &CMatrix) -> Result<f64> {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if let Some(i) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::Degenerate(format!("column {i} is zero")));
    }
    let cols: Vec<&[C64]> = (0..a.ncols())
        .map(|j| {
            let start = j * a.nrows();
            &a.as_slice()[start..start + a.nrows()]
        })
        .collect();
    let mut mu: f64 = 0.0;
    for j in 0..cols.len() {
        for i in 0..j {
            let dot: C64 = cols[i].iter().zip(cols[j]).map(|(x, y)| x.conj() * y).sum();
            mu = mu.max(dot.norm() / (norms[i] * norms[j]));
        }
    }
    Ok(mu.min(1.0))
}

/// Observation matrix: column `d` holds `N^{-1/2} Y[S_d]`, row `g` from group `g`.
pub fn extract_observations(y: &[C64], sets: &IndexSets) -> Result<CMatrix> {
    let n = y.len();
    let groups = sets.sets.first().map_or(0, Vec::len);
    if sets.sets.iter().any(|s| s.len() != groups) {
        return Err(Error::dim("index sets differ in size"));
    }
    if let Some(&bad) = sets.sets.iter().flatten().find(|&&k| k >= n) {
        return Err(Error::dim(format!(
            "index {bad} outside received vector of length {n}"
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CMatrix::from_fn(groups, sets.sets.len(), |g, d| {
        y[sets.sets[d][g]] * scale
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Exactly this many selections (atoms in row mode, taps in block mode).
    Iterations(usize),
    /// Stop once `‖R‖_F < tol`, or after `max_iterations`.
    Residual { tol: f64, max_iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// One column of `Φ` per iteration.
    #[default]
    Row,
    /// All antenna rows of one tap per iteration.
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SompOptions {
    pub stop: StopRule,
    pub mode: SelectionMode,
}

impl SompOptions {
    pub fn iterations(k: usize) -> Self {
        Self {
            stop: StopRule::Iterations(k),
            mode: SelectionMode::Row,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SompResult {
    /// `(N_t L) × D`, nonzero only on `support_rows`.
    pub x: CMatrix,
    /// Selected rows, ascending.
    pub support_rows: Vec<usize>,
    /// Selected columns in the order they were picked.
    pub selection_order: Vec<usize>,
    /// `‖R‖_F` before the first iteration and after each one.
    pub residual_norms: Vec<f64>,
}

/// Simultaneous orthogonal matching pursuit.
///
/// Each iteration picks the candidate maximizing `Σ_d |φ_iᴴ r_d| / ‖φ_i‖`
/// (lowest index on ties), then re-fits all selected columns against every
/// observation column by least squares.
pub fn somp(phi: &MeasurementMatrix, y: &CMatrix, opts: &SompOptions) -> Result<SompResult> {
    let a = &phi.phi;
    let (rows, cols) = a.shape();
    if y.nrows() != rows {
        return Err(Error::dim(format!(
            "observations have {} rows, measurement matrix {rows}",
            y.nrows()
        )));
    }
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if let Some(i) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::Degenerate(format!("measurement column {i} is zero")));
    }
    let candidates: Vec<Vec<usize>> = match opts.mode {
        SelectionMode::Row => (0..cols).map(|c| vec![c]).collect(),
        SelectionMode::Block => {
            if phi.antennas * phi.taps != cols {
                return Err(Error::dim("block layout does not match column count"));
            }
            (0..phi.taps)
                .map(|t| (0..phi.antennas).map(|ant| phi.row_of(ant, t)).collect())
                .collect()
        }
    };
    let (target, tol) = match opts.stop {
        StopRule::Iterations(k) => (k, None),
        StopRule::Residual {
            tol,
            max_iterations,
        } => (max_iterations, Some(tol)),
    };
    if target > candidates.len() {
        return Err(Error::param(format!(
            "{target} selections requested from {} candidates",
            candidates.len()
        )));
    }

    let mut used = vec![false; candidates.len()];
    let mut selected: Vec<usize> = Vec::new();
    let mut order = Vec::new();
    let mut coeffs = CMatrix::zeros(0, y.ncols());
    let mut residual = y.clone();
    let mut residual_norms = vec![frobenius(&residual)];

    for iteration in 1..=target {
        if let Some(t) = tol {
            if residual_norms.last().copied().unwrap_or(0.0) < t {
                break;
            }
        }
        let corr = a.ad_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (ci, cand) in candidates.iter().enumerate() {
            if used[ci] {
                continue;
            }
            let score: f64 = cand
                .iter()
                .map(|&c| corr.row(c).iter().map(|v| v.norm()).sum::<f64>() / norms[c])
                .sum();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((ci, score));
            }
        }
        let (ci, _) = best.ok_or(Error::RankDeficient { iteration })?;
        used[ci] = true;
        selected.extend_from_slice(&candidates[ci]);
        order.extend_from_slice(&candidates[ci]);

        let sub = a.select_columns(&selected);
        coeffs = lstsq_full_rank(&sub, y, RANK_TOL).ok_or(Error::RankDeficient { iteration })?;
        residual = y - &sub * &coeffs;
        residual_norms.push(frobenius(&residual));
    }

    let mut x = CMatrix::zeros(cols, y.ncols());
    for (i, &c) in selected.iter().enumerate() {
        x.set_row(c, &coeffs.row(i));
    }
    let mut support_rows = selected;
    support_rows.sort_unstable();
    Ok(SompResult {
        x,
        support_rows,
        selection_order: order,
        residual_norms,
    })
}

/// Orthogonal matching pursuit on a single observation column.
pub fn omp(phi: &MeasurementMatrix, y: &[C64], k: usize) -> Result<SompResult> {
    let y = CMatrix::from_column_slice(y.len(), 1, y);
    somp(phi, &y, &SompOptions::iterations(k))
}

/// Minimum-norm least-squares solution per observation column.
pub fn ls_estimate(phi: &MeasurementMatrix, y: &CMatrix) -> Result<CMatrix> {
    if y.nrows() != phi.phi.nrows() {
        return Err(Error::dim("observation rows vs measurement rows"));
    }
    Ok(min_norm_solve(&phi.phi, y))
}

/// `θ[a][d][l] = x[a L + l][d]`.
pub fn unpack_coefficients(
    x: &CMatrix,
    antennas: usize,
    taps: usize,
    order: usize,
) -> Result<BemCoefficients> {
    if x.shape() != (antennas * taps, order) {
        return Err(Error::dim(format!(
            "x is {:?}, expected ({}, {order})",
            x.shape(),
            antennas * taps
        )));
    }
    Ok(BemCoefficients::from_fn(
        antennas,
        order,
        taps,
        |a, d, l| x[(a * taps + l, d)],
    ))
}

/// Inverse of [`unpack_coefficients`].
pub fn pack_coefficients(theta: &BemCoefficients) -> CMatrix {
    let taps = theta.taps();
    CMatrix::from_fn(theta.antennas() * taps, theta.order(), |r, d| {
        theta.get(r / taps, d, r % taps)
    })
}

/// Output of one estimator run.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub channel: ChannelRealization,
    pub problem: DcsProblem,
    pub residual_norms: Vec<f64>,
}

/// Everything fixed by the configuration and the pilot plan.
#[derive(Debug, Clone)]
pub struct EstimatorSetup {
    pub basis: BasisMatrix,
    pub sets: IndexSets,
    pub phi: MeasurementMatrix,
    pub taps: usize,
}

impl EstimatorSetup {
    pub fn new(plan: &PilotPlan, cfg: &SystemConfig) -> Result<Self> {
        if plan.subcarriers != cfg.subcarriers
            || plan.bem_order != cfg.bem_order
            || plan.antennas() != cfg.antennas
        {
            return Err(Error::dim("pilot plan does not match the configuration"));
        }
        Ok(Self {
            basis: cebem_basis(cfg.subcarriers, cfg.bem_order)?,
            sets: index_sets(plan),
            phi: build_measurement_matrix(plan, cfg.taps)?,
            taps: cfg.taps,
        })
    }

    fn finish(
        &self,
        y_r: CMatrix,
        x: CMatrix,
        support_rows: Vec<usize>,
        residual_norms: Vec<f64>,
    ) -> Result<ChannelEstimate> {
        let theta = unpack_coefficients(&x, self.phi.antennas, self.taps, self.basis.order())?;
        let channel = bem_reconstruct(&theta, &self.basis)?;
        Ok(ChannelEstimate {
            channel,
            problem: DcsProblem {
                y_r,
                phi: self.phi.clone(),
                x: Some(x),
                support_rows,
            },
            residual_norms,
        })
    }

    /// SOMP pipeline: observations → SOMP → unpack → BEM reconstruction.
    pub fn estimate(&self, y_freq: &[C64], opts: &SompOptions) -> Result<ChannelEstimate> {
        let y_r = extract_observations(y_freq, &self.sets)?;
        let res = somp(&self.phi, &y_r, opts)?;
        self.finish(y_r, res.x, res.support_rows, res.residual_norms)
    }

    /// Minimum-norm LS on the same observation model.
    pub fn estimate_ls(&self, y_freq: &[C64]) -> Result<ChannelEstimate> {
        let y_r = extract_observations(y_freq, &self.sets)?;
        let x = ls_estimate(&self.phi, &y_r)?;
        let residual = frobenius(&(&y_r - &self.phi.phi * &x));
        let rows = (0..x.nrows()).collect();
        self.finish(y_r, x, rows, vec![residual])
    }
}

/// Estimate the channel from the demodulated received symbol with SOMP,
/// assuming `K` strong taps per antenna.
pub fn estimate_channel(
    y_freq: &[C64],
    plan: &PilotPlan,
    cfg: &SystemConfig,
) -> Result<ChannelRealization> {
    let setup = EstimatorSetup::new(plan, cfg)?;
    let opts = SompOptions::iterations(cfg.strong_taps * cfg.antennas);
    Ok(setup.estimate(y_freq, &opts)?.channel)
}
