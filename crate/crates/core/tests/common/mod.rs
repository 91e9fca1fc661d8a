//! Reference implementations shared by the integration tests.
#![allow(dead_code)]

use dschan::pilot::PilotPlan;
use dschan::recovery::{build_measurement_matrix, MeasurementMatrix};
use dschan::{CMatrix, SystemConfig, C64};
use rand::Rng;

pub fn config(
    n: usize,
    groups: usize,
    taps: usize,
    strong: usize,
    antennas: usize,
) -> SystemConfig {
    SystemConfig {
        subcarriers: n,
        pilot_groups: groups,
        taps,
        strong_taps: strong,
        bem_order: 3,
        antennas,
        ..SystemConfig::desk_scale()
    }
}

pub fn random_phi<R: Rng>(cfg: &SystemConfig, rng: &mut R) -> MeasurementMatrix {
    let plan = PilotPlan::generate(cfg, rng).unwrap();
    build_measurement_matrix(&plan, cfg.taps).unwrap()
}

pub fn cgauss<R: Rng>(rng: &mut R) -> C64 {
    use rand_distr::{Distribution, StandardNormal};
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Row-sparse `X` whose nonzero rows are the given taps in every antenna
/// block. Returns `(X, sorted support rows)`.
pub fn joint_sparse<R: Rng>(
    phi: &MeasurementMatrix,
    taps: &[usize],
    cols: usize,
    rng: &mut R,
) -> (CMatrix, Vec<usize>) {
    let mut x = CMatrix::zeros(phi.phi.ncols(), cols);
    let mut rows = Vec::new();
    for a in 0..phi.antennas {
        for &l in taps {
            let r = phi.row_of(a, l);
            rows.push(r);
            for c in 0..cols {
                x[(r, c)] = cgauss(rng);
            }
        }
    }
    rows.sort_unstable();
    (x, rows)
}

/// Brute-force coherence: every ordered pair, no shortcuts.
pub fn coherence_oracle(a: &CMatrix) -> f64 {
    let mut mu: f64 = 0.0;
    for i in 0..a.ncols() {
        for j in 0..a.ncols() {
            if i != j {
                let (ci, cj) = (a.column(i), a.column(j));
                mu = mu.max(ci.dotc(&cj).norm() / (ci.norm() * cj.norm()));
            }
        }
    }
    mu
}

/// Textbook SOMP with pseudo-inverse refits. Returns selected columns in
/// selection order and the final coefficient matrix.
pub fn somp_oracle(a: &CMatrix, y: &CMatrix, iterations: usize) -> (Vec<usize>, CMatrix) {
    let mut selected: Vec<usize> = Vec::new();
    let mut residual = y.clone();
    let mut coeffs = CMatrix::zeros(0, y.ncols());
    for _ in 0..iterations {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for j in (0..a.ncols()).filter(|j| !selected.contains(j)) {
            let col = a.column(j);
            let score: f64 = (0..y.ncols())
                .map(|d| col.dotc(&residual.column(d)).norm())
                .sum::<f64>()
                / col.norm();
            if score > best.1 {
                best = (j, score);
            }
        }
        selected.push(best.0);
        let sub = a.select_columns(&selected);
        coeffs = sub.clone().pseudo_inverse(1e-12).unwrap() * y;
        residual = y - sub * &coeffs;
    }
    let mut x = CMatrix::zeros(a.ncols(), y.ncols());
    for (i, &c) in selected.iter().enumerate() {
        x.set_row(c, &coeffs.row(i));
    }
    (selected, x)
}

/// Best single column by exhaustive least-squares residual.
pub fn best_single_column(a: &CMatrix, y: &CMatrix) -> usize {
    (0..a.ncols())
        .map(|j| {
            let col = a.columns(j, 1).into_owned();
            let coef = col.clone().pseudo_inverse(1e-12).unwrap() * y;
            (j, (y - col * coef).norm())
        })
        .min_by(|p, q| p.1.total_cmp(&q.1).then(p.0.cmp(&q.0)))
        .unwrap()
        .0
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}
