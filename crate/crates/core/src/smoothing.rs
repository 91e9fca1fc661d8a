//! Linear smoothing of estimated strong-tap trajectories.
//!
//! For slowly varying taps (normalized Doppler below 0.2) each trajectory is
//! replaced by the straight line through its two half-symbol averages.

use crate::bem::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Highest normalized Doppler for which linear smoothing applies.
pub const MAX_SMOOTHING_DOPPLER: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub taps: Vec<usize>,
    /// `slopes[antenna][k]` for tap `taps[k]`.
    pub slopes: Vec<Vec<C64>>,
    /// `anchors[antenna][k]` = (first-half mean, second-half mean).
    pub anchors: Vec<Vec<(C64, C64)>>,
}

/// The `k` taps with the largest energy summed over antennas and instants,
/// sorted ascending. Ties go to the lower tap index.
pub fn detect_strong_taps(ch: &ChannelRealization, k: usize) -> Result<Vec<usize>> {
    if k > ch.taps() {
        return Err(Error::param(format!("K = {k} exceeds L = {}", ch.taps())));
    }
    let mut energy = vec![0.0f64; ch.taps()];
    for a in 0..ch.antennas() {
        for n in 0..ch.n() {
            for (l, e) in energy.iter_mut().enumerate() {
                *e += ch.get(a, n, l).norm_sqr();
            }
        }
    }
    let mut order: Vec<usize> = (0..ch.taps()).collect();
    order.sort_by(|&a, &b| energy[b].total_cmp(&energy[a]).then(a.cmp(&b)));
    let mut picked = order[..k].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Replace each strong-tap trajectory by its two-point linear fit; all other
/// taps are zeroed.
///
/// With `m1`, `m2` the first- and second-half means, the output is
/// `m1 + (n − c) β` where `β = (m2 − m1) / (N/2)` and `c = N/4 − 1/2` is the
/// centroid of the first half.
pub fn linear_smooth(
    ch: &ChannelRealization,
    strong_taps: &[usize],
) -> Result<(ChannelRealization, SmoothingReport)> {
    let n = ch.n();
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::param(format!(
            "N = {n} must be a positive multiple of 4"
        )));
    }
    if let Some(&bad) = strong_taps.iter().find(|&&l| l >= ch.taps()) {
        return Err(Error::param(format!("tap {bad} outside L = {}", ch.taps())));
    }
    let half = n / 2;
    let centroid = n as f64 / 4.0 - 0.5;
    let mut out = ChannelRealization::zeros(ch.antennas(), n, ch.taps());
    let mut slopes = Vec::with_capacity(ch.antennas());
    let mut anchors = Vec::with_capacity(ch.antennas());
    for a in 0..ch.antennas() {
        let mut ant_slopes = Vec::with_capacity(strong_taps.len());
        let mut ant_anchors = Vec::with_capacity(strong_taps.len());
        for &l in strong_taps {
            let traj = ch.tap_trajectory(a, l);
            let m1 = traj[..half].iter().sum::<C64>() / half as f64;
            let m2 = traj[half..].iter().sum::<C64>() / half as f64;
            let beta = (m2 - m1) / half as f64;
            let line: Vec<C64> = (0..n).map(|t| m1 + beta * (t as f64 - centroid)).collect();
            out.set_tap_trajectory(a, l, &line);
            ant_slopes.push(beta);
            ant_anchors.push((m1, m2));
        }
        slopes.push(ant_slopes);
        anchors.push(ant_anchors);
    }
    let support: Vec<usize> = strong_taps
        .iter()
        .copied()
        .filter(|&l| (0..ch.antennas()).any(|a| (0..n).any(|t| out.get(a, t, l) != ZERO)))
        .collect();
    out.set_support(support);
    let report = SmoothingReport {
        taps: strong_taps.to_vec(),
        slopes,
        anchors,
    };
    Ok((out, report))
}
