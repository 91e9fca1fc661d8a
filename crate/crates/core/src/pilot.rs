//! Grouped guard-pilot layout.
//!
//! Every nonzero pilot sits in the middle of a zone of `2D − 1` subcarriers;
//! the `D − 1` neighbours on each side carry zeros so that the `D` received
//! subcarriers around each center see only that center's pilot.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotPlan {
    pub subcarriers: usize,
    pub bem_order: usize,
    /// Sorted nonzero-pilot subcarriers `S_cen`.
    pub centers: Vec<usize>,
    /// `values[g][antenna]`, each ±1.
    pub values: Vec<Vec<i8>>,
}

/// Received-subcarrier selections `S_0 … S_{D−1}`; row `g` of every set
/// belongs to pilot group `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub sets: Vec<Vec<usize>>,
}

fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let diff = a.abs_diff(b);
    diff.min(n - diff)
}

fn zone_width(order: usize) -> usize {
    2 * order - 1
}

/// Draw `groups` pilot centers uniformly among all layouts whose guard zones
/// are pairwise disjoint on the circular subcarrier axis.
pub fn generate_pilot_positions<R: Rng + ?Sized>(
    n: usize,
    groups: usize,
    order: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if order == 0 || order.is_multiple_of(2) {
        return Err(Error::param(format!("BEM order must be odd, got {order}")));
    }
    if groups == 0 {
        return Err(Error::param("at least one pilot group is required"));
    }
    let width = zone_width(order);
    if groups * width > n {
        return Err(Error::Infeasible(format!(
            "{groups} groups of width {width} do not fit in {n} subcarriers"
        )));
    }
    // A random composition of the free subcarriers into `groups` gaps plus a
    // uniform rotation; every layout is reached by exactly `groups` draws.
    let free = n - groups * width;
    let mut bars = sample(rng, free + groups - 1, groups - 1).into_vec();
    bars.sort_unstable();
    // stars and bars: the gaps are the runs between consecutive bars
    let mut gaps = Vec::with_capacity(groups);
    let mut next = 0usize;
    for &b in &bars {
        gaps.push(b - next);
        next = b + 1;
    }
    gaps.push(free + groups - 1 - next);

    let offset = rng.random_range(0..n);
    let mut pos = offset;
    let mut centers = Vec::with_capacity(groups);
    for gap in gaps {
        centers.push(pos % n);
        pos += width + gap;
    }
    centers.sort_unstable();
    Ok(centers)
}

/// I.i.d. ±1 pilot values, `values[g][antenna]`.
pub fn generate_pilot_values<R: Rng + ?Sized>(
    groups: usize,
    antennas: usize,
    rng: &mut R,
) -> Vec<Vec<i8>> {
    (0..groups)
        .map(|_| {
            (0..antennas)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect()
        })
        .collect()
}

/// Unit-power QPSK symbols `(±1 ± j)/√2`.
pub fn qpsk_symbols<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<C64> {
    (0..count)
        .map(|_| {
            let re = if rng.random::<bool>() {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            let im = if rng.random::<bool>() {
                FRAC_1_SQRT_2
            } else {
                -FRAC_1_SQRT_2
            };
            C64::new(re, im)
        })
        .collect()
}

impl PilotPlan {
    pub fn generate<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<Self> {
        let centers =
            generate_pilot_positions(cfg.subcarriers, cfg.pilot_groups, cfg.bem_order, rng)?;
        let values = generate_pilot_values(cfg.pilot_groups, cfg.antennas, rng);
        let plan = Self {
            subcarriers: cfg.subcarriers,
            bem_order: cfg.bem_order,
            centers,
            values,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn groups(&self) -> usize {
        self.centers.len()
    }

    pub fn antennas(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Pilot value of group `g` on `antenna` as a complex number.
    pub fn value(&self, g: usize, antenna: usize) -> C64 {
        C64::new(self.values[g][antenna] as f64, 0.0)
    }

    /// Check spacing, guard disjointness, and ±1 entries.
    pub fn validate(&self) -> Result<()> {
        let n = self.subcarriers;
        let d = self.bem_order;
        if d == 0 || d.is_multiple_of(2) || d >= n {
            return Err(Error::param(format!("invalid BEM order {d} for N = {n}")));
        }
        if self.centers.is_empty() {
            return Err(Error::param("plan has no pilot groups"));
        }
        if self.centers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("centers must be strictly increasing"));
        }
        if self.centers.iter().any(|&c| c >= n) {
            return Err(Error::param("center outside the subcarrier range"));
        }
        let width = zone_width(d);
        for (i, &a) in self.centers.iter().enumerate() {
            for &b in &self.centers[i + 1..] {
                if circular_distance(a, b, n) < width {
                    return Err(Error::Infeasible(format!(
                        "centers {a} and {b} are closer than {width}"
                    )));
                }
            }
        }
        if self.values.len() != self.centers.len() {
            return Err(Error::dim("one row of pilot values per group is required"));
        }
        let antennas = self.antennas();
        if antennas == 0 || self.values.iter().any(|row| row.len() != antennas) {
            return Err(Error::dim(
                "pilot value rows must share a positive antenna count",
            ));
        }
        if self.values.iter().flatten().any(|&v| v != 1 && v != -1) {
            return Err(Error::param("pilot values must be +1 or -1"));
        }
        Ok(())
    }

    /// All pilot and guard subcarriers, ascending.
    pub fn pilot_zone(&self) -> Vec<usize> {
        let n = self.subcarriers as isize;
        let half = self.bem_order as isize - 1;
        let mut zone: Vec<usize> = self
            .centers
            .iter()
            .flat_map(|&c| (-half..=half).map(move |o| (c as isize + o).rem_euclid(n) as usize))
            .collect();
        zone.sort_unstable();
        zone.dedup();
        zone
    }

    /// Subcarriers available for data, ascending.
    pub fn data_positions(&self) -> Vec<usize> {
        let mut occupied = vec![false; self.subcarriers];
        for k in self.pilot_zone() {
            occupied[k] = true;
        }
        (0..self.subcarriers).filter(|&k| !occupied[k]).collect()
    }

    pub fn data_len(&self) -> usize {
        self.subcarriers - self.groups() * zone_width(self.bem_order)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// `S_d = S_cen + (d − (D−1)/2)` modulo `N`, kept in group order.
pub fn index_sets(plan: &PilotPlan) -> IndexSets {
    let n = plan.subcarriers as isize;
    let half = (plan.bem_order as isize - 1) / 2;
    let sets = (0..plan.bem_order as isize)
        .map(|d| {
            plan.centers
                .iter()
                .map(|&c| (c as isize + d - half).rem_euclid(n) as usize)
                .collect()
        })
        .collect();
    IndexSets { sets }
}

/// Frequency-domain symbol of one antenna: pilots on the centers, zeros on
/// the guards, `data` on the remaining subcarriers in ascending order.
pub fn assemble_frame(plan: &PilotPlan, data: &[C64], antenna: usize) -> Result<Vec<C64>> {
    if antenna >= plan.antennas() {
        return Err(Error::dim(format!(
            "antenna {antenna} out of range ({} antennas)",
            plan.antennas()
        )));
    }
    let positions = plan.data_positions();
    if data.len() != positions.len() {
        return Err(Error::dim(format!(
            "{} data symbols for {} data subcarriers",
            data.len(),
            positions.len()
        )));
    }
    let mut frame = vec![ZERO; plan.subcarriers];
    for (k, v) in positions.iter().zip(data) {
        frame[*k] = *v;
    }
    for (g, &c) in plan.centers.iter().enumerate() {
        frame[c] = plan.value(g, antenna);
    }
    Ok(frame)
}
