//! Complex-exponential basis expansion model (CE-BEM).
//!
//! Each tap trajectory `h_l ∈ C^N` of one antenna is modelled as `V θ_l + ε_l`
//! where the columns of `V` are the harmonics `exp(j 2π n (d − (D−1)/2) / N)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, lstsq_full_rank, CMatrix, UnitaryDft, C64, ZERO};

/// `N × D` CE-BEM basis.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    entries: CMatrix,
}

impl BasisMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn order(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn column(&self, d: usize) -> Vec<C64> {
        self.entries.column(d).iter().copied().collect()
    }

    /// Doppler offset `d − (D−1)/2` of basis column `d`.
    pub fn offset(&self, d: usize) -> isize {
        d as isize - (self.order() as isize - 1) / 2
    }
}

/// Build the CE-BEM basis for `n` instants and odd order `d`.
pub fn cebem_basis(n: usize, order: usize) -> Result<BasisMatrix> {
    if order == 0 || order.is_multiple_of(2) {
        return Err(Error::param(format!("BEM order must be odd, got {order}")));
    }
    if order >= n {
        return Err(Error::param(format!(
            "BEM order {order} must be smaller than N = {n}"
        )));
    }
    let half = (order as isize - 1) / 2;
    let entries = CMatrix::from_fn(n, order, |row, col| {
        let alpha = col as isize - half;
        // reduce the phase index mod N so large rows stay exact
        let idx = (row as isize * alpha).rem_euclid(n as isize);
        C64::from_polar(1.0, 2.0 * PI * idx as f64 / n as f64)
    });
    Ok(BasisMatrix { entries })
}

/// BEM coefficients, indexed `[antenna][order][tap]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BemCoefficients {
    antennas: usize,
    order: usize,
    taps: usize,
    theta: Vec<C64>,
    support: Vec<usize>,
}

impl BemCoefficients {
    pub fn zeros(antennas: usize, order: usize, taps: usize) -> Self {
        Self {
            antennas,
            order,
            taps,
            theta: vec![ZERO; antennas * order * taps],
            support: Vec::new(),
        }
    }

    /// Build from a dense tensor; the support is recomputed from the nonzeros.
    pub fn from_fn(
        antennas: usize,
        order: usize,
        taps: usize,
        mut f: impl FnMut(usize, usize, usize) -> C64,
    ) -> Self {
        let mut out = Self::zeros(antennas, order, taps);
        for a in 0..antennas {
            for d in 0..order {
                for l in 0..taps {
                    out.theta[(a * order + d) * taps + l] = f(a, d, l);
                }
            }
        }
        out.refresh_support();
        out
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn get(&self, antenna: usize, d: usize, tap: usize) -> C64 {
        self.theta[(antenna * self.order + d) * self.taps + tap]
    }

    pub fn set(&mut self, antenna: usize, d: usize, tap: usize, value: C64) {
        self.theta[(antenna * self.order + d) * self.taps + tap] = value;
    }

    /// Taps with any nonzero coefficient across antennas and orders.
    pub fn refresh_support(&mut self) {
        self.support = (0..self.taps)
            .filter(|&l| {
                (0..self.antennas).any(|a| (0..self.order).any(|d| self.get(a, d, l) != ZERO))
            })
            .collect();
    }

    /// `θ̃_d` for one antenna: the `L` taps at order `d`.
    pub fn tap_vector(&self, antenna: usize, d: usize) -> &[C64] {
        let start = (antenna * self.order + d) * self.taps;
        &self.theta[start..start + self.taps]
    }
}

/// Time-domain channel tensor, indexed `[antenna][instant][tap]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    antennas: usize,
    n: usize,
    taps: usize,
    h: Vec<C64>,
    support: Vec<usize>,
    modeling_error: Option<Vec<C64>>,
}

impl ChannelRealization {
    pub fn zeros(antennas: usize, n: usize, taps: usize) -> Self {
        Self {
            antennas,
            n,
            taps,
            h: vec![ZERO; antennas * n * taps],
            support: Vec::new(),
            modeling_error: None,
        }
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn set_support(&mut self, mut support: Vec<usize>) {
        support.sort_unstable();
        support.dedup();
        self.support = support;
    }

    pub fn modeling_error(&self) -> Option<&[C64]> {
        self.modeling_error.as_deref()
    }

    pub fn set_modeling_error(&mut self, eps: Option<Vec<C64>>) -> Result<()> {
        if let Some(e) = &eps {
            if e.len() != self.h.len() {
                return Err(Error::dim("modeling error tensor shape"));
            }
        }
        self.modeling_error = eps;
        Ok(())
    }

    #[inline]
    fn idx(&self, antenna: usize, n: usize, tap: usize) -> usize {
        (antenna * self.n + n) * self.taps + tap
    }

    pub fn get(&self, antenna: usize, n: usize, tap: usize) -> C64 {
        self.h[self.idx(antenna, n, tap)]
    }

    pub fn set(&mut self, antenna: usize, n: usize, tap: usize, value: C64) {
        let i = self.idx(antenna, n, tap);
        self.h[i] = value;
    }

    /// Flat `vec(h)` view in `[antenna][instant][tap]` order.
    pub fn as_slice(&self) -> &[C64] {
        &self.h
    }

    /// Trajectory `h_l` of one tap over all instants.
    pub fn tap_trajectory(&self, antenna: usize, tap: usize) -> Vec<C64> {
        (0..self.n).map(|n| self.get(antenna, n, tap)).collect()
    }

    pub fn set_tap_trajectory(&mut self, antenna: usize, tap: usize, values: &[C64]) {
        for (n, v) in values.iter().enumerate() {
            self.set(antenna, n, tap, *v);
        }
    }

    pub fn same_shape(&self, other: &ChannelRealization) -> bool {
        self.antennas == other.antennas && self.n == other.n && self.taps == other.taps
    }
}

/// Least-squares BEM fit of a single tap trajectory.
///
/// Returns `(θ_l, ε_l)` with `V θ_l + ε_l = h_l`.
pub fn bem_fit(h_l: &[C64], basis: &BasisMatrix) -> Result<(Vec<C64>, Vec<C64>)> {
    if h_l.len() != basis.n() {
        return Err(Error::dim(format!(
            "trajectory length {} vs basis rows {}",
            h_l.len(),
            basis.n()
        )));
    }
    let v = basis.matrix();
    let h = CMatrix::from_column_slice(h_l.len(), 1, h_l);
    let theta = lstsq_full_rank(v, &h, 1e-12)
        .ok_or_else(|| Error::Degenerate("BEM basis is rank deficient".into()))?;
    let eps = &h - v * &theta;
    Ok((
        theta.iter().copied().collect(),
        eps.iter().copied().collect(),
    ))
}

/// Fit every tap of every antenna; `support` is carried over from `ch`.
pub fn bem_fit_channel(ch: &ChannelRealization, basis: &BasisMatrix) -> Result<BemCoefficients> {
    let mut out = BemCoefficients::zeros(ch.antennas(), basis.order(), ch.taps());
    for a in 0..ch.antennas() {
        for l in 0..ch.taps() {
            let (theta, _) = bem_fit(&ch.tap_trajectory(a, l), basis)?;
            for (d, t) in theta.into_iter().enumerate() {
                out.set(a, d, l, t);
            }
        }
    }
    out.support = ch.support().to_vec();
    Ok(out)
}

/// `h[a][n][l] = Σ_d V[n, d] θ[a][d][l]`.
pub fn bem_reconstruct(theta: &BemCoefficients, basis: &BasisMatrix) -> Result<ChannelRealization> {
    if theta.order() != basis.order() {
        return Err(Error::dim(format!(
            "coefficient order {} vs basis order {}",
            theta.order(),
            basis.order()
        )));
    }
    let n = basis.n();
    let v = basis.matrix();
    let mut ch = ChannelRealization::zeros(theta.antennas(), n, theta.taps());
    for a in 0..theta.antennas() {
        for t in 0..n {
            for l in 0..theta.taps() {
                let mut acc = ZERO;
                for d in 0..theta.order() {
                    acc += v[(t, d)] * theta.get(a, d, l);
                }
                ch.set(a, t, l, acc);
            }
        }
    }
    ch.set_support(theta.support().to_vec());
    Ok(ch)
}

/// Model part of the frequency-domain channel matrix of one antenna,
/// `Σ_d W diag(v_d) W^H · diag(√N W [θ̃_d; 0])`.
///
/// Dense `O(D N^3)`; meant for verification at small `N`.
pub fn freq_channel_matrix(
    theta: &BemCoefficients,
    antenna: usize,
    basis: &BasisMatrix,
) -> Result<CMatrix> {
    if antenna >= theta.antennas() {
        return Err(Error::dim(format!(
            "antenna {antenna} out of range ({} antennas)",
            theta.antennas()
        )));
    }
    if theta.order() != basis.order() {
        return Err(Error::dim("coefficient order vs basis order"));
    }
    let n = basis.n();
    if theta.taps() > n {
        return Err(Error::dim("more taps than subcarriers"));
    }
    let w = dft_matrix(n);
    let dft = UnitaryDft::new(n);
    let sqrt_n = (n as f64).sqrt();
    let mut out = CMatrix::zeros(n, n);
    for d in 0..basis.order() {
        let vd = CMatrix::from_diagonal(&basis.matrix().column(d).into_owned());
        let shift = &w * vd * w.adjoint();
        let mut padded = vec![ZERO; n];
        padded[..theta.taps()].copy_from_slice(theta.tap_vector(antenna, d));
        let response: Vec<C64> = dft
            .forward(&padded)
            .into_iter()
            .map(|v| v * sqrt_n)
            .collect();
        // right-multiplying by a diagonal scales columns
        for (col, r) in response.iter().enumerate() {
            for row in 0..n {
                out[(row, col)] += shift[(row, col)] * r;
            }
        }
    }
    Ok(out)
}
