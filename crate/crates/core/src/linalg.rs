//! Dense complex helpers shared by every module.
//!
//! All DFTs in this crate use the unitary convention
//! `W[m, n] = N^{-1/2} exp(-j 2π m n / N)`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Dense unitary DFT matrix of order `n`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |m, k| {
        let idx = (m * k) % n;
        C64::from_polar(scale, -2.0 * PI * idx as f64 / n as f64)
    })
}

/// First `cols` columns of the unitary DFT matrix, restricted to `rows`.
pub fn dft_submatrix(n: usize, rows: &[usize], cols: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(rows.len(), cols, |r, k| {
        let idx = (rows[r] * k) % n;
        C64::from_polar(scale, -2.0 * PI * idx as f64 / n as f64)
    })
}

/// FFT-backed unitary DFT of a fixed length.
#[derive(Clone)]
pub struct UnitaryDft {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for UnitaryDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitaryDft").field("n", &self.n).finish()
    }
}

impl UnitaryDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `W x`
    pub fn forward(&self, x: &[C64]) -> Vec<C64> {
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        buf
    }

    /// `W^H x`
    pub fn inverse(&self, x: &[C64]) -> Vec<C64> {
        let mut buf = x.to_vec();
        self.inverse.process(&mut buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        buf
    }
}

/// Least-squares solve `min ‖A x − B‖_F` for full-column-rank `A` via QR.
///
/// Returns `None` when the triangular factor has a pivot below
/// `rel_tol · max|R_ii|`.
pub fn lstsq_full_rank(a: &CMatrix, b: &CMatrix, rel_tol: f64) -> Option<CMatrix> {
    let (rows, cols) = a.shape();
    if cols == 0 || rows < cols {
        return None;
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let max_diag = (0..cols).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..cols).any(|i| r[(i, i)].norm() <= rel_tol * max_diag) {
        return None;
    }
    let qtb = qr.q().adjoint() * b;
    r.solve_upper_triangular(&qtb)
}

/// Minimum-norm least-squares solution `A^+ B`.
///
/// Wide full-row-rank systems go through `Aᴴ (A Aᴴ)^{-1} B`; everything else
/// falls back to the SVD.
pub fn min_norm_solve(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return CMatrix::zeros(cols, b.ncols());
    }
    if rows <= cols {
        let gram = a * a.adjoint();
        let max_diag = (0..rows).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
        if let Some(chol) = gram.cholesky() {
            let l = chol.l_dirty();
            let min_pivot = (0..rows).map(|i| l[(i, i)].re).fold(f64::MAX, f64::min);
            if min_pivot * min_pivot > 1e-10 * max_diag {
                return a.ad_mul(&chol.solve(b));
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * (rows.max(cols) as f64) * f64::EPSILON;
    svd.solve(b, eps)
        .unwrap_or_else(|_| CMatrix::zeros(cols, b.ncols()))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
