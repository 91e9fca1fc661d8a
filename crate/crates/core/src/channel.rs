//! Doubly-selective sparse MIMO channel generation and time-domain propagation.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bem::{bem_fit, bem_reconstruct, BasisMatrix, BemCoefficients, ChannelRealization};
use crate::error::{Error, Result};
use crate::linalg::{UnitaryDft, C64, ZERO};
use crate::recovery::SelectionMode;

/// How the true channel of a trial is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    /// Sum-of-sinusoids Jakes fading per strong tap.
    #[default]
    Jakes,
    /// Random coefficients drawn directly in the CE-BEM domain, so the
    /// channel has no modeling error.
    BemExact,
}

/// Scalar parameters of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Subcarriers `N`.
    pub subcarriers: usize,
    /// Nonzero-pilot groups `G`.
    pub pilot_groups: usize,
    /// Channel length `L`.
    pub taps: usize,
    /// Strong taps `K`.
    pub strong_taps: usize,
    /// BEM order `D` (odd).
    pub bem_order: usize,
    /// Transmit antennas `N_t`.
    pub antennas: usize,
    /// Maximum Doppler shift times the OFDM symbol duration.
    pub doppler_norm: f64,
    /// Receive SNR in dB; `None` means noiseless.
    pub snr_db: Option<f64>,
    pub seed: u64,
    /// Sinusoids per Jakes process.
    #[serde(default = "default_oscillators")]
    pub oscillators: usize,
    /// Relative average power of each strong tap, in support order.
    /// Equal power when absent.
    #[serde(default)]
    pub tap_powers: Option<Vec<f64>>,
    #[serde(default)]
    pub channel_model: ChannelModel,
    /// Leave data subcarriers empty (pilots only).
    #[serde(default)]
    pub zero_data: bool,
    /// SOMP candidate granularity.
    #[serde(default)]
    pub selection: SelectionMode,
}

fn default_oscillators() -> usize {
    32
}

impl SystemConfig {
    /// Desk-scale configuration: `N = 256`, `G = 24`, `L = 16`, `K = 2`,
    /// `D = 3`, `N_t = 16`, `ν = 0.057`, 20 dB.
    pub fn desk_scale() -> Self {
        Self {
            subcarriers: 256,
            pilot_groups: 24,
            taps: 16,
            strong_taps: 2,
            bem_order: 3,
            antennas: 16,
            doppler_norm: 0.057,
            snr_db: Some(20.0),
            seed: 1,
            oscillators: default_oscillators(),
            tap_powers: None,
            channel_model: ChannelModel::Jakes,
            zero_data: false,
            selection: SelectionMode::Row,
        }
    }

    /// Full-size configuration with `N = 1024`, `G = 96`.
    pub fn full_scale() -> Self {
        Self {
            subcarriers: 1024,
            pilot_groups: 96,
            ..Self::desk_scale()
        }
    }

    /// Subcarriers occupied by pilots and guards, `G (2D − 1)`.
    pub fn pilot_zone_len(&self) -> usize {
        self.pilot_groups * (2 * self.bem_order).saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, l, k, d) = (
            self.subcarriers,
            self.taps,
            self.strong_taps,
            self.bem_order,
        );
        if n == 0 || l == 0 || self.antennas == 0 || self.pilot_groups == 0 {
            return Err(Error::param("N, L, G and N_t must be positive"));
        }
        if k > l || l > n {
            return Err(Error::param(format!(
                "need K <= L <= N, got K={k}, L={l}, N={n}"
            )));
        }
        if d % 2 == 0 || d >= n {
            return Err(Error::param(format!(
                "BEM order D={d} must be odd and below N"
            )));
        }
        if self.pilot_zone_len() > n {
            return Err(Error::param(format!(
                "G(2D-1) = {} pilot subcarriers exceed N = {n}",
                self.pilot_zone_len()
            )));
        }
        if self.oscillators == 0 {
            return Err(Error::param("oscillators must be positive"));
        }
        if !(self.doppler_norm >= 0.0 && self.doppler_norm.is_finite()) {
            return Err(Error::param("doppler_norm must be finite and non-negative"));
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return Err(Error::param("snr_db is NaN"));
            }
        }
        if let Some(p) = &self.tap_powers {
            if p.len() != k || p.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::param("tap_powers must hold K positive values"));
            }
        }
        Ok(())
    }

    /// Parse and validate a configuration from TOML with the fields at top
    /// level.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Per-strong-tap average powers summing to one.
    pub fn normalized_tap_powers(&self) -> Vec<f64> {
        match &self.tap_powers {
            Some(p) => {
                let total: f64 = p.iter().sum();
                p.iter().map(|x| x / total).collect()
            }
            None => vec![1.0 / self.strong_taps as f64; self.strong_taps],
        }
    }
}

/// One transmitted OFDM symbol in both domains.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmSymbol {
    pub freq: Vec<C64>,
    pub time: Vec<C64>,
}

impl OfdmSymbol {
    pub fn from_freq(dft: &UnitaryDft, freq: Vec<C64>) -> Result<Self> {
        let time = ofdm_modulate(dft, &freq)?;
        Ok(Self { freq, time })
    }
}

/// `s = W^H S`
pub fn ofdm_modulate(dft: &UnitaryDft, freq: &[C64]) -> Result<Vec<C64>> {
    if freq.len() != dft.len() {
        return Err(Error::dim(format!(
            "symbol length {} vs N = {}",
            freq.len(),
            dft.len()
        )));
    }
    Ok(dft.inverse(freq))
}

/// `Y = W y`
pub fn ofdm_demodulate(dft: &UnitaryDft, time: &[C64]) -> Result<Vec<C64>> {
    if time.len() != dft.len() {
        return Err(Error::dim(format!(
            "received length {} vs N = {}",
            time.len(),
            dft.len()
        )));
    }
    Ok(dft.forward(time))
}

/// Draw the common strong-tap support: `K` distinct taps out of `L`, sorted.
pub fn generate_support<R: Rng + ?Sized>(
    taps: usize,
    strong: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if strong > taps {
        return Err(Error::param(format!("K = {strong} exceeds L = {taps}")));
    }
    let mut support = sample(rng, taps, strong).into_vec();
    support.sort_unstable();
    Ok(support)
}

fn check_support(cfg: &SystemConfig, support: &[usize]) -> Result<()> {
    if support.len() != cfg.strong_taps || support.iter().any(|&l| l >= cfg.taps) {
        return Err(Error::dim(format!(
            "support {support:?} must hold K = {} taps below L = {}",
            cfg.strong_taps, cfg.taps
        )));
    }
    Ok(())
}

/// Unit-power Jakes process sampled at `0..n` with `fd` cycles per sample.
fn jakes_process<R: Rng + ?Sized>(n: usize, fd: f64, oscillators: usize, rng: &mut R) -> Vec<C64> {
    let rotation: f64 = rng.random::<f64>() * 2.0 * PI;
    let scale = 1.0 / (oscillators as f64).sqrt();
    let mut out = vec![ZERO; n];
    for m in 0..oscillators {
        let angle = (2.0 * PI * m as f64 + rotation) / oscillators as f64;
        let phase = rng.random::<f64>() * 2.0 * PI;
        let omega = 2.0 * PI * fd * angle.cos();
        // re-anchor the phasor recurrence every 64 samples to bound drift
        for (block, chunk) in out.chunks_mut(64).enumerate() {
            let step = C64::from_polar(1.0, omega);
            let mut z = C64::from_polar(scale, omega * (block * 64) as f64 + phase);
            for v in chunk {
                *v += z;
                z *= step;
            }
        }
    }
    out
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

/// Generate a doubly-selective channel on the given common support.
///
/// Each (antenna, strong tap) pair gets an independent fading process; taps
/// outside `support` are identically zero.
pub fn generate_ds_channel<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    support: &[usize],
    basis: &BasisMatrix,
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    check_support(cfg, support)?;
    if basis.n() != cfg.subcarriers || basis.order() != cfg.bem_order {
        return Err(Error::dim("basis does not match the configuration"));
    }
    let powers = cfg.normalized_tap_powers();
    match cfg.channel_model {
        ChannelModel::Jakes => {
            let n = cfg.subcarriers;
            let fd = cfg.doppler_norm / n as f64;
            let mut ch = ChannelRealization::zeros(cfg.antennas, n, cfg.taps);
            for a in 0..cfg.antennas {
                for (&l, &p) in support.iter().zip(&powers) {
                    let amp = p.sqrt();
                    let traj: Vec<C64> = jakes_process(n, fd, cfg.oscillators, rng)
                        .into_iter()
                        .map(|v| v * amp)
                        .collect();
                    ch.set_tap_trajectory(a, l, &traj);
                }
            }
            ch.set_support(support.to_vec());
            Ok(ch)
        }
        ChannelModel::BemExact => {
            let d = cfg.bem_order;
            let mut theta = BemCoefficients::zeros(cfg.antennas, d, cfg.taps);
            for a in 0..cfg.antennas {
                for (&l, &p) in support.iter().zip(&powers) {
                    for k in 0..d {
                        theta.set(a, k, l, complex_gaussian(rng, p / d as f64));
                    }
                }
            }
            theta.refresh_support();
            let mut ch = bem_reconstruct(&theta, basis)?;
            ch.set_support(support.to_vec());
            Ok(ch)
        }
    }
}

/// Attach the BEM residual `ε` of every tap to `ch`.
pub fn attach_modeling_error(ch: &mut ChannelRealization, basis: &BasisMatrix) -> Result<()> {
    let mut eps = vec![ZERO; ch.as_slice().len()];
    let (n, taps) = (ch.n(), ch.taps());
    for a in 0..ch.antennas() {
        for l in 0..taps {
            let (_, e) = bem_fit(&ch.tap_trajectory(a, l), basis)?;
            for (t, v) in e.into_iter().enumerate() {
                eps[(a * n + t) * taps + l] = v;
            }
        }
    }
    ch.set_modeling_error(Some(eps))
}

/// Noiseless received samples `y[n] = Σ_a Σ_l h_a[n, l] s_a[(n − l) mod N]`.
pub fn apply_channel_time(ch: &ChannelRealization, symbols: &[OfdmSymbol]) -> Result<Vec<C64>> {
    if symbols.len() != ch.antennas() {
        return Err(Error::dim(format!(
            "{} symbols for {} antennas",
            symbols.len(),
            ch.antennas()
        )));
    }
    let n = ch.n();
    if symbols.iter().any(|s| s.time.len() != n) {
        return Err(Error::dim("symbol length differs from channel N"));
    }
    let mut y = vec![ZERO; n];
    for (a, sym) in symbols.iter().enumerate() {
        for (t, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for l in 0..ch.taps() {
                let h = ch.get(a, t, l);
                if h != ZERO {
                    acc += h * sym.time[(t + n - l % n) % n];
                }
            }
            *out += acc;
        }
    }
    Ok(y)
}

/// Add circular complex Gaussian noise at the given SNR (relative to the
/// mean sample power of `y`). An infinite SNR returns `y` unchanged.
pub fn add_noise<R: Rng + ?Sized>(y: &[C64], snr_db: f64, rng: &mut R) -> Result<Vec<C64>> {
    if snr_db.is_nan() {
        return Err(Error::param("SNR is NaN"));
    }
    if snr_db == f64::INFINITY {
        return Ok(y.to_vec());
    }
    if y.is_empty() {
        return Err(Error::dim("empty signal"));
    }
    let power = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
    if power == 0.0 {
        return Err(Error::Degenerate(
            "cannot set noise level for an all-zero signal".into(),
        ));
    }
    let sigma2 = power / 10f64.powf(snr_db / 10.0);
    Ok(y.iter()
        .map(|v| v + complex_gaussian(rng, sigma2))
        .collect())
}
