//! The K-segment amplified link and its attenuation/noise bookkeeping.
//!
//! Segment `i` (1-based) is a pure-loss span of transmissivity `η` followed by
//! a quantum-limited amplifier of gain `G_i`. Mean photon number evolves as
//! `x ↦ G·η·x + G − 1`, so after `i` segments an input of `n` photons has
//! become `τ_i·n + ν_i`.
//!
//! Indexing convention: coefficient sequences are stored with index equal to
//! the segment number, `0..=K`. Gains are stored 0-based (`gains[0]` is `G_1`)
//! but every public function taking a segment index expects it 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed on the power constraint.
pub const POWER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    /// Attenuation coefficient in 1/km.
    pub alpha: f64,
    /// Total length in km.
    pub length: f64,
    /// Number of equal-length segments. The amplifier after the last segment
    /// is always off, so `segments - 1` amplifiers are effective.
    pub segments: usize,
    /// Photons per pulse at the transmitter. The link power cap equals this.
    pub photons: f64,
}

impl LinkConfig {
    pub fn new(alpha: f64, length: f64, segments: usize, photons: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            length,
            segments,
            photons,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::domain(format!(
                "length must be > 0, got {}",
                self.length
            )));
        }
        if self.segments == 0 {
            return Err(Error::domain("segment count must be >= 1"));
        }
        if !(self.photons >= 0.0) || !self.photons.is_finite() {
            return Err(Error::domain(format!(
                "photon number must be >= 0, got {}",
                self.photons
            )));
        }
        Ok(())
    }

    /// Per-segment transmissivity `exp(-αL/K)`.
    pub fn eta(&self) -> f64 {
        (-self.alpha * self.length / self.segments as f64).exp()
    }

    /// Power cap; the sender always transmits at it.
    pub fn n_max(&self) -> f64 {
        self.photons
    }

    pub fn max_gain(&self) -> f64 {
        max_gain(self)
    }

    /// Transmissivity of the whole unamplified fiber, `exp(-αL)`.
    pub fn fiber_transmissivity(&self) -> f64 {
        (-self.alpha * self.length).exp()
    }
}

/// Gain that restores a spent segment output `η·n` exactly to the cap `n`.
pub fn max_gain(config: &LinkConfig) -> f64 {
    let n = config.photons;
    (1.0 + n) / (1.0 + config.eta() * n)
}

/// Amplifier gains `G_1..G_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GainProfile {
    gains: Vec<f64>,
}

impl GainProfile {
    /// Wraps raw gains. Only finiteness and positivity are checked here; use
    /// [`GainProfile::validate`] for the full feasibility contract.
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::contract("gain profile must not be empty"));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::domain(format!(
                "gain must be finite and positive, got {g}"
            )));
        }
        Ok(Self { gains })
    }

    /// All amplifiers off.
    pub fn unamplified(segments: usize) -> Self {
        Self {
            gains: vec![1.0; segments.max(1)],
        }
    }

    /// `G_i = G_max` for `i < K`, `G_K = 1`.
    pub fn fully_amplified(config: &LinkConfig) -> Self {
        let mut gains = vec![config.max_gain(); config.segments];
        gains[config.segments - 1] = 1.0;
        Self { gains }
    }

    /// Builds a profile from the free gains `G_1..G_{K-1}`, appending `G_K = 1`.
    pub fn from_free(free: &[f64]) -> Result<Self> {
        let mut gains = free.to_vec();
        gains.push(1.0);
        Self::new(gains)
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Gains of the in-line amplifiers `G_1..G_{K-1}`.
    pub fn free(&self) -> &[f64] {
        &self.gains[..self.gains.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// 1-based access.
    pub fn gain(&self, i: usize) -> f64 {
        self.gains[i - 1]
    }

    pub fn is_non_increasing(&self) -> bool {
        self.gains.windows(2).all(|w| w[0] >= w[1])
    }

    /// Box constraints `1 ≤ G_i ≤ G_max`, `G_K = 1`, and matching length.
    pub fn validate(&self, config: &LinkConfig) -> Result<()> {
        if self.gains.len() != config.segments {
            return Err(Error::contract(format!(
                "profile has {} gains but link has {} segments",
                self.gains.len(),
                config.segments
            )));
        }
        let g_max = config.max_gain() * (1.0 + POWER_TOLERANCE);
        for (j, &g) in self.gains.iter().enumerate() {
            if g < 1.0 || g > g_max {
                return Err(Error::contract(format!(
                    "gain G_{} = {g} outside [1, {}]",
                    j + 1,
                    config.max_gain()
                )));
            }
        }
        if self.gains[config.segments - 1] != 1.0 {
            return Err(Error::contract("last amplifier must be off (G_K = 1)"));
        }
        Ok(())
    }
}

/// Attenuation and noise coefficients of a link under a given gain profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCoefficients {
    pub eta: f64,
    /// `τ_0..τ_K`, attenuation after each segment.
    pub tau_i: Vec<f64>,
    /// `ν_0..ν_K`, accumulated noise after each segment.
    pub nu_i: Vec<f64>,
    pub tau: f64,
    pub nu: f64,
    /// `τ_{>0}..τ_{>K}`, attenuation of the remaining segments.
    pub tau_gt: Vec<f64>,
    /// `ν_{>0}..ν_{>K}`, noise added by the remaining segments.
    pub nu_gt: Vec<f64>,
    /// `β_i = τ_{>i} − ν_{>i}` for `i = 0..K`.
    pub beta: Vec<f64>,
}

impl ChannelCoefficients {
    pub fn segments(&self) -> usize {
        self.tau_i.len() - 1
    }

    /// Smallest 1-based amplifier index whose output exceeds `n_max`, if any.
    pub fn power_violation(&self, n: f64, n_max: f64) -> Option<usize> {
        let cap = n_max * (1.0 + POWER_TOLERANCE);
        (1..=self.segments()).find(|&i| self.tau_i[i] * n + self.nu_i[i] > cap)
    }
}

/// Runs the per-segment recursion and the backward cumulative sums.
pub fn propagate(config: &LinkConfig, profile: &GainProfile) -> Result<ChannelCoefficients> {
    if profile.len() != config.segments {
        return Err(Error::contract(format!(
            "profile has {} gains but link has {} segments",
            profile.len(),
            config.segments
        )));
    }
    Ok(propagate_gains(config.eta(), profile.gains()))
}

pub(crate) fn propagate_gains(eta: f64, gains: &[f64]) -> ChannelCoefficients {
    let k = gains.len();
    let mut tau_i = Vec::with_capacity(k + 1);
    let mut nu_i = Vec::with_capacity(k + 1);
    tau_i.push(1.0);
    nu_i.push(0.0);
    for (j, &g) in gains.iter().enumerate() {
        tau_i.push(g * eta * tau_i[j]);
        nu_i.push(g * eta * nu_i[j] + g - 1.0);
    }

    let mut tau_gt = vec![1.0; k + 1];
    let mut nu_gt = vec![0.0; k + 1];
    for i in (0..k).rev() {
        let g_next = gains[i];
        tau_gt[i] = eta * g_next * tau_gt[i + 1];
        nu_gt[i] = (g_next - 1.0) * tau_gt[i + 1] + nu_gt[i + 1];
    }
    let beta = tau_gt.iter().zip(&nu_gt).map(|(t, v)| t - v).collect();

    ChannelCoefficients {
        eta,
        tau: tau_i[k],
        nu: nu_i[k],
        tau_i,
        nu_i,
        tau_gt,
        nu_gt,
        beta,
    }
}

/// Returns the first violating amplifier (1-based) or `None` if the field
/// stays under the cap at every amplifier output.
pub fn check_power_constraint(config: &LinkConfig, coeffs: &ChannelCoefficients) -> Option<usize> {
    coeffs.power_violation(config.photons, config.n_max())
}

/// Exchanges `G_i` and `G_{i+1}` (1-based). The last gain never moves.
pub fn swap_gains(profile: &GainProfile, i: usize) -> Result<GainProfile> {
    let k = profile.len();
    if i == 0 || i + 1 >= k {
        return Err(Error::domain(format!(
            "swap index {i} out of range 1..{} for K = {k}",
            k.saturating_sub(1)
        )));
    }
    let mut gains = profile.gains.clone();
    gains.swap(i - 1, i);
    Ok(GainProfile { gains })
}

/// 2x2 transfer matrix acting on `(x, 1)` where `x` is a mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(pub [[f64; 2]; 2]);

impl TransferMatrix {
    pub const IDENTITY: Self = Self([[1.0, 0.0], [0.0, 1.0]]);

    /// One lossy segment followed by an amplifier of gain `g`.
    pub fn segment(eta: f64, g: f64) -> Self {
        Self([[eta * g, g - 1.0], [0.0, 1.0]])
    }

    /// Derivative of [`TransferMatrix::segment`] with respect to `g`.
    pub fn segment_derivative(eta: f64) -> Self {
        Self([[eta, 1.0], [0.0, 0.0]])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[0.0; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self(out)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

/// `ν_k = ⟨M(G_k)···M(G_1)e_2, e_1⟩`.
pub fn noise_by_transfer_matrices(eta: f64, gains: &[f64], k: usize) -> f64 {
    let m = gains[..k].iter().fold(TransferMatrix::IDENTITY, |acc, &g| {
        TransferMatrix::segment(eta, g).mul(&acc)
    });
    m.apply([0.0, 1.0])[0]
}
