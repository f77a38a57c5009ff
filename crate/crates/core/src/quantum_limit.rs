//! Link capacity in bits per second as the baud rate grows at fixed optical
//! power.
//!
//! With `N` photons per second spread over `b` pulses per second, each pulse
//! carries `N/b` photons. Single-symbol receivers saturate at
//! `Nτ/((1+ν)·ln 2)`; the joint-detection receiver keeps growing.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se::g_diff;

/// Baud-rate bracket searched for the crossover.
pub const CROSSOVER_BRACKET: (f64, f64) = (1.0, 1e18);
/// Relative width at which the crossover bisection stops.
pub const CROSSOVER_TOLERANCE: f64 = 1e-6;

/// Heterodyne rate `b·log2(1 + τ(N/b)/(1+ν))` in bits/s.
pub fn rate_ossr(flux: f64, tau: f64, nu: f64, baud: f64) -> f64 {
    baud * (tau * flux / (baud * (1.0 + nu))).ln_1p() / LN_2
}

/// Supremum of [`rate_ossr`] over the baud rate.
pub fn ossr_bound(flux: f64, tau: f64, nu: f64) -> f64 {
    flux * tau / ((1.0 + nu) * LN_2)
}

/// Joint-detection rate `b·(g(τN/b + ν) − g(ν))` with per-pulse noise `ν`.
pub fn rate_ojdr(flux: f64, tau: f64, nu: f64, baud: f64) -> f64 {
    baud * g_diff(tau * flux / baud + nu, nu)
}

/// Limit of [`rate_ojdr`] as `b → ∞`: `Nτ·log2(1 + 1/ν)`, infinite at `ν = 0`.
pub fn ojdr_asymptote(flux: f64, tau: f64, nu: f64) -> f64 {
    if nu == 0.0 {
        f64::INFINITY
    } else {
        flux * tau * (1.0 / nu).ln_1p() / LN_2
    }
}

/// Joint-detection rate when the noise is a fixed flux (photons/s), so each
/// pulse sees `ν_flux/b`.
pub fn rate_ojdr_noise_flux(flux: f64, tau: f64, nu_flux: f64, baud: f64) -> f64 {
    baud * g_diff((tau * flux + nu_flux) / baud, nu_flux / baud)
}

/// Leading term `τN·log2(b/(τN + ν_flux))` of [`rate_ojdr_noise_flux`].
pub fn ojdr_log_asymptote(flux: f64, tau: f64, nu_flux: f64, baud: f64) -> f64 {
    tau * flux * (baud / (tau * flux + nu_flux)).log2()
}

/// Noiseless Hadamard-code receiver of order `k`:
/// `(b/k)·(1 − exp(−kτN/b))·log2 k`, with `N` the photon flux.
pub fn rate_hadamard(flux: f64, tau: f64, baud: f64, order: u32) -> Result<f64> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::domain(format!(
            "Hadamard order must be a power of two >= 2, got {order}"
        )));
    }
    let k = order as f64;
    Ok(baud / k * -(-k * tau * flux / baud).exp_m1() * k.log2())
}

/// Baud rate where the joint-detection rate reaches the single-symbol bound,
/// or `None` if it never does.
pub fn quantum_limit_crossover(flux: f64, tau: f64, nu: f64) -> Result<Option<f64>> {
    if !(tau * flux > 0.0) {
        return Err(Error::domain("crossover needs τ·N > 0"));
    }
    let bound = ossr_bound(flux, tau, nu);
    if ojdr_asymptote(flux, tau, nu) <= bound {
        return Ok(None);
    }
    let above = |b: f64| rate_ojdr(flux, tau, nu, b) >= bound;
    let (mut lo, mut hi) = CROSSOVER_BRACKET;
    if above(lo) {
        return Ok(Some(lo));
    }
    if !above(hi) {
        return Ok(None);
    }
    while (hi - lo) / hi > CROSSOVER_TOLERANCE {
        let mid = (lo * hi).sqrt();
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// How thermal noise scales with the baud rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum NoiseModel {
    /// Fixed noise photons per pulse.
    PerPulse(f64),
    /// Fixed noise photons per second, diluted over the pulses.
    PerSecond(f64),
}

impl NoiseModel {
    pub fn per_pulse(&self, baud: f64) -> f64 {
        match *self {
            Self::PerPulse(nu) => nu,
            Self::PerSecond(flux) => flux / baud,
        }
    }
}

/// Rates over a set of baud rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaudScan {
    pub photon_flux: f64,
    pub tau: f64,
    pub noise: NoiseModel,
    pub baud_points: Vec<f64>,
    pub rates_ossr: Vec<f64>,
    pub rates_ojdr: Vec<f64>,
}

impl BaudScan {
    pub fn compute(
        photon_flux: f64,
        tau: f64,
        noise: NoiseModel,
        baud_points: Vec<f64>,
    ) -> Result<Self> {
        if baud_points.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::domain("baud rates must be > 0"));
        }
        if baud_points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("baud rates must be ascending"));
        }
        let rates_ossr = baud_points
            .iter()
            .map(|&b| rate_ossr(photon_flux, tau, noise.per_pulse(b), b))
            .collect();
        let rates_ojdr = baud_points
            .iter()
            .map(|&b| match noise {
                NoiseModel::PerPulse(nu) => rate_ojdr(photon_flux, tau, nu, b),
                NoiseModel::PerSecond(nf) => rate_ojdr_noise_flux(photon_flux, tau, nf, b),
            })
            .collect();
        Ok(Self {
            photon_flux,
            tau,
            noise,
            baud_points,
            rates_ossr,
            rates_ojdr,
        })
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}
