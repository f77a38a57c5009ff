//! Continuous amplification (`K → ∞`) and the on-off strategy.
//!
//! In the on-off strategy only the first fraction `γ` of the link is
//! amplified, at the constraint-saturating gain; the rest is bare fiber.
//! Minimizing `E = αLγn` over the launch photon number `n ≤ n0` and `γ`
//! subject to matching the continuous heterodyne rate at `n0` gives problem
//! `E_oo`, solved by [`solve_onoff`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se::g_diff;

/// Points on the log-spaced photon-number grid searched by [`solve_onoff`].
pub const N_GRID_POINTS: usize = 2000;
/// Lower end of the photon-number grid relative to `n0`.
pub const N_GRID_FLOOR: f64 = 1e-6;

/// Fully amplified heterodyne rate in the continuous limit.
pub fn shannon_se_continuous(alpha: f64, length: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let x = -alpha * length / (n + 1.0);
    (x.exp() * n / (1.0 - x.exp_m1() * n)).ln_1p() / std::f64::consts::LN_2
}

/// `αL·n`, the energy of continuous full amplification.
pub fn continuous_energy_shannon(alpha: f64, length: f64, n: f64) -> f64 {
    alpha * length * n
}

/// `(τ_∞(γ), ν_∞(γ))` for the on-off strategy.
pub fn onoff_coefficients(alpha: f64, length: f64, n: f64, gamma: f64) -> (f64, f64) {
    let al = alpha * length;
    let tau = (-al * (1.0 - gamma * n / (1.0 + n))).exp();
    let nu = ((-al * (1.0 - gamma)).exp() - tau) * n;
    (tau, nu.max(0.0))
}

/// Holevo rate and energy of the on-off strategy.
pub fn onoff_se_and_energy(alpha: f64, length: f64, n: f64, gamma: f64) -> (f64, f64) {
    let (_, nu) = onoff_coefficients(alpha, length, n, gamma);
    // τ_∞·n + ν_∞ = e^{−αL(1−γ)}·n
    let received = (-alpha * length * (1.0 - gamma)).exp() * n;
    let se = g_diff(received, nu.min(received));
    (se, alpha * length * gamma * n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnOffSolution {
    pub n: f64,
    pub gamma: f64,
    pub energy: f64,
    /// `S_sh^{op,∞}(n0)`.
    pub target: f64,
    /// `αL·n0`.
    pub baseline_energy: f64,
    /// Set when the rate was found non-monotone in `γ` for some `n` and the
    /// probe scan decided the bracket there.
    pub used_fallback: bool,
}

impl OnOffSolution {
    pub fn savings_fraction(&self) -> f64 {
        if self.baseline_energy > 0.0 {
            1.0 - self.energy / self.baseline_energy
        } else {
            0.0
        }
    }
}

/// Probes of the rate along `γ` per photon number.
pub const GAMMA_PROBES: usize = 256;

/// Smallest `γ` in `[0, 1]` with rate `≥ target` at photon number `n`, or
/// `None` if there is none. Second value reports whether the rate was found
/// non-monotone in `γ`, in which case the probe scan picks the first feasible
/// bracket and bisection refines inside it.
pub fn minimal_gamma(alpha: f64, length: f64, n: f64, target: f64) -> (Option<f64>, bool) {
    let rate = |gamma: f64| onoff_se_and_energy(alpha, length, n, gamma).0;
    let ok = |gamma: f64| rate(gamma) >= target * (1.0 - 1e-12);
    let at = |j: usize| j as f64 / GAMMA_PROBES as f64;

    let probes: Vec<f64> = (0..=GAMMA_PROBES).map(|j| rate(at(j))).collect();
    let monotone = probes
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));

    let (mut lo, mut hi) = if monotone {
        if ok(0.0) {
            return (Some(0.0), false);
        }
        if !ok(1.0) {
            return (None, false);
        }
        (0.0, 1.0)
    } else {
        match (0..=GAMMA_PROBES).find(|&j| probes[j] >= target * (1.0 - 1e-12)) {
            None => return (None, true),
            Some(0) => return (Some(0.0), true),
            Some(j) => (at(j - 1), at(j)),
        }
    };
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (Some(hi), !monotone)
}

/// Solves `E_oo` for a heterodyne baseline launching `n0` photons.
pub fn solve_onoff(alpha: f64, length: f64, n0: f64) -> Result<OnOffSolution> {
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::domain(format!("n0 must be > 0, got {n0}")));
    }
    if !(alpha >= 0.0) || !(length > 0.0) {
        return Err(Error::domain("alpha must be >= 0 and length > 0"));
    }
    let target = shannon_se_continuous(alpha, length, n0);
    let baseline_energy = continuous_energy_shannon(alpha, length, n0);

    let lo = (n0 * N_GRID_FLOOR).ln();
    let hi = n0.ln();
    let mut best: Option<(f64, f64, f64)> = None;
    let mut used_fallback = false;
    for j in 0..N_GRID_POINTS {
        let n = if j + 1 == N_GRID_POINTS {
            n0
        } else {
            (lo + (hi - lo) * j as f64 / (N_GRID_POINTS - 1) as f64).exp()
        };
        let (gamma, fallback) = minimal_gamma(alpha, length, n, target);
        used_fallback |= fallback;
        if let Some(gamma) = gamma {
            let energy = alpha * length * gamma * n;
            if best.is_none_or(|(e, _, _)| energy < e) {
                best = Some((energy, n, gamma));
            }
        }
    }
    // γ = 1, n = n0 always qualifies: the joint receiver never does worse than
    // heterodyne on the same channel.
    let (energy, n, gamma) =
        best.ok_or_else(|| Error::contract("on-off problem has no feasible point"))?;
    Ok(OnOffSolution {
        n,
        gamma,
        energy,
        target,
        baseline_energy,
        used_fallback,
    })
}
