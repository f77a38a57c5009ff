//! Spectral-efficiency functionals and their gain derivatives.
//!
//! All values are in bits per pulse (equivalently bits/s/Hz for this
//! narrowband model). Gradients are with respect to the amplifier gains and
//! indexed by 1-based segment number.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::ChannelCoefficients;

/// Receiver used at the end of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverKind {
    /// Single-symbol heterodyne detection (Shannon rate of the Gaussian channel).
    Heterodyne,
    /// Optimal joint-detection receiver attaining the Holevo rate.
    Holevo,
    /// Single-symbol homodyne detection.
    Homodyne,
    /// Hadamard-code receiver of the given order (a power of two, at least 2).
    Hadamard(u32),
}

impl ReceiverKind {
    pub fn hadamard(order: u32) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::domain(format!(
                "Hadamard order must be a power of two >= 2, got {order}"
            )));
        }
        Ok(Self::Hadamard(order))
    }

    /// Spectral efficiency for the per-pulse receivers. The Hadamard receiver is
    /// only characterized in the noiseless high-baud-rate setting; see
    /// [`crate::quantum_limit::rate_hadamard`].
    pub fn spectral_efficiency(&self, coeffs: &ChannelCoefficients, n: f64) -> Option<f64> {
        match self {
            Self::Heterodyne => Some(shannon_se(coeffs, n)),
            Self::Holevo => Some(holevo_se(coeffs, n)),
            Self::Homodyne => Some(homodyne_se(coeffs, n)),
            Self::Hadamard(_) => None,
        }
    }

    /// Derivative of [`ReceiverKind::spectral_efficiency`] with respect to `G_i`.
    pub fn gain_gradient(&self, coeffs: &ChannelCoefficients, n: f64, i: usize) -> Option<f64> {
        match self {
            Self::Heterodyne => Some(shannon_gain_gradient(coeffs, n, i)),
            Self::Holevo => Some(holevo_gain_gradient(coeffs, n, i)),
            Self::Homodyne => Some(homodyne_gain_gradient(coeffs, n, i)),
            Self::Hadamard(_) => None,
        }
    }
}

/// Entropy of a thermal state with mean photon number `x`, in bits:
/// `g(x) = (x+1)·log2(x+1) − x·log2(x)`, with `g(0) = 0`.
///
/// Evaluated as `log2(1+x) + x·log2(1+1/x)`, which stays accurate for both
/// tiny and huge `x`. Negative arguments return NaN; see [`g_checked`].
pub fn g(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x < 0.0 {
        return f64::NAN;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    (x.ln_1p() + x * (1.0 / x).ln_1p()) / LN_2
}

pub fn g_checked(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("g is defined for x >= 0, got {x}")));
    }
    Ok(g(x))
}

/// `g'(x) = log2(1 + 1/x)`; infinite at 0.
pub fn g_prime(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        (1.0 / x).ln_1p() / LN_2
    }
}

/// `g(a) − g(b)` for `a ≥ b ≥ 0`, without forming the two large terms.
pub fn g_diff(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return g(a);
    }
    if a == b {
        return 0.0;
    }
    let d = a - b;
    // log2((1+a)/(1+b)) + d·log2(1+1/a) + b·log2((1+1/a)/(1+1/b))
    let first = (d / (1.0 + b)).ln_1p();
    let second = d * (1.0 / a).ln_1p();
    let third = b * (-d / (a * (1.0 + b))).ln_1p();
    (first + second + third) / LN_2
}

/// `log2 f_β(x)` where `f_β(x) = (1 + 1/x)^(x+β)`.
///
/// At `x = 0` the value is continued to `+∞`, `0` or `−∞` according to the
/// sign of `β`.
pub fn log2_f_beta(x: f64, beta: f64) -> f64 {
    if x == 0.0 {
        return if beta > 0.0 {
            f64::INFINITY
        } else if beta < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
    }
    (x + beta) * g_prime(x)
}

pub fn snr(coeffs: &ChannelCoefficients, n: f64) -> f64 {
    coeffs.tau * n / (1.0 + coeffs.nu)
}

/// Heterodyne (Shannon) rate `log2(1 + τn/(1+ν))`.
pub fn shannon_se(coeffs: &ChannelCoefficients, n: f64) -> f64 {
    snr(coeffs, n).ln_1p() / LN_2
}

/// Holevo rate `g(τn + ν) − g(ν)`.
pub fn holevo_se(coeffs: &ChannelCoefficients, n: f64) -> f64 {
    g_diff(coeffs.tau * n + coeffs.nu, coeffs.nu)
}

/// Homodyne rate `½·log2(1 + 4τn/(1+2ν))`.
///
/// Homodyne detection measures one quadrature, so only half a complex degree
/// of freedom carries information. The rate equals the heterodyne rate at
/// `τn = 2` on a noiseless channel and exceeds it below that.
pub fn homodyne_se(coeffs: &ChannelCoefficients, n: f64) -> f64 {
    0.5 * (4.0 * coeffs.tau * n / (1.0 + 2.0 * coeffs.nu)).ln_1p() / LN_2
}

fn gain_at(coeffs: &ChannelCoefficients, i: usize) -> f64 {
    let k = coeffs.segments();
    assert!((1..=k).contains(&i), "segment index {i} outside 1..={k}");
    // τ_i = G_i·η·τ_{i-1}
    coeffs.tau_i[i] / (coeffs.eta * coeffs.tau_i[i - 1])
}

/// `∂S_sh/∂G_i`; non-negative, and zero exactly at the last segment.
pub fn shannon_gain_gradient(coeffs: &ChannelCoefficients, n: f64, i: usize) -> f64 {
    let g = gain_at(coeffs, i);
    let s = snr(coeffs, n);
    let beta = coeffs.beta[i];
    let d_snr = s / g * (1.0 - beta) / (1.0 + coeffs.nu);
    d_snr / ((1.0 + s) * LN_2)
}

/// `∂S_ho/∂G_i = (1/G_i)·log2[f_β(τn+ν) / f_β(ν)]` with `β = β_i`.
///
/// Returns `−∞` when `ν = 0` and `β_i > 0` (the unamplified link), which is
/// the limit of the derivative there.
pub fn holevo_gain_gradient(coeffs: &ChannelCoefficients, n: f64, i: usize) -> f64 {
    let g = gain_at(coeffs, i);
    let beta = coeffs.beta[i];
    let received = coeffs.tau * n + coeffs.nu;
    (log2_f_beta(received, beta) - log2_f_beta(coeffs.nu, beta)) / g
}

/// `∂S_hom/∂G_i`; its sign is the sign of `1 − 2β_i`.
pub fn homodyne_gain_gradient(coeffs: &ChannelCoefficients, n: f64, i: usize) -> f64 {
    let g = gain_at(coeffs, i);
    let s = 4.0 * coeffs.tau * n / (1.0 + 2.0 * coeffs.nu);
    let beta = coeffs.beta[i];
    let d_snr = s / g * (1.0 - 2.0 * beta) / (1.0 + 2.0 * coeffs.nu);
    0.5 * d_snr / ((1.0 + s) * LN_2)
}

/// Gradient over all `K` gains.
pub fn gradient(receiver: ReceiverKind, coeffs: &ChannelCoefficients, n: f64) -> Option<Vec<f64>> {
    (1..=coeffs.segments())
        .map(|i| receiver.gain_gradient(coeffs, n, i))
        .collect()
}
