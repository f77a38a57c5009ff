//! Independent oracles shared by the integration suites. Nothing here calls
//! into the optimizer or the analytic gradients.
#![allow(dead_code)]

use fiberlink::se::g;

pub fn eta(alpha: f64, length: f64, k: usize) -> f64 {
    (-alpha * length / k as f64).exp()
}

/// Literal recursion, returns (τ, ν).
pub fn coefficients(eta: f64, gains: &[f64]) -> (f64, f64) {
    let mut tau = 1.0;
    let mut nu = 0.0;
    for &gain in gains {
        tau *= gain * eta;
        nu = gain * eta * nu + gain - 1.0;
    }
    (tau, nu)
}

pub fn holevo(eta: f64, n: f64, gains: &[f64]) -> f64 {
    let (tau, nu) = coefficients(eta, gains);
    g(tau * n + nu) - g(nu)
}

pub fn heterodyne(eta: f64, n: f64, gains: &[f64]) -> f64 {
    let (tau, nu) = coefficients(eta, gains);
    (1.0 + tau * n / (1.0 + nu)).log2()
}

pub fn homodyne(eta: f64, n: f64, gains: &[f64]) -> f64 {
    let (tau, nu) = coefficients(eta, gains);
    0.5 * (1.0 + 4.0 * tau * n / (1.0 + 2.0 * nu)).log2()
}

pub fn exact_energy(eta: f64, n: f64, gains: &[f64]) -> f64 {
    let mut x = n;
    let mut e = 0.0;
    for &gain in gains {
        e += (gain - 1.0) * (eta * x + 1.0);
        x = gain * eta * x + gain - 1.0;
    }
    e
}

pub fn relaxed_energy(eta: f64, n: f64, gains: &[f64]) -> f64 {
    gains
        .iter()
        .map(|gain| (gain - 1.0) * (eta * n + 1.0))
        .sum()
}

pub fn g_max(eta: f64, n: f64) -> f64 {
    (1.0 + n) / (1.0 + eta * n)
}

/// Fully amplified heterodyne rate by direct propagation.
pub fn shannon_target(eta: f64, n: f64, k: usize) -> f64 {
    let mut gains = vec![g_max(eta, n); k];
    gains[k - 1] = 1.0;
    heterodyne(eta, n, &gains)
}

/// Exhaustive search over the free gains (K ≤ 3) on a uniform grid with
/// `steps` intervals per axis. Returns the minimal objective among grid points
/// meeting `rate ≥ target`, or `None`.
pub fn grid_minimum(
    eta: f64,
    n: f64,
    k: usize,
    steps: usize,
    target: f64,
    rate: impl Fn(f64, f64, &[f64]) -> f64,
    objective: impl Fn(f64, f64, &[f64]) -> f64,
) -> Option<(f64, Vec<f64>)> {
    let gm = g_max(eta, n);
    let axis: Vec<f64> = (0..=steps)
        .map(|j| 1.0 + (gm - 1.0) * j as f64 / steps as f64)
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |gains: Vec<f64>| {
        if rate(eta, n, &gains) >= target {
            let e = objective(eta, n, &gains);
            if best.as_ref().is_none_or(|(b, _)| e < *b) {
                best = Some((e, gains));
            }
        }
    };
    match k {
        1 => consider(vec![1.0]),
        2 => {
            for &a in &axis {
                consider(vec![a, 1.0]);
            }
        }
        3 => {
            for &a in &axis {
                for &b in &axis {
                    consider(vec![a, b, 1.0]);
                }
            }
        }
        _ => panic!("grid oracle supports K <= 3"),
    }
    best
}

/// Maximum of `rate` over the grid (K ≤ 3).
pub fn grid_maximum(
    eta: f64,
    n: f64,
    k: usize,
    steps: usize,
    rate: impl Fn(f64, f64, &[f64]) -> f64,
) -> (f64, Vec<f64>) {
    grid_minimum(eta, n, k, steps, f64::NEG_INFINITY, &rate, |e, n, gs| {
        -rate(e, n, gs)
    })
    .map(|(v, gs)| (-v, gs))
    .unwrap()
}

/// Smallest single gain G_1 (K = 2) reaching `target`, by bisection on the
/// rate, which is increasing in G_1 on the bracket used.
pub fn bisect_single_gain(eta: f64, n: f64, target: f64) -> f64 {
    let mut lo = 1.0;
    let mut hi = g_max(eta, n);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holevo(eta, n, &[mid, 1.0]) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Central finite difference of `f` along coordinate `i`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += h;
    down[i] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}

pub mod checks;
