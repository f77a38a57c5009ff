//! Property checks shared by the property tests and the acceptance suite.
//! Each returns the worst observed deviation so callers can print it.

use fiberlink::continuous::shannon_se_continuous;
use fiberlink::link::{propagate, swap_gains};
use fiberlink::optimize::{self, EgsProblem, EnergyModel};
use fiberlink::se::{self, ReceiverKind};
use fiberlink::{GainProfile, LinkConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    central_difference, coefficients, exact_energy, g_max, heterodyne, holevo, homodyne,
    relaxed_energy,
};

type Oracle = fn(f64, f64, &[f64]) -> f64;

/// Random link with random gains in `[1, G_max]` and `G_K = 1`.
pub fn random_profile(
    rng: &mut ChaCha8Rng,
    k_range: std::ops::RangeInclusive<usize>,
) -> (LinkConfig, Vec<f64>) {
    let k = rng.gen_range(k_range);
    let length = rng.gen_range(20.0..400.0);
    let n = 10f64.powf(rng.gen_range(1.0..9.0));
    let cfg = LinkConfig::new(0.05, length, k, n).unwrap();
    let gm = g_max(cfg.eta(), n);
    let mut gains: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..gm)).collect();
    gains[k - 1] = 1.0;
    (cfg, gains)
}

/// Ridders' extrapolation of central differences along coordinate `i`,
/// starting from step `h` and shrinking by 1.4 per column.
fn derivative(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    const N: usize = 12;
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    let mut h = h;
    let mut a = [[0.0f64; N]; N];
    a[0][0] = central_difference(&f, x, i, h);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for col in 1..N {
        h /= CON;
        a[0][col] = central_difference(&f, x, i, h);
        let mut fac = CON2;
        for row in 1..=col {
            a[row][col] = (a[row - 1][col] * fac - a[row - 1][col - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[row][col] - a[row - 1][col])
                .abs()
                .max((a[row][col] - a[row - 1][col - 1]).abs());
            if e <= err {
                err = e;
                best = a[row][col];
            }
        }
        if (a[col][col] - a[col - 1][col - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    best
}

fn relative(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GradientErrors {
    pub shannon: f64,
    pub holevo: f64,
    pub homodyne: f64,
    pub energy_exact: f64,
    pub energy_relaxed: f64,
}

impl GradientErrors {
    pub fn worst(&self) -> f64 {
        [
            self.shannon,
            self.holevo,
            self.homodyne,
            self.energy_exact,
            self.energy_relaxed,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Analytic gradients against finite differences of the oracle functionals,
/// over `count` random links with `K ∈ 2..=8`. Rate gradients are compared
/// in the max norm of the gradient: components far below the largest one are
/// dominated by roundoff in the difference quotient.
pub fn gradient_errors(count: usize, seed: u64) -> GradientErrors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GradientErrors::default();
    for _ in 0..count {
        let (cfg, gains) = random_profile(&mut rng, 2..=8);
        let eta = cfg.eta();
        let n = cfg.photons;
        let k = cfg.segments;
        let profile = GainProfile::new(gains.clone()).unwrap();
        let coeffs = propagate(&cfg, &profile).unwrap();

        let rates: [(ReceiverKind, Oracle, &mut f64); 3] = [
            (ReceiverKind::Heterodyne, heterodyne, &mut out.shannon),
            (ReceiverKind::Holevo, holevo, &mut out.holevo),
            (ReceiverKind::Homodyne, homodyne, &mut out.homodyne),
        ];
        for (receiver, oracle, worst) in rates {
            let analytic = se::gradient(receiver, &coeffs, n).unwrap();
            let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // Rates are log-singular at ν = 0; keep the probe from crossing it.
            let nu = coeffs.nu;
            for i in 0..k {
                let fd = derivative(
                    |g| oracle(eta, n, g),
                    &gains,
                    i,
                    0.01 * gains[i] * nu.min(1.0),
                );
                *worst = worst.max(relative(analytic[i], fd, scale));
            }
        }

        let energies: [(EnergyModel, Oracle, &mut f64); 2] = [
            (EnergyModel::Exact, exact_energy, &mut out.energy_exact),
            (
                EnergyModel::Relaxed,
                relaxed_energy,
                &mut out.energy_relaxed,
            ),
        ];
        for (model, oracle, worst) in energies {
            let analytic = optimize::energy_gradient(&cfg, &profile, model);
            // G_K is pinned, so only the free gains carry a derivative.
            for i in 0..k - 1 {
                let fd = derivative(|g| oracle(eta, n, g), &gains, i, 0.01 * gains[i]);
                *worst = worst.max(relative(analytic[i], fd, 1e-12));
            }
        }
    }
    out
}

/// Largest deviation of the gain-swap noise identity
/// `ν(G) − ν(G') = τ_{>i+1}(G_{i+1} − G_i)(1 − η)`, relative to `ν(G)`, and
/// of `τ(G) = τ(G')`.
pub fn swap_identity_error(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < count {
        let (cfg, gains) = random_profile(&mut rng, 3..=10);
        let k = cfg.segments;
        let i = rng.gen_range(1..k - 1);
        if gains[i - 1] >= gains[i] {
            continue;
        }
        let eta = cfg.eta();
        let before = GainProfile::new(gains.clone()).unwrap();
        let after = swap_gains(&before, i).unwrap();
        let (tau_a, nu_a) = coefficients(eta, before.gains());
        let (tau_b, nu_b) = coefficients(eta, after.gains());
        // τ_{>i+1} = Π_{j>i+1} η·G_j
        let tail: f64 = gains[i + 1..].iter().map(|g| eta * g).product();
        let predicted = tail * (gains[i] - gains[i - 1]) * (1.0 - eta);
        let lib = propagate(&cfg, &before).unwrap();
        assert!((lib.tau_gt[i + 1] - tail).abs() <= 1e-12 * tail);
        worst = worst
            .max(relative(nu_a - nu_b, predicted, nu_a.abs()))
            .max(relative(tau_a, tau_b, 0.0));
        done += 1;
    }
    worst
}

/// Smallest `S_ho − S_sh` over random profiles (should be ≥ 0).
pub fn holevo_minus_shannon(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (cfg, gains) = random_profile(&mut rng, 1..=12);
            let coeffs = propagate(&cfg, &GainProfile::new(gains).unwrap()).unwrap();
            se::holevo_se(&coeffs, cfg.photons) - se::shannon_se(&coeffs, cfg.photons)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Worst `(E_solver / E_grid − 1)` of Holevo EGS against a 2000-step grid
/// over `count` random links with `K ∈ {2, 3}`.
pub fn egs_grid_gap(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for j in 0..count {
        let k = 2 + j % 2;
        let cfg = LinkConfig::new(
            0.05,
            rng.gen_range(50.0..500.0),
            k,
            10f64.powf(rng.gen_range(3.0..9.0)),
        )
        .unwrap();
        let eta = cfg.eta();
        let n = cfg.photons;
        let target = super::shannon_target(eta, n, k);
        let (grid, _) = super::grid_minimum(eta, n, k, 2000, target, holevo, exact_energy).unwrap();
        let r = optimize::solve_holevo_egs(&cfg).unwrap();
        let baseline = optimize::baseline_energy(&cfg);
        // Cells needing no amplification have a zero optimum on both sides.
        let gap = (r.energy_exact - grid) / grid.max(1e-9 * baseline);
        worst = worst.max(gap);
    }
    worst
}

/// Largest `|S_segs(K) − S_∞|` over the continuum parameter set.
pub fn continuum_gap(k: usize) -> f64 {
    let mut worst = 0.0f64;
    for alpha in [0.04, 0.05] {
        for length in [10.0, 40.0, 100.0, 184.0] {
            let cfg = LinkConfig::new(alpha, length, k, 1e7).unwrap();
            let discrete = optimize::segs_shannon(&cfg).unwrap().se_achieved;
            worst = worst.max((discrete - shannon_se_continuous(alpha, length, 1e7)).abs());
        }
    }
    worst
}

/// Largest increase of the objective between consecutive accepted optimizer
/// steps (≤ 0 means monotone).
pub fn worst_objective_increase(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..count {
        let k = rng.gen_range(2..=6);
        let cfg = LinkConfig::new(
            0.05,
            rng.gen_range(50.0..500.0),
            k,
            10f64.powf(rng.gen_range(3.0..9.0)),
        )
        .unwrap();
        for model in [EnergyModel::Exact, EnergyModel::Relaxed] {
            let p = EgsProblem::new(
                cfg,
                optimize::shannon_optimal_se(&cfg),
                model,
                ReceiverKind::Holevo,
            )
            .unwrap();
            let (_, trace) = p.solve_traced().unwrap();
            for w in trace.windows(2) {
                worst = worst.max(w[1] - w[0]);
            }
        }
    }
    worst
}
