//! Gain selection: rate-optimal (SEGS) and energy-optimal (EGS / REGS)
//! amplifier profiles.
//!
//! The energy solver alternates two stages, both starting from the fully
//! amplified profile:
//!
//! 1. [`EgsProblem::energy_gradient_stage`] walks down `∇E` with a step that
//!    halves every time a trial point leaves the feasible set.
//! 2. [`EgsProblem::spectral_surface_stage`] walks along the projection of
//!    `∇E` onto the level surface of the rate constraint, with the same
//!    accept-or-halve rule.
//!
//! Only `G_1..G_{K-1}` are free; `G_K = 1` throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{propagate_gains, GainProfile, LinkConfig};
use crate::se::ReceiverKind;

/// Bisection levels per stage.
pub const STAGE_BUDGET: u32 = 30;
/// Alternations of the two stages.
pub const OUTER_ROUNDS: usize = 10;
/// Relative objective change over a round below which the solve is converged.
pub const ROUND_TOLERANCE: f64 = 1e-9;
/// Relative slack on the rate constraint, so the target itself is attainable.
pub const SE_SLACK: f64 = 1e-12;
/// Guard against pathological stages that keep accepting steps.
const MAX_ACCEPTED_PER_STAGE: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyModel {
    /// Each amplifier pays for the photons it adds to its actual input.
    Exact,
    /// Each amplifier pays as if its input sat at the power cap.
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    /// Budget exhausted; the best feasible iterate is returned.
    NotConverged,
    /// The receiver cannot reach the target even at full amplification.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub gains: GainProfile,
    pub se_achieved: f64,
    pub se_target: f64,
    /// Energy under the model that was optimized.
    pub energy: f64,
    /// Energy of the returned profile under [`EnergyModel::Exact`].
    pub energy_exact: f64,
    /// Energy of the fully amplified link, `(K−1)(1−η)n`.
    pub baseline_energy: f64,
    pub savings_fraction: f64,
    pub converged: bool,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Lower bound on amplifier energy:
/// `Σ (G_i − 1)·(η·(τ_{i−1}n + ν_{i−1}) + 1)`.
pub fn energy(config: &LinkConfig, profile: &GainProfile) -> f64 {
    energy_of(config.eta(), config.photons, profile.gains())
}

fn energy_of(eta: f64, n: f64, gains: &[f64]) -> f64 {
    let mut x = n;
    let mut total = 0.0;
    for &g in gains {
        total += (g - 1.0) * (eta * x + 1.0);
        x = g * eta * x + g - 1.0;
    }
    total
}

/// Energy with every amplifier input priced at the cap: `Σ (G_i − 1)(ηn + 1)`.
pub fn energy_relaxed(config: &LinkConfig, profile: &GainProfile) -> f64 {
    let per_gain = config.eta() * config.photons + 1.0;
    profile.gains().iter().map(|g| (g - 1.0) * per_gain).sum()
}

pub fn energy_for(model: EnergyModel, config: &LinkConfig, profile: &GainProfile) -> f64 {
    match model {
        EnergyModel::Exact => energy(config, profile),
        EnergyModel::Relaxed => energy_relaxed(config, profile),
    }
}

/// Energy of the fully amplified link with a single-symbol receiver.
pub fn baseline_energy(config: &LinkConfig) -> f64 {
    let one_minus_eta = -(-config.alpha * config.length / config.segments as f64).exp_m1();
    (config.segments as f64 - 1.0) * one_minus_eta * config.photons
}

/// `∂E/∂G_i` for `i = 1..K`. The last component is zero because `G_K` is
/// pinned to 1.
pub fn energy_gradient(config: &LinkConfig, profile: &GainProfile, model: EnergyModel) -> Vec<f64> {
    energy_gradient_of(config.eta(), config.photons, profile.gains(), model)
}

fn energy_gradient_of(eta: f64, n: f64, gains: &[f64], model: EnergyModel) -> Vec<f64> {
    let k = gains.len();
    let mut grad = vec![0.0; k];
    if k < 2 {
        return grad;
    }
    match model {
        EnergyModel::Relaxed => {
            grad[..k - 1].fill(eta * n + 1.0);
        }
        EnergyModel::Exact => {
            // Input energy x_{i-1} of every amplifier.
            let mut inputs = Vec::with_capacity(k);
            let mut x = n;
            for &g in gains {
                inputs.push(x);
                x = g * eta * x + g - 1.0;
            }
            // A perturbation of G_i changes amplifier i's output by
            // c_i = η·x_{i−1} + 1 (the D(G) column acting on (x, 1)); downstream
            // it is scaled by η·G_j per segment and priced at (G_k − 1)·η.
            // tail_i = 1 + Σ_{k>i} (G_k − 1)·η·Π_{j=i+1}^{k−1} η·G_j
            let mut tail = 1.0;
            for i in (0..k).rev() {
                if i + 1 < k {
                    let g_next = gains[i + 1];
                    tail = 1.0 + eta * (g_next - 1.0) + eta * g_next * (tail - 1.0);
                }
                grad[i] = (eta * inputs[i] + 1.0) * tail;
            }
            grad[k - 1] = 0.0;
        }
    }
    grad
}

/// `log2(1 + τ_max·n / (1 + (η − τ_max)·n))` with `τ_max = η^K·G_max^{K−1}`.
pub fn shannon_optimal_se(config: &LinkConfig) -> f64 {
    // Log-domain with expm1/ln_1p: for large K both η and τ_max sit next to 1.
    let n = config.photons;
    let k = config.segments as f64;
    let ln_eta = -config.alpha * config.length / k;
    let eta = ln_eta.exp();
    let ln_g = (n * -ln_eta.exp_m1() / (1.0 + eta * n)).ln_1p();
    let ln_tau = k * ln_eta + (k - 1.0) * ln_g;
    let tau_max = ln_tau.exp();
    let eta_minus_tau = -eta * (ln_tau - ln_eta).exp_m1();
    (tau_max * n / (1.0 + eta_minus_tau * n)).ln_1p() / std::f64::consts::LN_2
}

/// Rate-optimal profile for a heterodyne receiver: every in-line amplifier at
/// `G_max`.
pub fn segs_shannon(config: &LinkConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let gains = GainProfile::fully_amplified(config);
    let se = shannon_optimal_se(config);
    let e = energy(config, &gains);
    Ok(OptimizationResult {
        gains,
        se_achieved: se,
        se_target: se,
        energy: e,
        energy_exact: e,
        baseline_energy: baseline_energy(config),
        savings_fraction: 0.0,
        converged: true,
        status: SolveStatus::Converged,
        iterations: 0,
    })
}

/// Rate-optimal profile for the joint-detection receiver.
///
/// Projected gradient ascent in normalized coordinates `(G − 1)/(G_max − 1)`,
/// started from the best on-off profile (first `m` gains at `G_max`, the rest
/// off). The result is sorted into non-increasing order, which never lowers
/// the rate.
pub fn segs_holevo(config: &LinkConfig) -> Result<OptimizationResult> {
    segs_for(config, ReceiverKind::Holevo)
}

/// As [`segs_holevo`] for any per-pulse receiver.
pub fn segs_for(config: &LinkConfig, receiver: ReceiverKind) -> Result<OptimizationResult> {
    config.validate()?;
    check_receiver(receiver)?;
    let k = config.segments;
    let eta = config.eta();
    let n = config.photons;
    let g_max = config.max_gain();
    let span = g_max - 1.0;
    let rate = |free: &[f64]| -> f64 {
        let gains = with_last(free);
        let c = propagate_gains(eta, &gains);
        receiver.spectral_efficiency(&c, n).unwrap_or(f64::NAN)
    };

    let free_len = k - 1;
    let mut best: Vec<f64> = (0..=free_len)
        .map(|m| {
            (0..free_len)
                .map(|j| if j < m { g_max } else { 1.0 })
                .collect::<Vec<f64>>()
        })
        .max_by(|a, b| rate(a).total_cmp(&rate(b)))
        .unwrap_or_default();
    let mut iterations = 0;
    let mut converged = true;

    if free_len > 0 && span > 0.0 {
        let mut u: Vec<f64> = best.iter().map(|g| (g - 1.0) / span).collect();
        let to_gains = |u: &[f64]| u.iter().map(|v| 1.0 + v * span).collect::<Vec<f64>>();
        let mut current = rate(&best);
        let mut step = 0.5;
        converged = false;
        while iterations < 20_000 {
            let gains = with_last(&to_gains(&u));
            let c = propagate_gains(eta, &gains);
            let mut dir: Vec<f64> = (1..=free_len)
                .map(|i| receiver.gain_gradient(&c, n, i).unwrap_or(0.0) * span)
                .collect();
            // Infinite slopes only occur on the all-off profile; keep their sign.
            if dir.iter().any(|d| !d.is_finite()) {
                dir.iter_mut().for_each(|d| {
                    *d = if d.is_finite() { 0.0 } else { d.signum() };
                });
            }
            // Drop components pushing against an active bound.
            for (d, &v) in dir.iter_mut().zip(&u) {
                if (v <= 0.0 && *d < 0.0) || (v >= 1.0 && *d > 0.0) {
                    *d = 0.0;
                }
            }
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            if norm == 0.0 {
                converged = true;
                break;
            }
            let trial: Vec<f64> = u
                .iter()
                .zip(&dir)
                .map(|(v, d)| (v + step * d / norm).clamp(0.0, 1.0))
                .collect();
            let value = rate(&to_gains(&trial));
            iterations += 1;
            if value > current {
                u = trial;
                current = value;
                step = (step * 2.0).min(0.5);
            } else {
                step *= 0.5;
                if step < 1e-13 {
                    converged = true;
                    break;
                }
            }
        }
        best = to_gains(&u);
        let mut sorted = best.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if rate(&sorted) >= rate(&best) {
            best = sorted;
        }
    }

    let gains = GainProfile::from_free(&best)?;
    let se = rate(&best);
    let e = energy(config, &gains);
    Ok(OptimizationResult {
        gains,
        se_achieved: se,
        se_target: se,
        energy: e,
        energy_exact: e,
        baseline_energy: baseline_energy(config),
        savings_fraction: savings(e, baseline_energy(config)),
        converged,
        status: if converged {
            SolveStatus::Converged
        } else {
            SolveStatus::NotConverged
        },
        iterations,
    })
}

fn with_last(free: &[f64]) -> Vec<f64> {
    let mut gains = Vec::with_capacity(free.len() + 1);
    gains.extend_from_slice(free);
    gains.push(1.0);
    gains
}

fn savings(energy: f64, baseline: f64) -> f64 {
    if baseline > 0.0 {
        (1.0 - energy / baseline).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn check_receiver(receiver: ReceiverKind) -> Result<()> {
    if let ReceiverKind::Hadamard(_) = receiver {
        return Err(Error::contract(
            "Hadamard receiver has no per-pulse rate for gain selection",
        ));
    }
    Ok(())
}

/// What happened inside one stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageReport {
    pub accepted: usize,
    pub rejected: usize,
    /// Objective value after each accepted step.
    pub objective_trace: Vec<f64>,
}

/// An energy-minimization problem under a rate constraint.
#[derive(Debug, Clone)]
pub struct EgsProblem {
    pub config: LinkConfig,
    pub model: EnergyModel,
    pub receiver: ReceiverKind,
    pub target: f64,
    eta: f64,
    g_max: f64,
}

impl EgsProblem {
    pub fn new(
        config: LinkConfig,
        target: f64,
        model: EnergyModel,
        receiver: ReceiverKind,
    ) -> Result<Self> {
        config.validate()?;
        check_receiver(receiver)?;
        if !(target >= 0.0) || !target.is_finite() {
            return Err(Error::contract(format!(
                "target rate must be finite and >= 0, got {target}"
            )));
        }
        Ok(Self {
            eta: config.eta(),
            g_max: config.max_gain(),
            config,
            model,
            receiver,
            target,
        })
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn objective(&self, free: &[f64]) -> f64 {
        let gains = with_last(free);
        match self.model {
            EnergyModel::Exact => energy_of(self.eta, self.config.photons, &gains),
            EnergyModel::Relaxed => {
                let per_gain = self.eta * self.config.photons + 1.0;
                free.iter().map(|g| (g - 1.0) * per_gain).sum()
            }
        }
    }

    pub fn rate(&self, free: &[f64]) -> f64 {
        let c = propagate_gains(self.eta, &with_last(free));
        self.receiver
            .spectral_efficiency(&c, self.config.photons)
            .unwrap_or(f64::NAN)
    }

    pub fn meets_target(&self, free: &[f64]) -> bool {
        self.rate(free) >= self.target * (1.0 - SE_SLACK)
    }

    fn in_box(&self, free: &[f64]) -> bool {
        free.iter().all(|&g| (1.0..=self.g_max).contains(&g))
    }

    pub fn is_feasible(&self, free: &[f64]) -> bool {
        self.in_box(free) && self.meets_target(free)
    }

    fn objective_gradient(&self, free: &[f64]) -> Vec<f64> {
        let gains = with_last(free);
        let mut grad = energy_gradient_of(self.eta, self.config.photons, &gains, self.model);
        grad.truncate(free.len());
        grad
    }

    fn rate_gradient(&self, free: &[f64]) -> Vec<f64> {
        let c = propagate_gains(self.eta, &with_last(free));
        (1..=free.len())
            .map(|i| {
                self.receiver
                    .gain_gradient(&c, self.config.photons, i)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    fn step_size(&self, level: u32) -> f64 {
        (self.g_max - 1.0) * 0.5f64.powi(level as i32)
    }

    fn clamp_to_box(&self, point: &mut [f64]) {
        for g in point.iter_mut() {
            *g = g.clamp(1.0, self.g_max);
        }
    }

    /// Zeroes the components of a descent direction `-d` that would push a
    /// gain sitting on a bound out of the box.
    fn mask_active(&self, free: &[f64], d: &mut [f64]) {
        let tol = 1e-12 * (self.g_max - 1.0);
        for (x, &g) in d.iter_mut().zip(free) {
            if (g <= 1.0 + tol && *x > 0.0) || (g >= self.g_max - tol && *x < 0.0) {
                *x = 0.0;
            }
        }
    }

    /// Follows `−∇E/‖∇E‖` with step `(G_max − 1)·2^{−s}`, halving on every
    /// rejected trial until level `budget`.
    ///
    /// Gradient components blocked by an active bound are dropped and trial
    /// points are clamped to the box. A trial is accepted when it meets the
    /// rate target and lowers the objective.
    pub fn energy_gradient_stage(&self, free: &mut Vec<f64>, budget: u32) -> StageReport {
        let mut report = StageReport::default();
        let mut level = 1;
        let mut step = self.step_size(level);
        let mut current = self.objective(free);
        let direction = |p: &Self, g: &[f64]| -> Option<Vec<f64>> {
            let mut grad = p.objective_gradient(g);
            p.mask_active(g, &mut grad);
            let norm = norm(&grad);
            (norm > 0.0 && norm.is_finite()).then(|| grad.iter().map(|v| v / norm).collect())
        };
        let mut dir = match direction(self, free) {
            Some(d) => d,
            None => return report,
        };
        while level < budget && report.accepted < MAX_ACCEPTED_PER_STAGE {
            let mut trial: Vec<f64> = free.iter().zip(&dir).map(|(g, x)| g - x * step).collect();
            self.clamp_to_box(&mut trial);
            let value = self.objective(&trial);
            if value < current && self.meets_target(&trial) {
                *free = trial;
                current = value;
                report.accepted += 1;
                report.objective_trace.push(current);
                dir = match direction(self, free) {
                    Some(d) => d,
                    None => break,
                };
            } else {
                report.rejected += 1;
                level += 1;
                step = self.step_size(level);
            }
        }
        report
    }

    /// Moves along `eG − ⟨sG, eG⟩·sG`, the component of the normalized energy
    /// gradient tangent to the rate level surface.
    ///
    /// A tangent step leaves the curved level surface on the infeasible side
    /// whenever the rate is concave along it. Such a trial point is pulled
    /// back along `sG` onto the surface and kept if it is feasible and
    /// cheaper than the current point; otherwise the step is halved.
    pub fn spectral_surface_stage(&self, free: &mut Vec<f64>, budget: u32) -> StageReport {
        let mut report = StageReport::default();
        let mut level = 1;
        let mut step = self.step_size(level);
        let mut current = self.objective(free);
        let mut dirs = match self.surface_directions(free) {
            Some(d) => d,
            None => return report,
        };
        while level < budget && report.accepted < MAX_ACCEPTED_PER_STAGE {
            let (x, sg) = &dirs;
            let mut trial: Vec<f64> = free.iter().zip(x).map(|(g, d)| g - d * step).collect();
            self.clamp_to_box(&mut trial);
            let candidate = if self.meets_target(&trial) {
                Some(trial)
            } else {
                self.restore(&trial, sg, step)
            };
            match candidate {
                Some(c) if self.objective(&c) < current => {
                    *free = c;
                    current = self.objective(free);
                    report.accepted += 1;
                    report.objective_trace.push(current);
                    dirs = match self.surface_directions(free) {
                        Some(d) => d,
                        None => break,
                    };
                }
                _ => {
                    report.rejected += 1;
                    level += 1;
                    step = self.step_size(level);
                }
            }
        }
        report
    }

    /// Tangent descent direction and unit rate gradient at `free`.
    fn surface_directions(&self, free: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut e = self.objective_gradient(free);
        let mut s = self.rate_gradient(free);
        // Coordinates pinned by a bound take no part in the surface walk.
        self.mask_active(free, &mut e);
        for (sv, ev) in s.iter_mut().zip(&e) {
            if *ev == 0.0 {
                *sv = 0.0;
            }
        }
        let (en, sn) = (norm(&e), norm(&s));
        if !(en > 0.0 && en.is_finite() && sn > 0.0 && sn.is_finite()) {
            return None;
        }
        let eg: Vec<f64> = e.iter().map(|v| v / en).collect();
        let sg: Vec<f64> = s.iter().map(|v| v / sn).collect();
        let dot: f64 = eg.iter().zip(&sg).map(|(a, b)| a * b).sum();
        let x: Vec<f64> = eg.iter().zip(&sg).map(|(a, b)| a - dot * b).collect();
        (norm(&x) > 1e-12).then_some((x, sg))
    }

    /// Smallest move `t·sG`, `t ∈ (0, step]`, that brings `point` back to the
    /// rate target, found by bisection.
    fn restore(&self, point: &[f64], sg: &[f64], step: f64) -> Option<Vec<f64>> {
        let at = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = point.iter().zip(sg).map(|(g, d)| g + d * t).collect();
            self.clamp_to_box(&mut p);
            p
        };
        if !self.meets_target(&at(step)) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, step);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.meets_target(&at(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * step {
                break;
            }
        }
        Some(at(hi))
    }

    /// Alternates the two stages from the fully amplified profile.
    pub fn solve(&self) -> Result<OptimizationResult> {
        self.solve_traced().map(|(r, _)| r)
    }

    /// As [`EgsProblem::solve`], also returning the objective after every
    /// accepted step in order.
    pub fn solve_traced(&self) -> Result<(OptimizationResult, Vec<f64>)> {
        let k = self.config.segments;
        let baseline = baseline_energy(&self.config);
        let mut trace = Vec::new();

        let all_off = vec![1.0; k - 1];
        if self.meets_target(&all_off) {
            return Ok((self.result(all_off, SolveStatus::Converged, 0), trace));
        }
        let mut free = vec![self.g_max; k - 1];
        if k == 1 || !self.meets_target(&free) {
            let mut r = self.result(free, SolveStatus::Infeasible, 0);
            r.savings_fraction = 0.0;
            return Ok((r, trace));
        }
        debug_assert!(baseline > 0.0);

        let mut iterations = 0;
        let mut status = SolveStatus::NotConverged;
        let mut previous = self.objective(&free);
        for _ in 0..OUTER_ROUNDS {
            let a = self.energy_gradient_stage(&mut free, STAGE_BUDGET);
            let b = self.spectral_surface_stage(&mut free, STAGE_BUDGET);
            iterations += a.accepted + b.accepted;
            trace.extend(a.objective_trace);
            trace.extend(b.objective_trace);
            let current = self.objective(&free);
            let change = (previous - current).abs() / previous.abs().max(f64::MIN_POSITIVE);
            previous = current;
            if change < ROUND_TOLERANCE {
                status = SolveStatus::Converged;
                break;
            }
        }
        Ok((self.result(free, status, iterations), trace))
    }

    fn result(&self, free: Vec<f64>, status: SolveStatus, iterations: usize) -> OptimizationResult {
        let se_achieved = self.rate(&free);
        let energy = self.objective(&free);
        let gains = GainProfile::from_free(&free).expect("gains stay within [1, G_max]");
        let energy_exact = energy_of(self.eta, self.config.photons, gains.gains());
        let baseline = baseline_energy(&self.config);
        OptimizationResult {
            gains,
            se_achieved,
            se_target: self.target,
            energy,
            energy_exact,
            baseline_energy: baseline,
            savings_fraction: savings(energy_exact, baseline),
            converged: status == SolveStatus::Converged,
            status,
            iterations,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimum-energy profile whose rate with `receiver` reaches `target`
/// (default: the fully amplified heterodyne rate).
pub fn solve_egs(
    config: &LinkConfig,
    target: Option<f64>,
    model: EnergyModel,
    receiver: ReceiverKind,
) -> Result<OptimizationResult> {
    config.validate()?;
    let target = target.unwrap_or_else(|| shannon_optimal_se(config));
    EgsProblem::new(*config, target, model, receiver)?.solve()
}

/// Energy-optimal gains for the joint-detection receiver against the
/// heterodyne baseline, exact energy model.
pub fn solve_holevo_egs(config: &LinkConfig) -> Result<OptimizationResult> {
    solve_egs(config, None, EnergyModel::Exact, ReceiverKind::Holevo)
}

/// Relaxed-energy counterpart of [`solve_holevo_egs`].
pub fn solve_regs(config: &LinkConfig) -> Result<OptimizationResult> {
    solve_egs(config, None, EnergyModel::Relaxed, ReceiverKind::Holevo)
}

/// EGS with the homodyne rate as the constraint functional.
pub fn solve_homodyne_egs(config: &LinkConfig) -> Result<OptimizationResult> {
    solve_egs(config, None, EnergyModel::Exact, ReceiverKind::Homodyne)
}
