mod common;

use fiberlink::optimize::{self, EgsProblem, EnergyModel, SolveStatus};
use fiberlink::{LinkConfig, ReceiverKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_configs(count: usize, seed: u64) -> Vec<LinkConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|j| {
            let k = 2 + j % 2;
            let length = rng.gen_range(50.0..500.0);
            let n = 10f64.powf(rng.gen_range(3.0..9.0));
            LinkConfig::new(0.05, length, k, n).unwrap()
        })
        .collect()
}

#[test]
fn egs_matches_grid_oracle() {
    for cfg in random_configs(20, 7) {
        let k = cfg.segments;
        let eta = common::eta(cfg.alpha, cfg.length, k);
        let n = cfg.photons;
        let target = common::shannon_target(eta, n, k);
        let grid = common::grid_minimum(
            eta,
            n,
            k,
            2000,
            target,
            common::holevo,
            common::exact_energy,
        )
        .expect("full amplification is always feasible");
        let r = optimize::solve_holevo_egs(&cfg).unwrap();
        assert!(r.se_achieved >= target * (1.0 - 1e-9));
        let baseline = (k as f64 - 1.0) * (1.0 - eta) * n;
        println!(
            "L={:.1} K={k} n={n:.3e}: solver {:.6e} grid {:.6e} (savings {:.2}%)",
            cfg.length,
            r.energy_exact,
            grid.0,
            100.0 * (1.0 - r.energy_exact / baseline)
        );
        assert!(
            r.energy_exact <= grid.0 * 1.005 + 1e-9 * baseline,
            "solver {} vs grid {} for {:?}",
            r.energy_exact,
            grid.0,
            cfg
        );
    }
}

#[test]
fn regs_matches_grid_oracle_and_non_increasing_restriction() {
    for cfg in random_configs(20, 11) {
        let k = cfg.segments;
        let eta = common::eta(cfg.alpha, cfg.length, k);
        let n = cfg.photons;
        let target = common::shannon_target(eta, n, k);
        let grid = common::grid_minimum(
            eta,
            n,
            k,
            2000,
            target,
            common::holevo,
            common::relaxed_energy,
        )
        .unwrap();
        let monotone = common::grid_minimum(eta, n, k, 2000, target, common::holevo, |e, n, gs| {
            if gs.windows(2).all(|w| w[0] >= w[1]) {
                common::relaxed_energy(e, n, gs)
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let r = optimize::solve_regs(&cfg).unwrap();
        let baseline = (k as f64 - 1.0) * (1.0 - eta) * n;
        assert!(r.energy <= grid.0 * 1.005 + 1e-9 * baseline, "{cfg:?}");
        // The relaxed optimum over all profiles is reached by a non-increasing one.
        assert!(monotone.0 <= grid.0 * 1.005 + 1e-9 * baseline, "{cfg:?}");
    }
}

#[test]
fn homodyne_egs_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 6 {
        let length = rng.gen_range(50.0..400.0);
        let n = 10f64.powf(rng.gen_range(0.0..4.0));
        let cfg = LinkConfig::new(0.05, length, 3, n).unwrap();
        let eta = common::eta(0.05, length, 3);
        let target = common::shannon_target(eta, n, 3);
        let r = optimize::solve_homodyne_egs(&cfg).unwrap();
        if r.status == SolveStatus::Infeasible {
            continue;
        }
        let grid = common::grid_minimum(
            eta,
            n,
            3,
            1000,
            target,
            common::homodyne,
            common::exact_energy,
        )
        .unwrap();
        let baseline = 2.0 * (1.0 - eta) * n;
        assert!(
            r.energy_exact <= grid.0 + 1e-3 * baseline,
            "solver {} grid {} for {cfg:?}",
            r.energy_exact,
            grid.0
        );
        checked += 1;
    }
}

#[test]
fn homodyne_infeasible_when_full_gain_rate_is_too_low() {
    // The record link: homodyne stays under 8 bits at full gain while the
    // heterodyne baseline is 14.1.
    let cfg = LinkConfig::new(0.05, 225.0, 2, 1e7).unwrap();
    let eta = cfg.eta();
    let target = common::shannon_target(eta, 1e7, 2);
    let full_hom = common::homodyne(eta, 1e7, &[common::g_max(eta, 1e7), 1.0]);
    assert!(full_hom < 8.0 && target > 14.0, "{full_hom} vs {target}");
    let r = optimize::solve_homodyne_egs(&cfg).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert!(!r.converged);
    assert_eq!(r.savings_fraction, 0.0);
}

#[test]
fn segs_holevo_matches_grid() {
    let cfg = LinkConfig::new(0.05, 150.0, 3, 1e7).unwrap();
    let eta = cfg.eta();
    let (best, _) = common::grid_maximum(eta, 1e7, 3, 400, common::holevo);
    let r = optimize::segs_holevo(&cfg).unwrap();
    assert!(
        (r.se_achieved - best).abs() < 1e-3,
        "{} vs {best}",
        r.se_achieved
    );
    assert!(r.se_achieved >= best - 1e-9);
}

#[test]
fn record_config_single_gain_bisection() {
    let cfg = LinkConfig::new(0.05, 225.0, 2, 1e7).unwrap();
    let eta = cfg.eta();
    let target = common::shannon_target(eta, 1e7, 2);
    let g1 = common::bisect_single_gain(eta, 1e7, target);
    assert!((g1 - 125.0).abs() < 0.5, "{g1}");
    let ratio = common::exact_energy(eta, 1e7, &[g1, 1.0]) / ((1.0 - eta) * 1e7);
    assert!((ratio - 0.449).abs() < 1e-3, "{ratio}");

    let r = optimize::solve_holevo_egs(&cfg).unwrap();
    assert!((r.gains.gain(1) - g1).abs() / g1 < 1e-6);
}

#[test]
fn outer_rounds_never_increase_energy() {
    for cfg in random_configs(10, 5) {
        let problem = EgsProblem::new(
            cfg,
            optimize::shannon_optimal_se(&cfg),
            EnergyModel::Exact,
            ReceiverKind::Holevo,
        )
        .unwrap();
        let (_, trace) = problem.solve_traced().unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0], "{:?}", cfg);
        }
    }
}
