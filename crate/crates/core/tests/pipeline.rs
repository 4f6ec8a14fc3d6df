mod common;

use fdris_core::bcd::{solve, solve_from, initialize, PhaseAlgorithm, SolverConfig, SolverReport, Termination};
use fdris_core::geometry::{generate_realization, ScenarioConfig};
use fdris_core::harness::{run_scheme, run_sweep, Scheme, SchemeOptions, SweepParam, SweepSpec};
use fdris_core::network::sum_rate;

fn small() -> ScenarioConfig {
    ScenarioConfig {
        ris_elements: 16,
        ..Default::default()
    }
}

fn solver(alg: PhaseAlgorithm, cfg: &ScenarioConfig) -> SolverConfig {
    SolverConfig {
        phase_algorithm: alg,
        budget: cfg.power_budget(),
        ..Default::default()
    }
}

fn assert_monotone(r: &SolverReport) {
    for w in r.trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-8 * w[0].abs(), "trace decreased: {} -> {}", w[0], w[1]);
    }
}

#[test]
fn reported_rates_match_final_state() {
    let cfg = small();
    let ch = generate_realization(&cfg, 3).unwrap();
    for alg in [PhaseAlgorithm::Ccm, PhaseAlgorithm::Sca] {
        let r = solve(&ch, &solver(alg, &cfg), 3).unwrap();
        assert_ne!(r.termination, Termination::Failed);
        assert_monotone(&r);
        let again = sum_rate(&ch, &r.precoders, &r.phase).unwrap();
        assert!((again.sum_rate - r.rates.sum_rate).abs() <= 1e-9 * r.rates.sum_rate);
        assert!((r.trace.last().unwrap() - r.rates.sum_rate).abs() <= 1e-9 * r.rates.sum_rate);
        let oracle: f64 = common::links(&ch.dims)
            .into_iter()
            .map(|l| common::oracle_rate(&ch, &r.precoders, &r.phase, l))
            .sum();
        assert!((oracle - r.rates.sum_rate).abs() <= 1e-6 * oracle);
    }
}

#[test]
fn optimized_phases_beat_their_start() {
    let cfg = small();
    let ch = generate_realization(&cfg, 11).unwrap();
    let sc = solver(PhaseAlgorithm::Sca, &cfg);
    let (f0, p0) = initialize(&ch, &sc, 11);
    let start = sum_rate(&ch, &f0, &p0).unwrap().sum_rate;
    let r = solve_from(&ch, &sc, f0, p0).unwrap();
    assert!(r.rates.sum_rate > start);
}

#[test]
fn optimized_ris_beats_random_ris_on_average() {
    let cfg = small();
    let base = solver(PhaseAlgorithm::Sca, &cfg);
    let opts = SchemeOptions::default();
    let (mut opt, mut rnd) = (0.0, 0.0);
    for seed in 0..4 {
        let ch = generate_realization(&cfg, seed).unwrap();
        opt += run_scheme(Scheme::FdOptSca, &ch, &base, &opts, seed).unwrap().rates.sum_rate;
        rnd += run_scheme(Scheme::FdRandomRis, &ch, &base, &opts, seed).unwrap().rates.sum_rate;
    }
    assert!(opt > rnd, "opt {opt} random {rnd}");
}

#[test]
fn half_duplex_reports_two_slots() {
    let cfg = small();
    let ch = generate_realization(&cfg, 5).unwrap();
    let r = run_scheme(Scheme::HdOptRis, &ch, &solver(PhaseAlgorithm::Sca, &cfg), &SchemeOptions::default(), 5).unwrap();
    assert_eq!(r.slots.len(), 2);
    let ul = &r.slots[0].rates;
    let dl = &r.slots[1].rates;
    assert!((r.rates.ul_total - 0.5 * ul.ul_total).abs() <= 1e-12);
    assert!((r.rates.dl_total - 0.5 * dl.dl_total).abs() <= 1e-12);
}

#[test]
fn sweep_rows_are_complete_and_ordered() {
    let cfg = ScenarioConfig {
        ris_elements: 4,
        ..Default::default()
    };
    let spec = SweepSpec {
        param: SweepParam::RisElements,
        values: vec![2.0, 4.0],
        realizations: 2,
        solver: solver(PhaseAlgorithm::Sca, &cfg),
        base: cfg,
        base_seed: 40,
        schemes: vec![Scheme::FdNoRis, Scheme::FdOptCcm],
        options: SchemeOptions::default(),
        jobs: 1,
        record_timings: false,
    };
    let t = run_sweep(&spec).unwrap();
    assert_eq!(t.rows.len(), 8);
    assert!(t.rows.iter().all(|r| r.error.is_none() && r.sum_rate_bps_hz.is_finite()));
    let csv = t.to_csv_string().unwrap();
    assert_eq!(csv.lines().count(), 9);
    let summary = t.summary();
    assert_eq!(summary.len(), 4);
    assert!(summary.iter().all(|s| s.sum_rate.n == 2));
}
