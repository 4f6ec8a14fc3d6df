//! Self-checks run by `fdris validate`: small instances on which every
//! invariant of the model and solvers can be verified directly.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bcd::{random_phase, random_precoders, solve, PhaseAlgorithm, SolverConfig};
use crate::error::Result;
use crate::geometry::{generate_realization, path_loss_db, reflected_path_loss_db, Layout, ScenarioConfig};
use crate::linalg::complex_gaussian;
use crate::network::{NetworkState, PhaseState};
use crate::phase::{
    build_quadratic_form, ccm_minimize, retract, riemannian_project, sca_minimize, unit_vector, InnerConfig,
    QuadraticForm,
};
use crate::wmmse::{surrogate_sum_rate, update_auxiliaries, weighted_mse_sum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// The small network used by the checks: two cells, one user per direction
/// and cell, three reflecting elements.
pub fn small_scenario() -> ScenarioConfig {
    ScenarioConfig {
        users_per_cell_dl: 1,
        users_per_cell_ul: 1,
        bs_tx_antennas: 2,
        bs_rx_antennas: 2,
        ue_tx_antennas: 2,
        ue_rx_antennas: 2,
        streams_dl: 1,
        streams_ul: 1,
        ris_elements: 3,
        ..Default::default()
    }
}

struct Instance {
    channels: crate::geometry::ChannelSet,
    precoders: crate::network::PrecoderSet,
    phase: PhaseState,
}

fn instance(cfg: &ScenarioConfig, seed: u64) -> Result<Instance> {
    let channels = generate_realization(cfg, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let precoders = random_precoders(&channels.dims, &cfg.power_budget(), &mut rng);
    let phase = random_phase(cfg.ris_elements, &mut rng);
    Ok(Instance {
        channels,
        precoders,
        phase,
    })
}

fn quadratic_of(inst: &Instance) -> Result<QuadraticForm> {
    let state = NetworkState::new(&inst.channels, &inst.phase)?;
    let aux = update_auxiliaries(&state, &inst.precoders)?;
    build_quadratic_form(&state, &inst.precoders, &aux)
}

fn grid_minimum(qf: &QuadraticForm, points: usize) -> f64 {
    let step = TAU / points as f64;
    let mut best = f64::INFINITY;
    for a in 0..points {
        for b in 0..points {
            for c in 0..points {
                let t = [a as f64 * step, b as f64 * step, c as f64 * step];
                best = best.min(qf.value_theta(&t));
            }
        }
    }
    best
}

pub fn run_all() -> Vec<CheckResult> {
    let checks: [fn() -> Result<CheckResult>; 8] = [
        check_path_loss,
        check_surrogate,
        check_quadratic_form,
        check_gradients,
        check_manifold,
        check_grid_optimum,
        check_bcd,
        check_half_duplex_sic,
    ];
    checks
        .iter()
        .enumerate()
        .map(|(i, f)| f().unwrap_or_else(|e| check(&format!("check {i}"), false, format!("error: {e}"))))
        .collect()
}

fn check_path_loss() -> Result<CheckResult> {
    let bs = [0.0, 0.0, 30.0];
    let ris = [350.0, 0.0, 15.0];
    let user = [300.0, 50.0, 1.5];
    let d = Layout::link_distance;
    let got = [
        path_loss_db(d(bs, user), 3.75, -30.0)?,
        reflected_path_loss_db(d(bs, ris), d(ris, user), 2.2, -30.0)?,
        reflected_path_loss_db(d(bs, ris), d(ris, user), 2.8, -30.0)?,
    ];
    let want = [-123.19, -156.84, -183.25];
    let err = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    Ok(check("path-loss anchors", err <= 0.01, format!("max error {err:.4} dB")))
}

fn check_surrogate() -> Result<CheckResult> {
    let cfg = small_scenario();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let inst = instance(&cfg, seed)?;
        let state = NetworkState::new(&inst.channels, &inst.phase)?;
        let aux = update_auxiliaries(&state, &inst.precoders)?;
        let rate = state.sum_rate(&inst.precoders)?.sum_rate;
        let sur = surrogate_sum_rate(&state, &inst.precoders, &aux)?;
        worst = worst.max((rate - sur).abs() / rate.abs().max(1e-300));
    }
    Ok(check("surrogate equals rate", worst <= 1e-8, format!("max relative gap {worst:.2e}")))
}

fn check_quadratic_form() -> Result<CheckResult> {
    let cfg = small_scenario();
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..20 {
        let inst = instance(&cfg, seed)?;
        let state = NetworkState::new(&inst.channels, &inst.phase)?;
        let aux = update_auxiliaries(&state, &inst.precoders)?;
        let qf = build_quadratic_form(&state, &inst.precoders, &aux)?;
        let p1 = random_phase(cfg.ris_elements, &mut rng);
        let p2 = random_phase(cfg.ris_elements, &mut rng);
        let o1 = weighted_mse_sum(&NetworkState::new(&inst.channels, &p1)?, &inst.precoders, &aux)?;
        let o2 = weighted_mse_sum(&NetworkState::new(&inst.channels, &p2)?, &inst.precoders, &aux)?;
        let df = qf.value(p1.phi()) - qf.value(p2.phi());
        let scale = o1.abs().max(o2.abs());
        worst = worst.max(((o1 - o2) - df).abs() / scale);
    }
    Ok(check("quadratic form matches weighted MSE", worst <= 1e-8, format!("max relative error {worst:.2e}")))
}

fn check_gradients() -> Result<CheckResult> {
    let cfg = small_scenario();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let inst = instance(&cfg, seed)?;
        let qf = quadratic_of(&inst)?;
        let theta = inst.phase.theta().to_vec();
        let phi = unit_vector(&theta);
        let g = qf.euclidean_gradient(&phi);
        let gt = qf.gradient_theta(&theta);
        let scale = g.norm().max(1e-300);
        let fphi = |v: &crate::linalg::CVec| {
            qf.c.dotc(v).re + v.dotc(&qf.c).re + v.dotc(&(&qf.xi * v)).re
        };
        for m in 0..phi.len() {
            for (k, dir) in [num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::new(0.0, 1.0)]
                .into_iter()
                .enumerate()
            {
                let mut a = phi.clone();
                let mut b = phi.clone();
                a[m] += dir * h;
                b[m] -= dir * h;
                let fd = (fphi(&a) - fphi(&b)) / (2.0 * h);
                let an = if k == 0 { g[m].re } else { g[m].im };
                worst = worst.max((fd - an).abs() / scale);
            }
            let mut a = theta.clone();
            let mut b = theta.clone();
            a[m] += h;
            b[m] -= h;
            let fd = (qf.value_theta(&a) - qf.value_theta(&b)) / (2.0 * h);
            let tscale = gt.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            worst = worst.max((fd - gt[m]).abs() / tscale);
        }
    }
    Ok(check("gradients match finite differences", worst <= 1e-5, format!("max relative error {worst:.2e}")))
}

fn check_manifold() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let phi = random_phase(8, &mut rng).phi().clone();
        let eta = complex_gaussian(&mut rng, 8, 1).column(0).into_owned();
        let p = riemannian_project(&eta, &phi);
        for (z, f) in p.iter().zip(phi.iter()) {
            worst = worst.max((z * f.conj()).re.abs());
        }
        worst = worst.max((riemannian_project(&p, &phi) - &p).norm());
        let r = retract(&eta)?;
        for (a, b) in r.iter().zip(eta.iter()) {
            worst = worst.max((a.norm() - 1.0).abs());
            let d = (a.arg() - b.arg()).abs();
            worst = worst.max(d.min(TAU - d));
        }
    }
    Ok(check("tangent projection and retraction", worst <= 1e-12, format!("max residual {worst:.2e}")))
}

fn check_grid_optimum() -> Result<CheckResult> {
    let cfg = small_scenario();
    let inner = InnerConfig::default();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..3 {
        let inst = instance(&cfg, seed)?;
        let qf = quadratic_of(&inst)?;
        let grid = grid_minimum(&qf, 64);
        let start: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * TAU).collect();
        let a = ccm_minimize(&qf, &start, &inner)?.f;
        let b = sca_minimize(&qf, &start, &inner)?.f;
        let scale = grid.abs().max(1.0);
        worst = worst.max((a - grid) / scale).max((b - grid) / scale);
    }
    Ok(check(
        "phase optimizers reach the grid optimum (M = 3)",
        worst <= 1e-3,
        format!("worst excess over grid minimum {worst:.2e} (relative)"),
    ))
}

fn check_bcd() -> Result<CheckResult> {
    let cfg = small_scenario();
    let mut detail = Vec::new();
    let mut ok = true;
    for alg in [PhaseAlgorithm::Ccm, PhaseAlgorithm::Sca] {
        for seed in 0..3 {
            let ch = generate_realization(&cfg, seed)?;
            let sc = SolverConfig {
                phase_algorithm: alg,
                budget: cfg.power_budget(),
                ..Default::default()
            };
            let r = solve(&ch, &sc, seed)?;
            let monotone = r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-8 * w[0].abs());
            let feasible = r.kkt.max_power_violation <= 1e-6 && r.kkt.max_slackness <= 1e-6;
            ok &= monotone && feasible;
            if !(monotone && feasible) {
                detail.push(format!("{alg:?} seed {seed}: monotone {monotone} feasible {feasible}"));
            }
        }
    }
    let detail = if detail.is_empty() {
        "6 solves monotone and feasible".to_string()
    } else {
        detail.join("; ")
    };
    Ok(check("BCD monotone and feasible", ok, detail))
}

fn check_half_duplex_sic() -> Result<CheckResult> {
    use crate::harness::{run_scheme, Scheme, SchemeOptions};
    let base = small_scenario();
    let mut rates = Vec::new();
    for sic in [30.0, 90.0] {
        let cfg = ScenarioConfig { sic_db: sic, ..base.clone() };
        let ch = generate_realization(&cfg, 1)?;
        let sc = SolverConfig {
            budget: cfg.power_budget(),
            ..Default::default()
        };
        rates.push(run_scheme(Scheme::HdNoRis, &ch, &sc, &SchemeOptions::default(), 1)?.rates.sum_rate);
    }
    Ok(check(
        "half-duplex rates ignore SIC",
        rates[0] == rates[1],
        format!("{:.6} vs {:.6}", rates[0], rates[1]),
    ))
}
