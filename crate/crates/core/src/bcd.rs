//! Block coordinate descent over decoders/weights, precoders and RIS phases.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ChannelSet, NetworkDims};
use crate::linalg::complex_gaussian;
use crate::network::{NetworkState, PhaseState, PowerBudget, PrecoderSet, RateBreakdown};
use crate::phase::{build_quadratic_form, ccm_minimize, sca_minimize, InnerConfig, InnerTermination};
use crate::wmmse::{surrogate_sum_rate, update_auxiliaries, update_precoders, BisectionConfig};

/// RNG stream of the initial precoders and phases.
pub const INIT_STREAM: u64 = 1;
/// RNG stream of the fixed random reflection pattern.
pub const RANDOM_RIS_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseAlgorithm {
    Ccm,
    Sca,
    /// Phases stay at their initial value.
    None,
    /// Phases drawn once, uniformly, from the random-RIS stream and kept.
    RandomFixed,
}

impl std::str::FromStr for PhaseAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccm" => Ok(Self::Ccm),
            "sca" => Ok(Self::Sca),
            "none" => Ok(Self::None),
            "random-fixed" => Ok(Self::RandomFixed),
            other => Err(Error::InvalidConfig(format!("unknown phase algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseInit {
    /// Uniform on `[0, 2pi)`.
    Random,
    /// All phases zero (`Phi = I`).
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub phase_algorithm: PhaseAlgorithm,
    pub phase_init: PhaseInit,
    /// Stop once the relative change of the sum rate is at most this.
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    pub inner: InnerConfig,
    pub bisection: BisectionConfig,
    pub budget: PowerBudget,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            phase_algorithm: PhaseAlgorithm::Ccm,
            phase_init: PhaseInit::Random,
            outer_tol: 1e-4,
            outer_max_iter: 300,
            inner: InnerConfig::default(),
            bisection: BisectionConfig::default(),
            budget: PowerBudget { bs: 1.0, ue: 0.2 },
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > 0.0) || self.outer_max_iter == 0 {
            return Err(Error::InvalidConfig("outer_tol must be > 0 and outer_max_iter >= 1".into()));
        }
        if !(self.inner.tol > 0.0) || self.inner.max_iter == 0 {
            return Err(Error::InvalidConfig("inner tolerance and cap must be positive".into()));
        }
        if !(self.budget.bs > 0.0 && self.budget.ue > 0.0) {
            return Err(Error::InvalidConfig("power budgets must be positive".into()));
        }
        self.inner.line_search.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    /// The sum rate is numerically zero.
    ZeroObjective,
    MaxIterations,
    /// A block failed; the report holds the last complete iterate.
    Failed,
}

/// Accumulated wall time per block, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockTimings {
    pub auxiliary_ms: f64,
    pub precoder_ms: f64,
    pub phase_ms: f64,
    pub evaluation_ms: f64,
    pub total_ms: f64,
}

/// Worst feasibility and optimality residuals seen over all iterates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KktSummary {
    /// `max (power - budget) / budget`, floored at zero.
    pub max_power_violation: f64,
    /// `max |lambda (power - budget)| / budget` at every bisection exit.
    pub max_slackness: f64,
    /// Largest `|surrogate - rate|` right after the decoder/weight update.
    pub max_surrogate_gap: f64,
    pub unconverged_bisections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// Sum rate before the first iteration, then after each one.
    pub trace: Vec<f64>,
    pub termination: Termination,
    pub error: Option<String>,
    pub outer_iterations: usize,
    /// Inner phase iterations, summed over outer iterations.
    pub phase_iterations: usize,
    pub phase_stalls: usize,
    pub bisection_iterations: usize,
    pub timings: BlockTimings,
    pub kkt: KktSummary,
    pub rates: RateBreakdown,
    pub precoders: PrecoderSet,
    pub phase: PhaseState,
    /// Half-duplex runs: the UL-only and DL-only solves, in that order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slots: Vec<SolverReport>,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Gaussian precoders scaled so every budget holds with equality.
pub fn random_precoders(dims: &NetworkDims, budget: &PowerBudget, rng: &mut impl Rng) -> PrecoderSet {
    let mut f = PrecoderSet {
        dl: (0..dims.total_dl())
            .map(|_| complex_gaussian(rng, dims.bs_tx, dims.streams_dl))
            .collect(),
        ul: (0..dims.total_ul())
            .map(|_| complex_gaussian(rng, dims.ue_tx, dims.streams_ul))
            .collect(),
    };
    for l in 0..dims.num_cells {
        let p = f.bs_power(l, dims);
        if p > 0.0 {
            let s = (budget.bs / p).sqrt();
            for g in &mut f.dl[l * dims.users_dl..(l + 1) * dims.users_dl] {
                *g = g.scale(s);
            }
        }
    }
    for g in 0..dims.total_ul() {
        let p = f.ul_power(g);
        if p > 0.0 {
            f.ul[g] = f.ul[g].scale((budget.ue / p).sqrt());
        }
    }
    f
}

pub fn random_phase(m: usize, rng: &mut impl Rng) -> PhaseState {
    PhaseState::from_angles((0..m).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect())
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Feasible random starting point; deterministic in `seed`.
pub fn initialize(channels: &ChannelSet, config: &SolverConfig, seed: u64) -> (PrecoderSet, PhaseState) {
    let dims = channels.dims;
    let mut rng = stream_rng(seed, INIT_STREAM);
    let precoders = random_precoders(&dims, &config.budget, &mut rng);
    let phase = match config.phase_algorithm {
        PhaseAlgorithm::RandomFixed => random_phase(dims.ris_elements, &mut stream_rng(seed, RANDOM_RIS_STREAM)),
        _ => match config.phase_init {
            PhaseInit::Random => random_phase(dims.ris_elements, &mut rng),
            PhaseInit::Zero => PhaseState::zeros(dims.ris_elements),
        },
    };
    (precoders, phase)
}

pub fn solve(channels: &ChannelSet, config: &SolverConfig, seed: u64) -> Result<SolverReport> {
    let (f, p) = initialize(channels, config, seed);
    solve_from(channels, config, f, p)
}

struct Iterate {
    precoders: PrecoderSet,
    phase: PhaseState,
    rates: RateBreakdown,
}

/// Runs the alternating updates from a given feasible point.
pub fn solve_from(
    channels: &ChannelSet,
    config: &SolverConfig,
    precoders: PrecoderSet,
    phase: PhaseState,
) -> Result<SolverReport> {
    config.validate()?;
    if !channels.is_consistent() {
        return Err(Error::InvalidConfig("inconsistent channel set".into()));
    }
    let dims = channels.dims;
    precoders.check_dims(&dims)?;
    let start = Instant::now();
    let mut timings = BlockTimings::default();
    let mut kkt = KktSummary {
        max_power_violation: precoders.max_power_violation(&dims, config.budget.bs, config.budget.ue),
        ..Default::default()
    };

    let t0 = Instant::now();
    let rates = NetworkState::new(channels, &phase)?.sum_rate(&precoders)?;
    timings.evaluation_ms += ms_since(t0);
    let mut trace = vec![rates.sum_rate];
    let mut cur = Iterate {
        precoders,
        phase,
        rates,
    };
    let report = |cur: Iterate, trace: Vec<f64>, termination, error, counters: (usize, usize, usize, usize), mut timings: BlockTimings, kkt| {
        timings.total_ms = ms_since(start);
        SolverReport {
            trace,
            termination,
            error,
            outer_iterations: counters.0,
            phase_iterations: counters.1,
            phase_stalls: counters.2,
            bisection_iterations: counters.3,
            timings,
            kkt,
            rates: cur.rates,
            precoders: cur.precoders,
            phase: cur.phase,
            slots: Vec::new(),
        }
    };

    let optimize_phase = matches!(config.phase_algorithm, PhaseAlgorithm::Ccm | PhaseAlgorithm::Sca);
    let mut counters = (0usize, 0usize, 0usize, 0usize);
    if cur.rates.sum_rate < 1e-12 && dims.users().next().is_none() {
        return Ok(report(cur, trace, Termination::ZeroObjective, None, counters, timings, kkt));
    }

    for t in 1..=config.outer_max_iter {
        let step = (|| -> Result<Iterate> {
            let state = NetworkState::new(channels, &cur.phase)?;

            let t0 = Instant::now();
            let aux = update_auxiliaries(&state, &cur.precoders)?;
            timings.auxiliary_ms += ms_since(t0);
            let sur = surrogate_sum_rate(&state, &cur.precoders, &aux)?;
            kkt.max_surrogate_gap = kkt.max_surrogate_gap.max((sur - cur.rates.sum_rate).abs());

            let t0 = Instant::now();
            let (precoders, stats) = update_precoders(&state, &aux, &config.budget, &config.bisection)?;
            timings.precoder_ms += ms_since(t0);
            counters.3 += stats.bisection_iters;
            kkt.unconverged_bisections += stats.unconverged;
            for (tx, lambda) in dims.tx_nodes().zip(&stats.multipliers) {
                let budget = config.budget.of(tx);
                let power = match tx {
                    crate::geometry::TxNode::Bs(l) => precoders.bs_power(l, &dims),
                    crate::geometry::TxNode::Ul(g) => precoders.ul_power(g),
                };
                kkt.max_slackness = kkt.max_slackness.max((lambda * (power - budget)).abs() / budget);
            }
            kkt.max_power_violation = kkt
                .max_power_violation
                .max(precoders.max_power_violation(&dims, config.budget.bs, config.budget.ue));

            let mut phase = cur.phase.clone();
            if optimize_phase {
                let t0 = Instant::now();
                let qf = build_quadratic_form(&state, &precoders, &aux)?;
                let res = match config.phase_algorithm {
                    PhaseAlgorithm::Ccm => ccm_minimize(&qf, phase.theta(), &config.inner)?,
                    _ => sca_minimize(&qf, phase.theta(), &config.inner)?,
                };
                counters.1 += res.iterations;
                if res.termination == InnerTermination::Stalled {
                    counters.2 += 1;
                }
                phase = PhaseState::from_angles(res.theta);
                timings.phase_ms += ms_since(t0);
            }

            let t0 = Instant::now();
            let rates = NetworkState::new(channels, &phase)?.sum_rate(&precoders)?;
            timings.evaluation_ms += ms_since(t0);
            Ok(Iterate {
                precoders,
                phase,
                rates,
            })
        })();

        let next = match step {
            Ok(n) => n,
            Err(e) => {
                return Ok(report(cur, trace, Termination::Failed, Some(e.to_string()), counters, timings, kkt));
            }
        };
        counters.0 = t;
        let prev = cur.rates.sum_rate;
        cur = next;
        let obj = cur.rates.sum_rate;
        trace.push(obj);
        if obj < 1e-12 {
            return Ok(report(cur, trace, Termination::ZeroObjective, None, counters, timings, kkt));
        }
        if ((obj - prev) / obj).abs() <= config.outer_tol {
            return Ok(report(cur, trace, Termination::Converged, None, counters, timings, kkt));
        }
    }
    Ok(report(cur, trace, Termination::MaxIterations, None, counters, timings, kkt))
}
