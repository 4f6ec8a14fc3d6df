//! Benchmark schemes, Monte-Carlo parameter sweeps and their result tables.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcd::{solve, BlockTimings, KktSummary, PhaseAlgorithm, PhaseInit, SolverConfig, SolverReport, Termination};
use crate::error::{Error, Result};
use crate::geometry::{generate_realization, ChannelSet, ScenarioConfig};
use crate::network::{PrecoderSet, RateBreakdown};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FdOptCcm,
    FdOptSca,
    FdRandomRis,
    FdNoRis,
    HdOptRis,
    HdNoRis,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::FdOptCcm,
        Scheme::FdOptSca,
        Scheme::FdRandomRis,
        Scheme::FdNoRis,
        Scheme::HdOptRis,
        Scheme::HdNoRis,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::FdOptCcm => "fd_opt_ccm",
            Scheme::FdOptSca => "fd_opt_sca",
            Scheme::FdRandomRis => "fd_random_ris",
            Scheme::FdNoRis => "fd_no_ris",
            Scheme::HdOptRis => "hd_opt_ris",
            Scheme::HdNoRis => "hd_no_ris",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

/// How the schemes without a RIS treat the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoRisMode {
    /// Surface present with every phase fixed at zero.
    #[default]
    ZeroPhase,
    /// Reflected paths removed altogether.
    NoReflection,
}

impl std::str::FromStr for NoRisMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_phase" => Ok(Self::ZeroPhase),
            "no_reflection" => Ok(Self::NoReflection),
            other => Err(Error::InvalidConfig(format!("unknown no-RIS mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeOptions {
    pub no_ris_mode: NoRisMode,
    /// Phase optimizer of `hd_opt_ris`.
    pub hd_phase_algorithm: PhaseAlgorithm,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            no_ris_mode: NoRisMode::ZeroPhase,
            hd_phase_algorithm: PhaseAlgorithm::Sca,
        }
    }
}

fn with_phase(base: &SolverConfig, algorithm: PhaseAlgorithm, init: PhaseInit) -> SolverConfig {
    SolverConfig {
        phase_algorithm: algorithm,
        phase_init: init,
        ..base.clone()
    }
}

/// No-RIS variant of a solve: the channels and solver settings it runs with.
fn no_ris(channels: &ChannelSet, base: &SolverConfig, mode: NoRisMode) -> (ChannelSet, SolverConfig) {
    match mode {
        NoRisMode::ZeroPhase => (channels.clone(), with_phase(base, PhaseAlgorithm::None, PhaseInit::Zero)),
        NoRisMode::NoReflection => (
            channels.without_reflection(),
            with_phase(base, PhaseAlgorithm::Ccm, PhaseInit::Random),
        ),
    }
}

/// Time-division half-duplex: the UL-only and DL-only networks are optimized
/// separately and every rate is halved.
fn half_duplex(channels: &ChannelSet, config: &SolverConfig, seed: u64) -> Result<SolverReport> {
    let ul = solve(&channels.uplink_only(), config, seed)?;
    let dl = solve(&channels.downlink_only(), config, seed)?;
    let dims = channels.dims;
    let rates = RateBreakdown::from_parts(ul.rates.ul.clone(), dl.rates.dl.clone()).scaled(0.5);
    let len = ul.trace.len().max(dl.trace.len());
    let at = |t: &[f64], i: usize| t[i.min(t.len() - 1)];
    let trace = (0..len).map(|i| 0.5 * (at(&ul.trace, i) + at(&dl.trace, i))).collect();
    let termination = if ul.termination == Termination::Failed || dl.termination == Termination::Failed {
        Termination::Failed
    } else if ul.termination == Termination::MaxIterations || dl.termination == Termination::MaxIterations {
        Termination::MaxIterations
    } else {
        Termination::Converged
    };
    let mut precoders = PrecoderSet::zeros(&dims);
    precoders.ul = ul.precoders.ul.clone();
    precoders.dl = dl.precoders.dl.clone();
    let timings = BlockTimings {
        auxiliary_ms: ul.timings.auxiliary_ms + dl.timings.auxiliary_ms,
        precoder_ms: ul.timings.precoder_ms + dl.timings.precoder_ms,
        phase_ms: ul.timings.phase_ms + dl.timings.phase_ms,
        evaluation_ms: ul.timings.evaluation_ms + dl.timings.evaluation_ms,
        total_ms: ul.timings.total_ms + dl.timings.total_ms,
    };
    let kkt = KktSummary {
        max_power_violation: ul.kkt.max_power_violation.max(dl.kkt.max_power_violation),
        max_slackness: ul.kkt.max_slackness.max(dl.kkt.max_slackness),
        max_surrogate_gap: ul.kkt.max_surrogate_gap.max(dl.kkt.max_surrogate_gap),
        unconverged_bisections: ul.kkt.unconverged_bisections + dl.kkt.unconverged_bisections,
    };
    Ok(SolverReport {
        trace,
        termination,
        error: ul.error.clone().or_else(|| dl.error.clone()),
        outer_iterations: ul.outer_iterations.max(dl.outer_iterations),
        phase_iterations: ul.phase_iterations + dl.phase_iterations,
        phase_stalls: ul.phase_stalls + dl.phase_stalls,
        bisection_iterations: ul.bisection_iterations + dl.bisection_iterations,
        timings,
        kkt,
        rates,
        precoders,
        phase: ul.phase.clone(),
        slots: vec![ul, dl],
    })
}

/// Runs one benchmark scheme on one realization. `base` supplies tolerances
/// and power budgets; the phase settings are chosen by the scheme.
pub fn run_scheme(
    scheme: Scheme,
    channels: &ChannelSet,
    base: &SolverConfig,
    options: &SchemeOptions,
    seed: u64,
) -> Result<SolverReport> {
    match scheme {
        Scheme::FdOptCcm => solve(channels, &with_phase(base, PhaseAlgorithm::Ccm, PhaseInit::Random), seed),
        Scheme::FdOptSca => solve(channels, &with_phase(base, PhaseAlgorithm::Sca, PhaseInit::Random), seed),
        Scheme::FdRandomRis => solve(
            channels,
            &with_phase(base, PhaseAlgorithm::RandomFixed, PhaseInit::Random),
            seed,
        ),
        Scheme::FdNoRis => {
            let (ch, cfg) = no_ris(channels, base, options.no_ris_mode);
            solve(&ch, &cfg, seed)
        }
        Scheme::HdOptRis => half_duplex(
            channels,
            &with_phase(base, options.hd_phase_algorithm, PhaseInit::Random),
            seed,
        ),
        Scheme::HdNoRis => {
            let (ch, cfg) = no_ris(channels, base, options.no_ris_mode);
            half_duplex(&ch, &cfg, seed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    RisElements,
    SicDb,
    AlphaR,
    BsTxAntennas,
    PowerBs,
    YUser,
    XRis,
    XUser,
    DirectLinksEnabled,
}

impl SweepParam {
    pub const ALL: [SweepParam; 9] = [
        SweepParam::RisElements,
        SweepParam::SicDb,
        SweepParam::AlphaR,
        SweepParam::BsTxAntennas,
        SweepParam::PowerBs,
        SweepParam::YUser,
        SweepParam::XRis,
        SweepParam::XUser,
        SweepParam::DirectLinksEnabled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::RisElements => "ris_elements",
            SweepParam::SicDb => "sic_db",
            SweepParam::AlphaR => "alpha_r",
            SweepParam::BsTxAntennas => "bs_tx_antennas",
            SweepParam::PowerBs => "power_bs",
            SweepParam::YUser => "y_user",
            SweepParam::XRis => "x_ris",
            SweepParam::XUser => "x_user",
            SweepParam::DirectLinksEnabled => "direct_links_enabled",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::InvalidConfig(format!("{} needs a positive integer, got {v}", self.name())))
            }
        };
        let mut cfg = base.clone();
        match self {
            SweepParam::RisElements => cfg.ris_elements = count(value)?,
            SweepParam::SicDb => cfg.sic_db = value,
            SweepParam::AlphaR => cfg.alpha_r = value,
            SweepParam::BsTxAntennas => cfg.bs_tx_antennas = count(value)?,
            SweepParam::PowerBs => cfg.power_bs_watt = value,
            SweepParam::YUser => cfg.user_center_y = value,
            SweepParam::XRis => cfg.ris_position[0] = value,
            SweepParam::XUser => cfg.user_center_x = value,
            SweepParam::DirectLinksEnabled => {
                cfg.direct_links_enabled = match value {
                    v if v == 0.0 => false,
                    v if v == 1.0 => true,
                    v => return Err(Error::InvalidConfig(format!("direct_links_enabled takes 0 or 1, got {v}"))),
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown sweep parameter `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub realizations: usize,
    pub base: ScenarioConfig,
    pub base_seed: u64,
    pub schemes: Vec<Scheme>,
    pub solver: SolverConfig,
    pub options: SchemeOptions,
    /// Worker threads; 1 runs serially on the calling thread.
    pub jobs: usize,
    /// Record per-solve wall time; off keeps tables reproducible byte for byte.
    pub record_timings: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.realizations == 0 || self.schemes.is_empty() {
            return Err(Error::InvalidConfig("sweep needs values, realizations and schemes".into()));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("jobs must be at least 1".into()));
        }
        self.solver.validate()?;
        for &v in &self.values {
            self.param.apply(&self.base, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub param: SweepParam,
    pub value: f64,
    pub seed: u64,
    pub sum_rate_bps_hz: f64,
    pub ul_rate_bps_hz: f64,
    pub dl_rate_bps_hz: f64,
    pub outer_iters: usize,
    pub wall_ms: Option<f64>,
    /// Error text of a failed solve; its rates are NaN.
    #[serde(skip)]
    pub error: Option<String>,
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// Mean and standard error of one column over a group of rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanStderr {
    /// Statistics of the finite entries of `xs`.
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = xs.into_iter().filter(|x| x.is_finite()).collect();
        let n = v.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub value: f64,
    pub sum_rate: MeanStderr,
    pub ul_rate: MeanStderr,
    pub dl_rate: MeanStderr,
    pub failures: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

pub const CSV_HEADER: &str = "scheme,param,value,seed,sum_rate_bps_hz,ul_rate_bps_hz,dl_rate_bps_hz,outer_iters,wall_ms";

impl ResultTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn rows_for(&self, scheme: Scheme, value: f64) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme && r.value == value)
    }

    /// Per (scheme, value) statistics, in first-appearance order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(Scheme, f64)> = Vec::new();
        for r in &self.rows {
            if !keys.iter().any(|&(s, v)| s == r.scheme && v == r.value) {
                keys.push((r.scheme, r.value));
            }
        }
        keys.into_iter()
            .map(|(scheme, value)| {
                let rows: Vec<&ResultRow> = self.rows_for(scheme, value).collect();
                SummaryRow {
                    scheme,
                    value,
                    sum_rate: MeanStderr::of(rows.iter().map(|r| r.sum_rate_bps_hz)),
                    ul_rate: MeanStderr::of(rows.iter().map(|r| r.ul_rate_bps_hz)),
                    dl_rate: MeanStderr::of(rows.iter().map(|r| r.dl_rate_bps_hz)),
                    failures: rows.iter().filter(|r| r.error.is_some()).count(),
                }
            })
            .collect()
    }
}

fn run_cell(spec: &SweepSpec, value: f64, realization: usize) -> Vec<ResultRow> {
    let seed = spec.base_seed + realization as u64;
    let failed = |scheme: Scheme, msg: String| ResultRow {
        scheme,
        param: spec.param,
        value,
        seed,
        sum_rate_bps_hz: f64::NAN,
        ul_rate_bps_hz: f64::NAN,
        dl_rate_bps_hz: f64::NAN,
        outer_iters: 0,
        wall_ms: None,
        error: Some(msg),
        trace: Vec::new(),
    };
    let setup = spec.param.apply(&spec.base, value).and_then(|cfg| {
        let ch = generate_realization(&cfg, seed)?;
        Ok((cfg, ch))
    });
    let (cfg, channels) = match setup {
        Ok(x) => x,
        Err(e) => return spec.schemes.iter().map(|&s| failed(s, e.to_string())).collect(),
    };
    let solver = SolverConfig {
        budget: cfg.power_budget(),
        ..spec.solver.clone()
    };
    spec.schemes
        .iter()
        .map(|&scheme| {
            let start = Instant::now();
            let result = run_scheme(scheme, &channels, &solver, &spec.options, seed);
            let wall = start.elapsed().as_secs_f64() * 1e3;
            match result {
                Ok(r) if r.termination != Termination::Failed => ResultRow {
                    scheme,
                    param: spec.param,
                    value,
                    seed,
                    sum_rate_bps_hz: r.rates.sum_rate,
                    ul_rate_bps_hz: r.rates.ul_total,
                    dl_rate_bps_hz: r.rates.dl_total,
                    outer_iters: r.outer_iterations,
                    wall_ms: spec.record_timings.then_some(wall),
                    error: None,
                    trace: r.trace,
                },
                Ok(r) => failed(scheme, r.error.unwrap_or_else(|| "solver failed".into())),
                Err(e) => failed(scheme, e.to_string()),
            }
        })
        .collect()
}

/// Runs every scheme on every (value, realization) cell. Realization `i`
/// uses seed `base_seed + i` for both channels and initialization, shared by
/// all schemes. Row order is value-major, then realization, then scheme,
/// independent of `jobs`.
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultTable> {
    spec.validate()?;
    let cells: Vec<(f64, usize)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.realizations).map(move |i| (v, i)))
        .collect();
    let rows: Vec<Vec<ResultRow>> = if spec.jobs == 1 {
        cells.iter().map(|&(v, i)| run_cell(spec, v, i)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(|&(v, i)| run_cell(spec, v, i)).collect())
    };
    Ok(ResultTable {
        rows: rows.into_iter().flatten().collect(),
    })
}
