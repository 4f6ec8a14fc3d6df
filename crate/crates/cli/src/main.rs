use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fdris_core::bcd::{solve, PhaseAlgorithm, SolverConfig, Termination};
use fdris_core::geometry::{generate_realization, ScenarioConfig};
use fdris_core::harness::{run_scheme, run_sweep, Scheme, SchemeOptions, SweepParam, SweepSpec};
use fdris_core::validation;

/// Joint precoder and RIS phase design for multi-cell full-duplex networks.
#[derive(Parser)]
#[command(name = "fdris", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one channel realization and write its report.
    Solve(SolveArgs),
    /// Run schemes over a parameter sweep and write a CSV table.
    Sweep(SweepArgs),
    /// Run the built-in invariant checks on small instances.
    Validate,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON; the built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a setting: `key=value`, dotted for nesting. Scenario keys are
    /// top level; solver and scheme settings live under `solver.` and `options.`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Benchmark scheme to run.
    #[arg(long, default_value = "fd_opt_ccm", conflicts_with = "phase_algorithm")]
    scheme: String,
    /// Run the plain solver with this phase algorithm (ccm, sca, none, random-fixed).
    #[arg(long)]
    phase_algorithm: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Swept parameter, e.g. ris_elements or sic_db.
    #[arg(long)]
    param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    realizations: usize,
    /// Comma-separated schemes.
    #[arg(long, value_delimiter = ',', default_value = "fd_opt_ccm,fd_opt_sca,fd_random_ris,fd_no_ris,hd_opt_ris,hd_no_ris")]
    schemes: Vec<String>,
    /// Seed of the first realization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Record wall time per solve (the CSV is then not reproducible byte for byte).
    #[arg(long)]
    timings: bool,
}

enum Failure {
    Config(String),
    Solver(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Validation(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

/// Effective settings of a run, echoed into every output.
struct Settings {
    scenario: ScenarioConfig,
    solver: SolverConfig,
    options: SchemeOptions,
}

impl Settings {
    fn to_json(&self) -> Value {
        json!({
            "scenario": self.scenario,
            "solver": self.solver,
            "options": self.options,
        })
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), Failure> {
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                let slot = map
                    .get_mut(*part)
                    .ok_or_else(|| Failure::Config(format!("unknown setting `{}`", path.trim_start_matches("scenario."))))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Failure::Config(format!("`{part}` in `{path}` is not an index")))?;
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Failure::Config(format!("index {idx} out of range in `{path}`")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Failure::Config(format!("`{path}` does not name a setting"))),
        };
    }
    Err(Failure::Config("empty setting name".into()))
}

fn load_settings(common: &Common) -> Result<Settings, Failure> {
    let scenario = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ScenarioConfig::from_json(&text).map_err(config_err)?
        }
        None => ScenarioConfig::default(),
    };
    let solver = SolverConfig {
        budget: scenario.power_budget(),
        ..Default::default()
    };
    let mut doc = Settings {
        scenario,
        solver,
        options: SchemeOptions::default(),
    }
    .to_json();
    let mut budget_overridden = false;
    for item in &common.overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("override `{item}` is not key=value")))?;
        let key = key.trim();
        budget_overridden |= key.starts_with("solver.budget");
        let path = if key.starts_with("solver.") || key.starts_with("options.") {
            key.to_string()
        } else {
            format!("scenario.{key}")
        };
        set_path(&mut doc, &path, parse_value(raw.trim()))?;
    }
    let scenario: ScenarioConfig = serde_json::from_value(doc["scenario"].clone()).map_err(config_err)?;
    scenario.validate().map_err(config_err)?;
    let mut solver: SolverConfig = serde_json::from_value(doc["solver"].clone()).map_err(config_err)?;
    if !budget_overridden {
        solver.budget = scenario.power_budget();
    }
    solver.validate().map_err(config_err)?;
    let options: SchemeOptions = serde_json::from_value(doc["options"].clone()).map_err(config_err)?;
    Ok(Settings {
        scenario,
        solver,
        options,
    })
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))
}

fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    fs::write(path, text + "\n").map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn run_solve(args: &SolveArgs) -> Result<(), Failure> {
    let settings = load_settings(&args.common)?;
    prepare_out(&args.common.out)?;
    let channels = generate_realization(&settings.scenario, args.seed).map_err(config_err)?;
    let (label, result) = match &args.phase_algorithm {
        Some(name) => {
            let alg: PhaseAlgorithm = name.parse().map_err(config_err)?;
            let cfg = SolverConfig {
                phase_algorithm: alg,
                ..settings.solver.clone()
            };
            (format!("solver/{name}"), solve(&channels, &cfg, args.seed))
        }
        None => {
            let scheme: Scheme = args.scheme.parse().map_err(config_err)?;
            (
                scheme.to_string(),
                run_scheme(scheme, &channels, &settings.solver, &settings.options, args.seed),
            )
        }
    };
    let report = result.map_err(|e| Failure::Solver(e.to_string()))?;
    let path = args.common.out.join("report.json");
    write_json(
        &path,
        &json!({
            "run": label,
            "seed": args.seed,
            "config": settings.to_json(),
            "report": report,
        }),
    )?;
    let r = &report.rates;
    println!("run          {label} (seed {})", args.seed);
    println!("sum rate     {:.4} bit/s/Hz", r.sum_rate);
    println!("uplink       {:.4} bit/s/Hz", r.ul_total);
    println!("downlink     {:.4} bit/s/Hz", r.dl_total);
    println!("iterations   {} ({:?})", report.outer_iterations, report.termination);
    println!("time         {:.1} ms", report.timings.total_ms);
    println!("report       {}", path.display());
    if report.termination == Termination::Failed {
        return Err(Failure::Solver(report.error.unwrap_or_else(|| "solver failed".into())));
    }
    Ok(())
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<(), Failure> {
    let settings = load_settings(&args.common)?;
    let param: SweepParam = args.param.parse().map_err(config_err)?;
    let schemes = args
        .schemes
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(config_err)?;
    let spec = SweepSpec {
        param,
        values: args.values.clone(),
        realizations: args.realizations,
        base: settings.scenario.clone(),
        base_seed: args.seed,
        schemes,
        solver: settings.solver.clone(),
        options: settings.options,
        jobs: args.jobs,
        record_timings: args.timings,
    };
    spec.validate().map_err(config_err)?;
    prepare_out(&args.common.out)?;
    let table = run_sweep(&spec).map_err(|e| Failure::Solver(e.to_string()))?;

    let csv_path = args.common.out.join("results.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Failure::Config(format!("{}: {e}", csv_path.display())))?;
    table.write_csv(file).map_err(|e| Failure::Config(e.to_string()))?;
    let traces: Vec<Value> = table
        .rows
        .iter()
        .map(|r| json!({"scheme": r.scheme, "value": r.value, "seed": r.seed, "trace": r.trace}))
        .collect();
    let summary = table.summary();
    write_json(
        &args.common.out.join("sweep.json"),
        &json!({
            "param": param,
            "values": args.values,
            "realizations": args.realizations,
            "base_seed": args.seed,
            "config": settings.to_json(),
            "summary": summary,
            "traces": traces,
        }),
    )?;

    println!("{:<14} {:>10} {:>18} {:>18} {:>18}", "scheme", param.name(), "sum rate", "uplink", "downlink");
    for s in &summary {
        println!(
            "{:<14} {:>10} {:>10.4} ± {:<6.4} {:>10.4} ± {:<6.4} {:>10.4} ± {:<6.4}",
            s.scheme.name(),
            s.value,
            s.sum_rate.mean,
            s.sum_rate.stderr,
            s.ul_rate.mean,
            s.ul_rate.stderr,
            s.dl_rate.mean,
            s.dl_rate.stderr
        );
    }
    println!("table        {}", csv_path.display());
    let failed: Vec<String> = table
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{} value {} seed {}: {e}", r.scheme, r.value, r.seed)))
        .collect();
    if !failed.is_empty() {
        return Err(Failure::Solver(format!("{} failed cells:\n{}", failed.len(), failed.join("\n"))));
    }
    Ok(())
}

fn run_validate() -> Result<(), Failure> {
    let results = validation::run_all();
    let mut failed = 0;
    for r in &results {
        println!("{} {:<48} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(Failure::Validation(format!("{failed} of {} checks failed", results.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep_cmd(a),
        Command::Validate => run_validate(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
