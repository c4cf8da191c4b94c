//! `uavplan` command-line front-end.
//!
//! Exit codes: 0 ok, 2 I/O, 3 unservable, 4 config or usage, 5 every sweep run failed.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uavplan::io::{zones_json, DocumentError, LoadedScenario, ResultsDocument, RunConfig, ScenarioDocument};
use uavplan::planner::{plan_detailed, PlanOptions, ZoneTrace};
use uavplan::scenario::{evaluate_throughput, run_baseline, run_experiment_with, BaselineKind, Method, PlotMetric};
use uavplan::{generate_scenario, validate_deployment, ChannelParams, PlanError, ScenarioKind, SwarmConfig};

#[derive(Parser)]
#[command(name = "uavplan", version, about = "Plan UAV access point deployments for ground users with traffic demands")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated evaluation scenario as JSON.
    Generate {
        /// Scenario family: A (demand sweep), B (venue size sweep) or C (UE count sweep).
        kind: ScenarioKind,
        /// Variant index within the family.
        variant: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan a deployment for a scenario file.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Results JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// PSO seed, overriding the scenario and config files.
        #[arg(long)]
        seed: Option<u64>,
        /// Plan with a comparison method instead of the main pipeline.
        #[arg(long, value_name = "fixed-altitude|fixed-n")]
        baseline: Option<BaselineKind>,
        /// Candidate zones as JSON.
        #[arg(long)]
        dump_zones: Option<PathBuf>,
        /// Per-iteration PSO global best as CSV.
        #[arg(long)]
        pso_trace: Option<PathBuf>,
        /// Every candidate solution considered, as JSON.
        #[arg(long)]
        dump_pool: Option<PathBuf>,
        /// Per-constraint validation residuals as CSV.
        #[arg(long)]
        validation_csv: Option<PathBuf>,
    },
    /// Run every variant of a scenario family with all methods.
    Sweep {
        kind: ScenarioKind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        /// Base seed; run r uses seed + r.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the CSV tables.
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Io(String),
    Unservable(String),
    Config(String),
    AllRunsFailed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Unservable(_) => 3,
            CliError::Config(_) => 4,
            CliError::AllRunsFailed(_) => 5,
        }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn document(path: &Path, e: DocumentError) -> Self {
        match e {
            // serde_json messages already end with the line and column
            DocumentError::Parse(e) => CliError::Config(format!("{}: {e}", path.display())),
            DocumentError::Invalid(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Unservable(_) | PlanError::CapacityDeadlock(_) => CliError::Unservable(e.to_string()),
            PlanError::Config(_) => CliError::Config(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Unservable(m) | CliError::Config(m) | CliError::AllRunsFailed(m) => {
                f.write_str(m)
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

fn load_config(path: Option<&Path>) -> Result<Option<RunConfig>, CliError> {
    path.map(|p| RunConfig::parse(&read(p)?).map_err(|e| CliError::document(p, e)))
        .transpose()
}

fn cmd_generate(kind: ScenarioKind, variant: usize, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let scenario = generate_scenario(kind, variant, seed).map_err(|e| CliError::Config(e.to_string()))?;
    let doc = ScenarioDocument::from_scenario(&scenario, None, None);
    write_out(out, &doc.to_json())
}

struct PlanArgs {
    scenario: PathBuf,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    baseline: Option<BaselineKind>,
    dump_zones: Option<PathBuf>,
    pso_trace: Option<PathBuf>,
    dump_pool: Option<PathBuf>,
    validation_csv: Option<PathBuf>,
}

fn write_trace(path: &Path, traces: &[ZoneTrace]) -> Result<(), CliError> {
    let mut text = String::from("zone,iteration,gbest_fitness_bps,x_m,y_m,z_m,feasible\n");
    for (zone, t) in traces.iter().enumerate() {
        for r in &t.rows {
            text.push_str(&format!(
                "{zone},{},{},{},{},{},{}\n",
                r.iteration, r.gbest_fitness, r.x, r.y, r.z, r.feasible
            ));
        }
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn cmd_plan(mut args: PlanArgs) -> Result<(), CliError> {
    let doc = ScenarioDocument::parse(&read(&args.scenario)?).map_err(|e| CliError::document(&args.scenario, e))?;
    let mut loaded: LoadedScenario = doc.load().map_err(|e| CliError::document(&args.scenario, e))?;
    if let Some(cfg) = load_config(args.config.as_deref())? {
        let path = args.config.as_deref().expect("config path present");
        cfg.apply(&mut loaded).map_err(|e| CliError::document(path, e))?;
        if let Some(o) = &cfg.output {
            let from_config = |flag: &mut Option<PathBuf>, v: &Option<String>| {
                if flag.is_none() {
                    *flag = v.as_ref().map(PathBuf::from);
                }
            };
            from_config(&mut args.dump_zones, &o.dump_zones);
            from_config(&mut args.pso_trace, &o.pso_trace);
            from_config(&mut args.dump_pool, &o.dump_pool);
            from_config(&mut args.validation_csv, &o.validation_csv);
        }
    }
    if let Some(seed) = args.seed {
        loaded.swarm.seed = seed;
    }
    let LoadedScenario { scenario, params, swarm } = loaded;

    let (method, deployment, validation) = match args.baseline {
        Some(kind) => {
            if args.dump_zones.is_some() || args.pso_trace.is_some() || args.dump_pool.is_some() {
                return Err(CliError::Config(
                    "--dump-zones, --pso-trace and --dump-pool are not available with --baseline".into(),
                ));
            }
            let d = run_baseline(kind, &scenario, &params, &swarm)?;
            let v = validate_deployment(&d, &scenario, &params);
            let name = match kind {
                BaselineKind::FixedAltitude => Method::FixedAltitude.name(),
                BaselineKind::FixedGroupSize => Method::FixedGroupSize.name(),
            };
            (name, d, v)
        }
        None => {
            let outcome = plan_detailed(&scenario, &params, &swarm, &PlanOptions::default())?;
            if let Some(p) = &args.dump_zones {
                fs::write(p, zones_json(&outcome.zones)).map_err(|e| CliError::io(p, e))?;
            }
            if let Some(p) = &args.pso_trace {
                write_trace(p, &outcome.traces)?;
            }
            if let Some(p) = &args.dump_pool {
                let mut text = serde_json::to_string_pretty(&outcome.pool).expect("pool always serialises");
                text.push('\n');
                fs::write(p, text).map_err(|e| CliError::io(p, e))?;
            }
            (Method::Emtad.name(), outcome.deployment, outcome.validation)
        }
    };

    if let Some(p) = &args.validation_csv {
        validation.write_csv(create(p)?).map_err(|e| CliError::io(p, e))?;
    }
    let throughput = evaluate_throughput(&deployment, &scenario, &params);
    let results = ResultsDocument::new(method, &deployment, &throughput, validation);
    write_out(args.out.as_deref(), &results.to_json())
}

fn cmd_sweep(kind: ScenarioKind, config: Option<&Path>, runs: usize, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let mut params = ChannelParams::default();
    let mut swarm = SwarmConfig::default();
    let mut policy = None;
    let mut base_seed = 0;
    if let Some(c) = &cfg {
        let path = config.expect("config path present");
        if let Some(ch) = &c.channel {
            params = ch.apply(&params).map_err(|e| CliError::document(path, e))?;
        }
        if let Some(p) = c.pso {
            swarm = p;
        }
        policy = c.policy.clone();
        base_seed = c.seed.unwrap_or(0);
    }
    base_seed = seed.unwrap_or(base_seed);
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    swarm.validate().map_err(|e| CliError::Config(e.to_string()))?;

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let adjust = move |s: &mut uavplan::Scenario| {
        if let Some(p) = &policy {
            p.apply(s);
        }
    };
    let table = run_experiment_with(kind, &params, &swarm, runs, base_seed, &Method::ALL, &adjust);

    let path = out.join("runs.csv");
    table.write_runs_csv(create(&path)?).map_err(|e| CliError::io(&path, e))?;
    let path = out.join("summary.csv");
    table.write_summary_csv(create(&path)?).map_err(|e| CliError::io(&path, e))?;
    for (name, metric) in [("plot_uav_count.csv", PlotMetric::UavCount), ("plot_throughput.csv", PlotMetric::Throughput)] {
        let path = out.join(name);
        table.write_plot_csv(metric, create(&path)?).map_err(|e| CliError::io(&path, e))?;
    }
    if table.all_failed() {
        return Err(CliError::AllRunsFailed(format!("every run of scenario {} failed", kind.name())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate { kind, variant, seed, out } => cmd_generate(kind, variant, seed, out.as_deref()),
        Command::Plan { scenario, config, out, seed, baseline, dump_zones, pso_trace, dump_pool, validation_csv } => {
            cmd_plan(PlanArgs { scenario, config, out, seed, baseline, dump_zones, pso_trace, dump_pool, validation_csv })
        }
        Command::Sweep { kind, config, runs, seed, out } => {
            cmd_sweep(kind, config.as_deref(), runs as usize, seed, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uavplan: {e}");
            ExitCode::from(e.code())
        }
    }
}
