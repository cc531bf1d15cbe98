use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qcut::circuit::{self, generate_workload, Circuit, WorkloadKind, WorkloadParams};
use qcut::config::{EChoice, Mode, SystemConfig};
use qcut::pipeline::{self, CircuitDigest, RunOptions, SpecSummary, SweepAxis};
use qcut::{epr, scheduler, Error};

#[derive(Parser)]
#[command(name = "qcut", version, about = "Cut, link, schedule and reconstruct quantum circuits across noisy workers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark circuit.
    Gen(GenArgs),
    /// Find wire cuts and extract subcircuits.
    Cut(RunArgs),
    /// Cut and choose EPR merges.
    Plan(RunArgs),
    /// Plan and place units on workers, with the cost model.
    Schedule(RunArgs),
    /// Full pipeline: execute, reconstruct, score.
    Run(RunArgs),
    /// Random-merge, random-placement baseline.
    Baseline {
        #[command(flatten)]
        run: RunArgs,
        /// EPR pairs to spend (defaults to the config's fixed e, else 0).
        #[arg(long)]
        x: Option<usize>,
    },
    /// One pipeline run per value of a single parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Also write the summary as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    E,
    Sr,
    Workers,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Qasm,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: WorkloadKind,
    #[arg(long)]
    qubits: usize,
    /// BV hidden string, MSB first.
    #[arg(long)]
    secret: Option<String>,
    #[arg(long, default_value_t = 0)]
    a: u64,
    #[arg(long, default_value_t = 0)]
    b: u64,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Circuit file, OpenQASM 2 (`.qasm`) or JSON.
    #[arg(long)]
    circuit: PathBuf,
    /// System configuration JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    shots: Option<u64>,
    /// EPR pairs to spend, or `auto`.
    #[arg(long)]
    e: Option<EChoice>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include every variant's outcome distribution in the report.
    #[arg(long)]
    dump_counts: bool,
    /// Entries of the final distribution kept in the report.
    #[arg(long, default_value_t = pipeline::DEFAULT_TOP_K)]
    top_k: usize,
}

enum Failure {
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Core(e) => match e.root() {
                Error::Config(_) | Error::Schema { .. } | Error::InvalidParams(_) => 2,
                Error::Infeasible(_) => 3,
                Error::SimulationCap { .. } => 4,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = read(path)?;
    let c = if path.extension().is_some_and(|x| x == "qasm") {
        circuit::parse_qasm(&text)?
    } else {
        circuit::from_json(&text)?
    };
    Ok(c)
}

impl RunArgs {
    fn load(&self) -> Result<(Circuit, SystemConfig), Failure> {
        let c = load_circuit(&self.circuit)?;
        let mut cfg = SystemConfig::from_json(&read(&self.config)?)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
        }
        if let Some(e) = self.e {
            cfg.e = e;
        }
        cfg.validate()?;
        Ok((c, cfg))
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            top_k: self.top_k,
            dump_counts: self.dump_counts,
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    let params = match args.kind {
        WorkloadKind::Bv => WorkloadParams::Bv {
            secret: args.secret.clone().unwrap_or_else(|| "1".repeat(args.qubits)),
        },
        WorkloadKind::Adder => WorkloadParams::Adder { a: args.a, b: args.b },
        WorkloadKind::Hwea => WorkloadParams::Hwea { layers: args.layers },
        WorkloadKind::Supremacy => WorkloadParams::Supremacy { depth: args.depth },
    };
    let c = generate_workload(args.kind, args.qubits, &params, args.seed)?;
    let text = match args.format {
        Format::Json => circuit::to_json(&c),
        Format::Qasm => circuit::to_qasm(&c)?,
    };
    emit(&text, args.out.as_deref())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen(args) => gen(&args),
        Command::Cut(args) => {
            let (c, cfg) = args.load()?;
            let (plan, specs) = epr::cut(&c, &cfg)?;
            let v = json!({
                "schema": pipeline::SCHEMA,
                "circuit": CircuitDigest::of(&c),
                "cut_plan": plan,
                "subcircuits": specs.iter().map(SpecSummary::of).collect::<Vec<_>>(),
            });
            emit(&pretty(&v), args.out.as_deref())
        }
        Command::Plan(args) => {
            let (c, cfg) = args.load()?;
            let plan = epr::plan(&c, &cfg)?;
            let units: Vec<_> = plan
                .units
                .iter()
                .map(|u| json!({ "qubits": u.spec().sq(), "merged": u.is_merged() }))
                .collect();
            let v = json!({
                "schema": pipeline::SCHEMA,
                "circuit": CircuitDigest::of(&c),
                "cut_plan": plan.cut_plan,
                "subcircuits": plan.specs.iter().map(SpecSummary::of).collect::<Vec<_>>(),
                "merge_plan": plan.merge_plan,
                "units": units,
            });
            emit(&pretty(&v), args.out.as_deref())
        }
        Command::Schedule(args) => {
            let (c, cfg) = args.load()?;
            let plan = epr::plan(&c, &cfg)?;
            let placement = scheduler::schedule(&plan.units, &cfg)?;
            let base = pipeline::no_epr_cost(&plan, &cfg)?;
            let cost = scheduler::cost_report(&plan, &placement, &cfg)?.with_baseline(&base);
            let v = json!({
                "schema": pipeline::SCHEMA,
                "circuit": CircuitDigest::of(&c),
                "cut_plan": plan.cut_plan,
                "merge_plan": plan.merge_plan,
                "placement": placement,
                "units": pipeline::summarize_units(&plan, &placement, &cfg),
                "cost": cost,
                "no_epr": base,
            });
            emit(&pretty(&v), args.out.as_deref())
        }
        Command::Run(args) => {
            let (c, cfg) = args.load()?;
            let r = pipeline::run_pipeline_with(&c, &cfg, args.options())?;
            emit(&r.to_json(), args.out.as_deref())
        }
        Command::Baseline { run, x } => {
            let (c, cfg) = run.load()?;
            let x = x.unwrap_or(match cfg.e {
                EChoice::Fixed(e) => e,
                EChoice::Auto => 0,
            });
            let r = pipeline::baseline_random_with(&c, &cfg, x, cfg.seed, run.options())?;
            emit(&r.to_json(), run.out.as_deref())
        }
        Command::Sweep { run, axis, values, csv } => {
            let (c, cfg) = run.load()?;
            let bad = |v: &str| Failure::Core(Error::Config(format!("bad sweep value `{v}`")));
            let ints = || {
                values
                    .iter()
                    .map(|v| v.trim().parse::<usize>().map_err(|_| bad(v)))
                    .collect::<Result<Vec<_>, _>>()
            };
            let axis = match axis {
                AxisArg::E => SweepAxis::E(ints()?),
                AxisArg::Workers => SweepAxis::Workers(ints()?),
                AxisArg::Sr => SweepAxis::SuccessRate(
                    values
                        .iter()
                        .map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)))
                        .collect::<Result<_, _>>()?,
                ),
            };
            let sw = pipeline::sweep(&c, &cfg, &axis)?;
            if let Some(p) = &csv {
                fs::write(p, sw.to_csv()).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            }
            match &run.out {
                Some(p) => {
                    emit(&sw.to_json(), Some(p))?;
                    print!("{}", sw.to_table());
                    Ok(())
                }
                None => {
                    print!("{}", sw.to_table());
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
