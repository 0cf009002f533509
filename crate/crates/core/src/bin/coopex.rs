//! Command-line front end for the cooperative data exchange solvers.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure,
//! 3 oracle budget exhausted.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coopex::harness::{run_experiment, Curve, ExperimentConfig, FieldPolicy};
use coopex::{
    bounds_report, optimal_tau, random_average_exact, random_average_mc, random_schedule,
    run_ie, run_leader, verify_schedule, Error, FieldSpec, Instance, Schedule, DEFAULT_BUDGET,
    EXACT_ENUMERATION_CAP,
};

#[derive(Parser)]
#[command(name = "coopex", version, about = "Cooperative data exchange solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower and upper bounds for an instance
    Bounds {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy max-dimension coding scheme
    Ie(SchemeArgs),
    /// Two-phase leader scheme
    Leader {
        #[command(flatten)]
        common: SchemeArgs,
        /// 1-based leader; defaults to the cheapest
        #[arg(long)]
        leader: Option<usize>,
    },
    /// Random client ordering: a schedule for --perm, or the average count
    RandomOrder {
        #[command(flatten)]
        common: SchemeArgs,
        /// Comma-separated 1-based client ordering
        #[arg(long, value_delimiter = ',', conflicts_with = "samples")]
        perm: Option<Vec<usize>>,
        /// Estimate the average over this many sampled orderings
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact optimum by exhaustive search
    Oracle {
        instance: PathBuf,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a schedule against an instance
    Verify {
        instance: PathBuf,
        schedule: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep random instances and write CSV
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SchemeArgs {
    instance: PathBuf,
    /// Prime field size; defaults to the smallest prime >= k
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; flags override its fields
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "n-values", value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    curves: Option<Vec<String>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, overrides_with = "no_normalize")]
    normalize: bool,
    #[arg(long = "no-normalize", overrides_with = "normalize")]
    no_normalize: bool,
    /// CSV destination; metadata goes to `<out>.meta.json`
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Verification(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    Instance::from_json(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => write_stdout(&format!("{text}\n")),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn write_stdout(text: &str) -> CliResult {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(Failure::Usage(format!("cannot write to stdout: {e}")))
        }
        _ => Ok(()),
    }
}

fn field_for(inst: &Instance, q: Option<u32>) -> CliResult<FieldSpec> {
    Ok(match q {
        Some(q) => FieldSpec::new(q)?,
        None => FieldSpec::at_least(inst.k()),
    })
}

/// Writes a schedule only after it replays cleanly.
fn emit_schedule(inst: &Instance, schedule: &Schedule, out: Option<&Path>) -> CliResult {
    let report = verify_schedule(inst, schedule)?;
    if !report.ok() {
        return Err(Failure::Verification(format!(
            "generated schedule failed verification: {}",
            serde_json::to_string(&report).expect("report serializes")
        )));
    }
    emit(out, &schedule.to_json_pretty())
}

fn one_based_to_zero(list: &[usize], what: &str) -> CliResult<Vec<usize>> {
    list.iter()
        .map(|&c| {
            c.checked_sub(1)
                .ok_or_else(|| Failure::Usage(format!("{what} entries are 1-based")))
        })
        .collect()
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen {
            n,
            k,
            rho,
            seed,
            out,
        } => {
            let inst = Instance::random(n, k, rho, seed)?;
            emit(out.as_deref(), &inst.to_json())
        }
        Command::Bounds { instance, out } => {
            let inst = load_instance(&instance)?;
            let report = bounds_report(&inst);
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            )
        }
        Command::Ie(args) => {
            let inst = load_instance(&args.instance)?;
            let (schedule, _) = run_ie(&inst, field_for(&inst, args.q)?)?;
            emit_schedule(&inst, &schedule, args.out.as_deref())
        }
        Command::Leader { common, leader } => {
            let inst = load_instance(&common.instance)?;
            let leader = match leader {
                Some(l) => Some(one_based_to_zero(&[l], "--leader")?[0]),
                None => None,
            };
            let schedule = run_leader(&inst, field_for(&inst, common.q)?, leader)?;
            emit_schedule(&inst, &schedule, common.out.as_deref())
        }
        Command::RandomOrder {
            common,
            perm,
            samples,
            seed,
        } => {
            let inst = load_instance(&common.instance)?;
            if let Some(samples) = samples {
                let est = random_average_mc(&inst, samples, seed)?;
                let mut doc = serde_json::to_value(est).expect("estimate serializes");
                if inst.k() <= EXACT_ENUMERATION_CAP {
                    let exact = random_average_exact(&inst)?;
                    doc["exact"] = serde_json::json!({
                        "numer": exact.numer(),
                        "denom": exact.denom(),
                        "value": *exact.numer() as f64 / *exact.denom() as f64,
                    });
                }
                return emit(
                    common.out.as_deref(),
                    &serde_json::to_string_pretty(&doc).expect("json"),
                );
            }
            let ordering = match perm {
                Some(p) => one_based_to_zero(&p, "--perm")?,
                None => (0..inst.k()).collect(),
            };
            let schedule = random_schedule(&inst, &ordering, field_for(&inst, common.q)?)?;
            emit_schedule(&inst, &schedule, common.out.as_deref())
        }
        Command::Oracle {
            instance,
            q,
            budget,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let field = field_for(&inst, q)?;
            match optimal_tau(&inst, field, budget) {
                Ok(res) => emit(out.as_deref(), &res.to_json()),
                Err(Error::BudgetExceeded {
                    budget,
                    lower,
                    upper,
                }) => {
                    let doc = serde_json::json!({
                        "status": "budget_exhausted",
                        "field_q": field.q(),
                        "budget": budget,
                        "lower": lower,
                        "upper": upper,
                    });
                    emit(out.as_deref(), &serde_json::to_string_pretty(&doc).expect("json"))?;
                    Err(Failure::Budget(format!(
                        "budget of {budget} nodes exhausted; optimum in [{lower}, {upper}]"
                    )))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Verify {
            instance,
            schedule,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let sched = Schedule::from_json(&read(&schedule)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", schedule.display())))?;
            let report = verify_schedule(&inst, &sched)?;
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            if report.ok() {
                Ok(())
            } else {
                Err(Failure::Verification("schedule does not satisfy every client".into()))
            }
        }
        Command::Experiment(args) => experiment(args),
    }
}

fn experiment(args: ExperimentArgs) -> CliResult {
    let mut config = match &args.config {
        Some(path) => serde_json::from_str::<ExperimentConfig>(&read(path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => ExperimentConfig::default(),
    };
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(n) = args.n_values {
        config.n_values = n;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(r) = args.rho {
        config.density = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(q) = args.q {
        config.field = FieldPolicy::Fixed(q);
    }
    if let Some(s) = args.samples {
        config.mc_samples = s;
    }
    if let Some(curves) = args.curves {
        config.curves = curves
            .iter()
            .map(|c| c.parse::<Curve>())
            .collect::<Result<_, _>>()?;
    }
    if args.normalize {
        config.normalize = true;
    }
    if args.no_normalize {
        config.normalize = false;
    }

    let report = run_experiment(&config)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, &csv)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta.json");
            fs::write(&meta, report.metadata_json())
                .map_err(|e| Failure::Usage(format!("cannot write metadata: {e}")))?;
        }
        None => write_stdout(&csv)?,
    }
    eprintln!(
        "mean ie - lower gap: {:.4}; mean upper_leader - lower gap: {:.4}",
        report.mean_ie_gap(),
        report.mean_leader_gap()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("oracle: {msg}");
            ExitCode::from(3)
        }
    }
}
