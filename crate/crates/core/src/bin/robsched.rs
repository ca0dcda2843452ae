use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robsched::bench::{
    aggregate, default_time_limit, evaluate_ordering, run_benchmark, solve_method, write_aggregate, BenchConfig, Method,
    MethodOptions,
};
use robsched::instgen::{gamma_from_level, generate, GenParams};
use robsched::io::{read_instance, report_to_json, write_instance};
use robsched::mip::{SolverSettings, DEFAULT_REL_GAP};
use robsched::oracle::{oracle_two_stage, OracleCaps};
use robsched::{Error, Instance, Ordering, SolveStatus, UncertaintyKind};

const EXIT_OK: u8 = 0;
const EXIT_TIME_LIMIT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "robsched", version, about = "Two-stage robust single-machine scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Wall-clock limit in seconds (default 7200, or 10800 for n >= 35).
    #[arg(long)]
    time_limit: Option<f64>,
    /// Relative optimality gap.
    #[arg(long, default_value_t = DEFAULT_REL_GAP)]
    gap: f64,
    #[arg(long, default_value_t = 1)]
    threads: u32,
}

impl SolverArgs {
    fn settings(&self, n: usize) -> SolverSettings {
        SolverSettings {
            time_limit: self.time_limit.unwrap_or_else(|| default_time_limit(n)),
            rel_gap: self.gap,
            threads: self.threads,
            ..SolverSettings::default()
        }
    }
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct BudgetArgs {
    /// Uncertainty budget.
    #[arg(long)]
    gamma: Option<f64>,
    /// Budget as a percentage of n, rounded up.
    #[arg(long)]
    u_level: Option<f64>,
}

impl BudgetArgs {
    fn resolve(&self, n: usize) -> Result<f64, Error> {
        match (self.gamma, self.u_level) {
            (Some(g), _) => Ok(g),
            (None, Some(u)) => Ok(gamma_from_level(n, u)? as f64),
            (None, None) => Err(Error::InvalidArgument("one of --gamma or --u-level is required".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Continuous,
    Discrete,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Recorded in the instance metadata.
        #[arg(long)]
        u_level: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance with one method.
    Solve {
        instance: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Seed the compact model with the nominal lower schedule.
        #[arg(long)]
        warm_start: bool,
        /// Extra adversarial scenarios per iteration.
        #[arg(long, default_value_t = 0)]
        enrich_k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an ordering under the nominal, continuous and discrete models.
    Evaluate {
        instance: PathBuf,
        /// Comma separated 1-based activity order, e.g. 2,1,3.
        #[arg(long)]
        ordering: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force optimum over all orderings (small instances only).
    Oracle {
        instance: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a batch of generated instances and write result rows as CSV.
    Bench {
        /// Instance sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Budget levels in percent.
        #[arg(long, value_delimiter = ',', required = true)]
        u_level: Vec<f64>,
        /// Seeds; `a..b` is an inclusive range.
        #[arg(long, value_delimiter = ',', required = true)]
        seed: Vec<String>,
        #[arg(long, value_delimiter = ',', value_parser = parse_method, required = true)]
        method: Vec<Method>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        warm_start: bool,
        #[arg(long, default_value_t = 0)]
        enrich_k: usize,
        /// Result rows (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-configuration means.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_seeds(items: &[String]) -> Result<Vec<u64>, Error> {
    let bad = |s: &str| Error::InvalidArgument(format!("bad seed {s:?}"));
    let mut out = Vec::new();
    for item in items {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(item))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(item))?;
            out.extend(a..=b);
        } else {
            out.push(item.trim().parse().map_err(|_| bad(item))?);
        }
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::TimeLimit => EXIT_TIME_LIMIT,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Error => EXIT_ERROR,
    }
}

fn load(path: &Path) -> Result<Instance, Error> {
    read_instance(path)
}

fn run(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Generate { n, seed, u_level, out } => {
            let mut inst = generate(n, seed, &GenParams::default())?;
            inst.meta.u_level = u_level;
            match out {
                Some(p) => write_instance(p, &inst)?,
                None => emit(None, &robsched::io::instance_to_json(&inst)?)?,
            }
            Ok(EXIT_OK)
        }
        Command::Solve { instance, method, budget, solver, warm_start, enrich_k, out } => {
            let inst = load(&instance)?;
            let gamma = match method {
                Method::NominalLb | Method::NominalUb => budget.resolve(inst.n()).unwrap_or(0.0),
                _ => budget.resolve(inst.n())?,
            };
            let opts = MethodOptions { warm_start, enrich_k, settings: solver.settings(inst.n()) };
            let report = solve_method(&inst, method, gamma, &opts)?;
            emit(out.as_deref(), &report_to_json(method.name(), &report)?)?;
            Ok(status_code(report.status))
        }
        Command::Evaluate { instance, ordering, budget, solver, out } => {
            let inst = load(&instance)?;
            let ord = Ordering::parse_one_based(&ordering)?;
            let gamma = budget.resolve(inst.n())?;
            let eval = evaluate_ordering(&inst, &ord, gamma, &solver.settings(inst.n()))?;
            let text = serde_json::json!({
                "ordering": ord.perm().iter().map(|j| j + 1).collect::<Vec<_>>(),
                "gamma": gamma,
                "eval_lb": eval.lb,
                "eval_cont": eval.cont,
                "eval_disc": eval.disc,
            });
            emit(out.as_deref(), &serde_json::to_string_pretty(&text).map_err(|e| Error::Format(e.to_string()))?)?;
            Ok(EXIT_OK)
        }
        Command::Oracle { instance, kind, budget, solver, out } => {
            let inst = load(&instance)?;
            let gamma = budget.resolve(inst.n())?;
            let kind = match kind {
                Kind::Continuous => UncertaintyKind::Continuous,
                Kind::Discrete => UncertaintyKind::Discrete,
            };
            let (value, ord) = oracle_two_stage(&inst, gamma, kind, &OracleCaps::default(), &solver.settings(inst.n()))?;
            let text = serde_json::json!({
                "kind": kind.to_string(),
                "gamma": gamma,
                "value": value,
                "ordering": ord.perm().iter().map(|j| j + 1).collect::<Vec<_>>(),
            });
            emit(out.as_deref(), &serde_json::to_string_pretty(&text).map_err(|e| Error::Format(e.to_string()))?)?;
            Ok(EXIT_OK)
        }
        Command::Bench { n, u_level, seed, method, solver, warm_start, enrich_k, out, summary } => {
            let cfg = BenchConfig {
                sizes: n,
                u_levels: u_level,
                seeds: parse_seeds(&seed)?,
                methods: method,
                time_limit: solver.time_limit,
                rel_gap: solver.gap,
                warm_start,
                enrich_k,
                threads: solver.threads,
                params: GenParams::default(),
            };
            let rows = match out {
                Some(p) => run_benchmark(&cfg, Some(File::create(p)?))?,
                None => run_benchmark(&cfg, Some(io::stdout().lock()))?,
            };
            if let Some(p) = summary {
                write_aggregate(&aggregate(&rows), File::create(p)?)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match &e {
                Error::Infeasible(_) => EXIT_INFEASIBLE,
                Error::InvalidInstance(v) if v.iter().all(|x| x.rule == "feasibility") => EXIT_INFEASIBLE,
                _ => EXIT_ERROR,
            })
        }
    }
}
