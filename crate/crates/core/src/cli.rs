//! The `msc` command line: `run`, `compare` and `fuzz`.
//!
//! Exit codes: 0 success, 1 expectation failure or divergence or
//! violation, 2 usage, parse or setup error, 3 internal error.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::executor::{Executor, StandardExecutor};
use crate::features::FeatureSet;
use crate::harness::faults::{Fault, FaultyExecutor};
use crate::harness::{self, FuzzConfig, GenConfig, Invariant};
use crate::scenario::{parse_scenario, run_scenario_with, Overrides, Scenario, ScenarioOutcome};
use crate::scheduler::{SchedulerConfig, SchedulingStrategy, TxOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "msc",
    version,
    about = "Deterministic multi-contract execution simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and check its expectations.
    Run(RunArgs),
    /// Run a scenario under several strategies and report differences.
    Compare(CompareArgs),
    /// Run generated transactions against the default universe.
    Fuzz(FuzzArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long)]
    strategy: Option<SchedulingStrategy>,
    #[arg(long)]
    fuel: Option<u64>,
    /// Comma-separated feature names.
    #[arg(long)]
    features: Option<String>,
    /// Write one JSON trace record per transaction to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print the pending queue after every step.
    #[arg(long)]
    step: bool,
    #[arg(long, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    file: PathBuf,
    #[arg(long, default_value = "bfs,dfs")]
    strategies: String,
    #[arg(long)]
    fuel: Option<u64>,
    #[arg(long)]
    features: Option<String>,
}

#[derive(Debug, Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    iterations: u64,
    /// Comma-separated invariant names.
    #[arg(long)]
    invariants: Option<String>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "bfs")]
    strategy: SchedulingStrategy,
    #[arg(long, hide = true)]
    inject_fault: Option<Fault>,
}

struct Style {
    color: bool,
}

impl Style {
    fn verdict(&self, line: &str, passed: bool) -> String {
        if !self.color {
            return line.to_string();
        }
        let code = if passed { "32" } else { "31" };
        format!("\x1b[{code}m{line}\x1b[0m")
    }
}

/// Outcome of a command: exit code plus a message for stderr.
struct Failure(i32, String);

type CmdResult = Result<i32, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn internal(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INTERNAL, msg.into())
}

pub fn main() -> i32 {
    let color = std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run_with_style(std::env::args_os(), &mut out, &mut err, color)
}

/// Runs the command line `args` (program name first) without color.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_style(args, out, err, false)
}

fn run_with_style<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let style = Style { color };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match &cli.command {
        Command::Run(a) => cmd_run(a, out, &style),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Fuzz(a) => cmd_fuzz(a, out),
    }));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(Failure(code, msg))) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
        Err(_) => {
            let _ = writeln!(err, "error: internal failure");
            EXIT_INTERNAL
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn parse_features(list: &Option<String>) -> Result<Option<FeatureSet>, Failure> {
    list.as_deref()
        .map(FeatureSet::parse_list)
        .transpose()
        .map_err(|e| usage(e.to_string()))
}

fn executor_for(fault: Option<Fault>) -> FaultyExecutor {
    FaultyExecutor {
        inner: StandardExecutor::default(),
        fault,
    }
}

fn execute(
    s: &Scenario,
    overrides: &Overrides,
    exec: &FaultyExecutor,
) -> Result<ScenarioOutcome, Failure> {
    run_scenario_with(s, overrides, exec.inner.registry(), exec as &dyn Executor)
        .map_err(|e| usage(format!("setup: {e}")))
}

fn io(e: std::io::Error) -> Failure {
    internal(e.to_string())
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write, style: &Style) -> CmdResult {
    let s = load(&a.file)?;
    let overrides = Overrides {
        strategy: a.strategy,
        fuel: a.fuel,
        features: parse_features(&a.features)?,
        record_snapshots: a.step,
    };
    let outcome = execute(&s, &overrides, &executor_for(a.inject_fault))?;
    let cfg = &outcome.config;
    writeln!(
        out,
        "scenario {} (strategy {}, fuel {})",
        outcome.name, cfg.strategy, cfg.fuel
    )
    .map_err(io)?;
    for (i, run) in outcome.runs.iter().enumerate() {
        match &run.outcome {
            TxOutcome::Commit(_) => writeln!(out, "tx {i}: commit"),
            TxOutcome::Revert(e) => writeln!(out, "tx {i}: revert ({e})"),
        }
        .map_err(io)?;
        if let Some(states) = &run.tree.snapshots {
            for state in states {
                writeln!(out, "  {state}").map_err(io)?;
            }
        }
    }
    for r in &outcome.results {
        writeln!(out, "{}", style.verdict(&r.to_string(), r.passed)).map_err(io)?;
    }
    if let Some(path) = &a.trace {
        let mut text = String::new();
        for run in &outcome.runs {
            text.push_str(&run.tree.to_json());
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display())))?;
    }
    Ok(if outcome.all_passed() {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> CmdResult {
    let strategies = a
        .strategies
        .split(',')
        .map(|s| s.trim().parse::<SchedulingStrategy>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    if strategies.len() < 2 {
        return Err(usage("compare needs at least two strategies"));
    }
    let s = load(&a.file)?;
    let features = parse_features(&a.features)?;
    let exec = executor_for(None);
    let mut outcomes = vec![];
    for st in &strategies {
        let o = execute(
            &s,
            &Overrides {
                strategy: Some(*st),
                fuel: a.fuel,
                features,
                record_snapshots: false,
            },
            &exec,
        )?;
        let verdicts: Vec<&str> = o
            .runs
            .iter()
            .map(|r| if r.is_commit() { "commit" } else { "revert" })
            .collect();
        writeln!(out, "{st}: [{}]", verdicts.join(", ")).map_err(io)?;
        outcomes.push((*st, o));
    }
    let (base_st, base) = &outcomes[0];
    let mut divergent = false;
    for (st, o) in &outcomes[1..] {
        for (i, (x, y)) in base.runs.iter().zip(&o.runs).enumerate() {
            if x.is_commit() != y.is_commit() {
                divergent = true;
                let word = |c: bool| if c { "commit" } else { "revert" };
                writeln!(
                    out,
                    "tx {i}: {base_st}={} {st}={}",
                    word(x.is_commit()),
                    word(y.is_commit())
                )
                .map_err(io)?;
            }
        }
        let addrs: std::collections::BTreeSet<_> = base
            .final_env
            .addresses()
            .chain(o.final_env.addresses())
            .collect();
        for addr in addrs {
            let show = |e: &crate::model::Environment| {
                e.balance_of(addr)
                    .map_or("absent".to_string(), |b| b.to_string())
            };
            let (bx, by) = (show(&base.final_env), show(&o.final_env));
            if bx != by {
                divergent = true;
                writeln!(out, "balance {addr}: {base_st}={bx} {st}={by}").map_err(io)?;
            }
            let storage =
                |e: &crate::model::Environment| e.get(addr).map(|c| c.storage().to_string());
            if let (Some(sx), Some(sy)) = (storage(&base.final_env), storage(&o.final_env)) {
                if sx != sy {
                    divergent = true;
                    writeln!(out, "storage {addr}: {base_st}={sx} {st}={sy}").map_err(io)?;
                }
            }
        }
    }
    writeln!(out, "{}", if divergent { "divergent" } else { "identical" }).map_err(io)?;
    Ok(if divergent { EXIT_FAIL } else { EXIT_OK })
}

fn cmd_fuzz(a: &FuzzArgs, out: &mut dyn Write) -> CmdResult {
    if a.iterations == 0 {
        return Err(usage("--iterations must be at least 1"));
    }
    let invariants = match &a.invariants {
        None => Invariant::DEFAULT.to_vec(),
        Some(list) => list
            .split(',')
            .map(|s| {
                Invariant::from_name(s.trim())
                    .ok_or_else(|| usage(format!("unknown invariant {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let exec = executor_for(a.inject_fault);
    let registry = exec.inner.registry();
    let env0 = harness::default_env(registry);
    let cfg = FuzzConfig {
        gen: GenConfig::new(a.seed, harness::default_universe(&env0, registry)),
        scheduler: SchedulerConfig::new(a.strategy).with_features(FeatureSet::all()),
    };
    let report = harness::fuzz_with(&exec, &env0, &cfg, a.iterations, &invariants);
    writeln!(
        out,
        "fuzz seed {}: {} iterations, {} commits, {} reverts, {} violations",
        a.seed,
        report.iterations,
        report.commits,
        report.reverts,
        report.violations.len()
    )
    .map_err(io)?;
    if let Some(first) = report.first_failing_seed() {
        let v = report
            .violations
            .iter()
            .find(|v| v.seed == first)
            .expect("seed came from a violation");
        writeln!(
            out,
            "first violation: seed {} {} ({})",
            v.seed, v.invariant, v.detail
        )
        .map_err(io)?;
        write!(out, "{}", v.scenario).map_err(io)?;
    }
    if let Some(path) = &a.out {
        std::fs::write(path, report.to_json())
            .map_err(|e| internal(format!("{}: {e}", path.display())))?;
    }
    Ok(if report.violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}
