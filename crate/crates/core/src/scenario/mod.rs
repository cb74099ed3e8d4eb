//! Text scenarios: declarations, transactions and expectations.
//!
//! ```text
//! scenario "deposit"
//! account @alice balance 10
//! contract @vault code bank config (pair 0 @alice) storage unit balance 0
//! transaction from @alice { transfer 4 to @vault call deposit() }
//! expect balance @vault = 4
//! ```

mod ast;
mod lexer;
mod parser;
mod printer;

use std::collections::BTreeSet;

pub use ast::{Cmp, Decl, Expectation, OpSpec, Scenario, TxSpec};
pub use parser::{parse_scenario, parse_value, ParseError};
pub use printer::print_scenario;

use crate::executor::{Executor, StandardExecutor};
use crate::features::FeatureSet;
use crate::model::{Address, Amount, CodeKey, Environment, Timestamp, Value};
use crate::registry::{standard, Registry, RegistryError};
use crate::scheduler::{run_transaction, SchedulerConfig, SchedulingStrategy, TxRun};

/// Command-line replacements for the scenario's own declarations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub strategy: Option<SchedulingStrategy>,
    pub fuel: Option<u64>,
    pub features: Option<FeatureSet>,
    pub record_snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetupError {
    #[error("{0} is declared twice")]
    DuplicateAddress(Address),
    #[error("{addr}: unknown code key {code}")]
    UnknownCodeKey { addr: Address, code: CodeKey },
    #[error("{addr}: {source}")]
    Instantiate {
        addr: Address,
        source: RegistryError,
    },
    #[error("more than one {0} declaration")]
    Repeated(&'static str),
    #[error("fuel must be at least 1")]
    ZeroFuel,
    #[error("transaction {index}: {addr} is not declared or created earlier")]
    UndeclaredAddress { index: usize, addr: Address },
    #[error("expectation `{0}` names an address that is never declared or created")]
    UnknownExpectationAddress(Expectation),
    #[error("total balance of the initial environment overflows")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationResult {
    pub expectation: Expectation,
    pub passed: bool,
    /// Observed value, for failure messages.
    pub actual: String,
}

impl std::fmt::Display for ExpectationResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed {
            write!(f, "{}: PASS", self.expectation)
        } else {
            write!(f, "{}: FAIL (got {})", self.expectation, self.actual)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioOutcome {
    pub name: String,
    pub config: SchedulerConfig,
    pub initial_env: Environment,
    pub final_env: Environment,
    pub final_ts: Timestamp,
    pub runs: Vec<TxRun>,
    pub results: Vec<ExpectationResult>,
}

impl ScenarioOutcome {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn all_committed(&self) -> bool {
        self.runs.iter().all(TxRun::is_commit)
    }
}

/// Scheduler configuration from the declarations, with `overrides` applied.
pub fn scheduler_config(
    s: &Scenario,
    overrides: &Overrides,
) -> Result<SchedulerConfig, SetupError> {
    let mut cfg = SchedulerConfig::default();
    let (mut strategy, mut fuel) = (None, None);
    let mut features = FeatureSet::none();
    for d in &s.decls {
        match d {
            Decl::Strategy(st) => {
                if strategy.replace(*st).is_some() {
                    return Err(SetupError::Repeated("strategy"));
                }
            }
            Decl::Fuel(n) => {
                if fuel.replace(*n).is_some() {
                    return Err(SetupError::Repeated("fuel"));
                }
            }
            Decl::Features(fs) => fs.iter().for_each(|f| features.set(*f, true)),
            _ => {}
        }
    }
    cfg.strategy = overrides.strategy.or(strategy).unwrap_or_default();
    cfg.fuel = overrides.fuel.or(fuel).unwrap_or(cfg.fuel);
    cfg.features = overrides.features.unwrap_or(features);
    cfg.record_snapshots = overrides.record_snapshots;
    if cfg.fuel == 0 {
        return Err(SetupError::ZeroFuel);
    }
    Ok(cfg)
}

/// Initial environment of the declarations. Accounts are receivers.
pub fn build_environment(s: &Scenario, registry: &Registry) -> Result<Environment, SetupError> {
    let mut env = Environment::new();
    for d in &s.decls {
        let (addr, contract) = match d {
            Decl::Account { addr, balance } => {
                let c = registry
                    .instantiate(
                        &standard::RECEIVER.into(),
                        Value::Unit,
                        Value::Unit,
                        Amount::new(*balance),
                    )
                    .map_err(|source| SetupError::Instantiate {
                        addr: addr.clone(),
                        source,
                    })?;
                (addr, c)
            }
            Decl::Contract {
                addr,
                code,
                config,
                storage,
                balance,
                contextual,
            } => {
                if !registry.contains(code) {
                    return Err(SetupError::UnknownCodeKey {
                        addr: addr.clone(),
                        code: code.clone(),
                    });
                }
                let c = registry
                    .instantiate(code, config.clone(), storage.clone(), Amount::new(*balance))
                    .map_err(|source| SetupError::Instantiate {
                        addr: addr.clone(),
                        source,
                    })?;
                (addr, c.with_contextual(*contextual))
            }
            _ => continue,
        };
        if env.contains(addr) {
            return Err(SetupError::DuplicateAddress(addr.clone()));
        }
        env = env.update(addr.clone(), contract);
    }
    if env.total_balance().is_err() {
        return Err(SetupError::Overflow);
    }
    Ok(env)
}

fn check_references(s: &Scenario, env: &Environment) -> Result<(), SetupError> {
    fn walk(ops: &[OpSpec], known: &mut BTreeSet<Address>, index: usize) -> Result<(), SetupError> {
        for op in ops {
            match op {
                OpSpec::Transfer { dest, .. } if !known.contains(dest) => {
                    return Err(SetupError::UndeclaredAddress {
                        index,
                        addr: dest.clone(),
                    })
                }
                OpSpec::Create { addr, .. } => {
                    known.insert(addr.clone());
                }
                OpSpec::Atomic(inner)
                | OpSpec::Context(inner)
                | OpSpec::Allow(_, inner)
                | OpSpec::Block(_, inner) => walk(inner, known, index)?,
                _ => {}
            }
        }
        Ok(())
    }
    let mut known: BTreeSet<Address> = env.addresses().cloned().collect();
    for (index, tx) in s.transactions.iter().enumerate() {
        if !known.contains(&tx.author) {
            return Err(SetupError::UndeclaredAddress {
                index,
                addr: tx.author.clone(),
            });
        }
        walk(&tx.ops, &mut known, index)?;
    }
    for e in &s.expectations {
        if let Expectation::Balance { addr, .. } | Expectation::Storage { addr, .. } = e {
            if !known.contains(addr) {
                return Err(SetupError::UnknownExpectationAddress(e.clone()));
            }
        }
    }
    Ok(())
}

/// Checks everything that can fail before the first transaction runs.
pub fn validate_setup(
    s: &Scenario,
    registry: &Registry,
) -> Result<(SchedulerConfig, Environment), SetupError> {
    let cfg = scheduler_config(s, &Overrides::default())?;
    let env = build_environment(s, registry)?;
    check_references(s, &env)?;
    Ok((cfg, env))
}

pub fn run_scenario(s: &Scenario, overrides: &Overrides) -> Result<ScenarioOutcome, SetupError> {
    let exec = StandardExecutor::default();
    run_scenario_with(s, overrides, exec.registry(), &exec)
}

/// [`run_scenario`] with a caller-supplied registry and executor.
pub fn run_scenario_with(
    s: &Scenario,
    overrides: &Overrides,
    registry: &Registry,
    executor: &dyn Executor,
) -> Result<ScenarioOutcome, SetupError> {
    let cfg = scheduler_config(s, overrides)?;
    let initial_env = build_environment(s, registry)?;
    check_references(s, &initial_env)?;

    let mut env = initial_env.clone();
    let mut ts = Timestamp::new(0);
    let mut runs = Vec::with_capacity(s.transactions.len());
    for tx in &s.transactions {
        let run = run_transaction(executor, &env, &tx.to_transaction(), &cfg, ts);
        env = run.env_after(&env).clone();
        ts = run.ts;
        runs.push(run);
    }
    let results = s
        .expectations
        .iter()
        .map(|e| evaluate(e, &env, &runs))
        .collect();
    Ok(ScenarioOutcome {
        name: s.name.clone(),
        config: cfg,
        initial_env,
        final_env: env,
        final_ts: ts,
        runs,
        results,
    })
}

fn evaluate(e: &Expectation, env: &Environment, runs: &[TxRun]) -> ExpectationResult {
    let reverted = runs.iter().filter(|r| !r.is_commit()).count();
    let outcomes = || format!("{} committed, {reverted} reverted", runs.len() - reverted);
    let (passed, actual) = match e {
        Expectation::Balance { addr, cmp, value } => match env.balance_of(addr) {
            Some(b) => (cmp.holds(b.mutez(), *value), b.to_string()),
            None => (false, "no such address".into()),
        },
        Expectation::Storage { addr, value } => match env.get(addr) {
            Some(c) => (c.storage() == value, c.storage().to_string()),
            None => (false, "no such address".into()),
        },
        Expectation::Commit => (reverted == 0, outcomes()),
        Expectation::Revert => (reverted > 0, outcomes()),
        Expectation::Total(n) => match env.total_balance() {
            Ok(t) => (t.mutez() == *n, t.to_string()),
            Err(_) => (false, "overflow".into()),
        },
    };
    ExpectationResult {
        expectation: e.clone(),
        passed,
        actual,
    }
}
