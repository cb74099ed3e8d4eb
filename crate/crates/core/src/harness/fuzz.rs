use std::fmt;

use serde::Serialize;

use crate::executor::{Executor, StandardExecutor};
use crate::model::{Environment, Operation, Timestamp, Value};
use crate::registry::standard;
use crate::scenario::{print_scenario, Decl, OpSpec, Scenario, TxSpec};
use crate::scheduler::{run_transaction, SchedulerConfig, SignedTransaction, DEFAULT_FUEL};
use crate::trace::{
    validate_conservation, validate_emission_groups, validate_no_double_spend, NodeStatus,
};

use super::{gen_transaction, GenConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    Conservation,
    NoDoubleSpend,
    RevertTotality,
    TransferCorrectness,
    /// Every emission group is contiguous. Holds under BFS without
    /// context bundles or contextual callees.
    SiblingContiguity,
}

impl Invariant {
    pub const ALL: [Invariant; 5] = [
        Invariant::Conservation,
        Invariant::NoDoubleSpend,
        Invariant::RevertTotality,
        Invariant::TransferCorrectness,
        Invariant::SiblingContiguity,
    ];

    pub const DEFAULT: [Invariant; 4] = [
        Invariant::Conservation,
        Invariant::NoDoubleSpend,
        Invariant::RevertTotality,
        Invariant::TransferCorrectness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::Conservation => "conservation",
            Invariant::NoDoubleSpend => "no_double_spend",
            Invariant::RevertTotality => "revert_totality",
            Invariant::TransferCorrectness => "transfer_correctness",
            Invariant::SiblingContiguity => "sibling_contiguity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.name() == name)
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzConfig {
    pub gen: GenConfig,
    pub scheduler: SchedulerConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub seed: u64,
    pub invariant: &'static str,
    /// Minimized reproduction in scenario syntax.
    pub scenario: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub iterations: u64,
    pub commits: u64,
    pub reverts: u64,
    pub violations: Vec<Violation>,
}

impl FuzzReport {
    pub fn first_failing_seed(&self) -> Option<u64> {
        self.violations.iter().map(|v| v.seed).min()
    }

    pub fn count(&self, invariant: Invariant) -> usize {
        self.violations
            .iter()
            .filter(|v| v.invariant == invariant.name())
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Runs `tx` once from `env0` at level 0 and returns the violated
/// invariants among `invariants`, with a description of each, plus
/// whether the transaction committed.
pub fn check_case(
    executor: &dyn Executor,
    env0: &Environment,
    tx: &SignedTransaction,
    sched: &SchedulerConfig,
    invariants: &[Invariant],
) -> (bool, Vec<(Invariant, String)>) {
    let ts = Timestamp::new(0);
    let run = run_transaction(executor, env0, tx, sched, ts);
    let after = run.env_after(env0);
    let mut out = vec![];
    for &inv in invariants {
        let problem = match inv {
            Invariant::Conservation => (!validate_conservation(env0, after))
                .then(|| format!("total {} became {}", show_total(env0), show_total(after))),
            Invariant::NoDoubleSpend => {
                let r = validate_no_double_spend(&run.tree, env0, after);
                (!r.passed()).then(|| r.violations.join("; "))
            }
            Invariant::RevertTotality => {
                if run.ts != ts.next() {
                    Some(format!("clock moved to {}", run.ts))
                } else if run.is_commit() != run.tree.is_commit() {
                    Some("outcome and trace disagree".into())
                } else if !run.is_commit() && after != env0 {
                    Some("reverted transaction changed the environment".into())
                } else {
                    None
                }
            }
            Invariant::TransferCorrectness => transfer_problem(&run.tree.nodes),
            Invariant::SiblingContiguity => {
                let r = validate_emission_groups(&run.tree);
                (!r.passed()).then(|| r.violations.join("; "))
            }
        };
        if let Some(p) = problem {
            out.push((inv, p));
        }
    }
    (run.is_commit(), out)
}

fn show_total(env: &Environment) -> String {
    env.total_balance()
        .map_or("overflow".into(), |t| t.to_string())
}

/// Each executed transfer moved exactly its amount from sender to
/// destination and committed the destination's storage.
fn transfer_problem(nodes: &[crate::trace::TraceNode]) -> Option<String> {
    for n in nodes.iter().filter(|n| n.status == NodeStatus::Executed) {
        let Operation::Transfer { dest, amount, .. } = &n.op else {
            continue;
        };
        let a = i128::from(amount.mutez());
        let mut want = std::collections::BTreeMap::new();
        if dest != &n.sender && a != 0 {
            want.insert(n.sender.clone(), -a);
            want.insert(dest.clone(), a);
        }
        if n.balance_deltas != want {
            return Some(format!(
                "node {}: deltas {:?}, expected {:?}",
                n.id, n.balance_deltas, want
            ));
        }
        if !n.storage_commits.contains_key(dest) {
            return Some(format!("node {}: no storage commit for {dest}", n.id));
        }
    }
    None
}

fn still_fails(
    executor: &dyn Executor,
    env0: &Environment,
    tx: &SignedTransaction,
    sched: &SchedulerConfig,
    inv: Invariant,
) -> bool {
    check_case(executor, env0, tx, sched, &[inv])
        .1
        .iter()
        .any(|(i, _)| *i == inv)
}

/// Greedily drops top-level operations and unwraps wrappers while `inv`
/// keeps failing.
fn shrink(
    executor: &dyn Executor,
    env0: &Environment,
    tx: &SignedTransaction,
    sched: &SchedulerConfig,
    inv: Invariant,
) -> SignedTransaction {
    let mut best = tx.clone();
    'outer: loop {
        for i in 0..best.ops.len() {
            let mut cand = best.clone();
            cand.ops.remove(i);
            if still_fails(executor, env0, &cand, sched, inv) {
                best = cand;
                continue 'outer;
            }
        }
        for i in 0..best.ops.len() {
            if best.ops[i].is_wrapper() {
                let mut cand = best.clone();
                let inner = cand.ops[i].children().to_vec();
                cand.ops.splice(i..=i, inner);
                if still_fails(executor, env0, &cand, sched, inv) {
                    best = cand;
                    continue 'outer;
                }
            }
        }
        return best;
    }
}

/// Scenario declaring `env0` and running `tx` under `sched`.
pub fn repro_scenario(
    name: &str,
    env0: &Environment,
    tx: &SignedTransaction,
    sched: &SchedulerConfig,
) -> Scenario {
    let mut decls: Vec<Decl> = env0
        .iter()
        .map(|(addr, c)| {
            let plain = c.code_key().as_str() == standard::RECEIVER
                && c.config() == &Value::Unit
                && c.storage() == &Value::Unit
                && !c.is_contextual();
            if plain {
                Decl::Account {
                    addr: addr.clone(),
                    balance: c.balance().mutez(),
                }
            } else {
                Decl::Contract {
                    addr: addr.clone(),
                    code: c.code_key().clone(),
                    config: c.config().clone(),
                    storage: c.storage().clone(),
                    balance: c.balance().mutez(),
                    contextual: c.is_contextual(),
                }
            }
        })
        .collect();
    decls.push(Decl::Strategy(sched.strategy));
    let features: Vec<_> = sched.features.iter().collect();
    if !features.is_empty() {
        decls.push(Decl::Features(features));
    }
    if sched.fuel != DEFAULT_FUEL {
        decls.push(Decl::Fuel(sched.fuel));
    }
    let ops = tx
        .ops
        .iter()
        .map(|op| OpSpec::from_operation(op).expect("generated parameters are entrypoint calls"))
        .collect();
    Scenario {
        name: name.to_string(),
        decls,
        transactions: vec![TxSpec {
            author: tx.author.clone(),
            ops,
        }],
        expectations: vec![],
    }
}

pub fn fuzz(env0: &Environment, cfg: &FuzzConfig, n: u64, invariants: &[Invariant]) -> FuzzReport {
    fuzz_with(&StandardExecutor::default(), env0, cfg, n, invariants)
}

/// Runs `n` generated transactions, each from `env0`. Case `i` uses seed
/// `cfg.gen.seed + i`.
pub fn fuzz_with(
    executor: &dyn Executor,
    env0: &Environment,
    cfg: &FuzzConfig,
    n: u64,
    invariants: &[Invariant],
) -> FuzzReport {
    let mut report = FuzzReport {
        iterations: n,
        ..FuzzReport::default()
    };
    for i in 0..n {
        let seed = cfg.gen.seed.wrapping_add(i);
        let tx = gen_transaction(seed, &cfg.gen);
        let (committed, failures) = check_case(executor, env0, &tx, &cfg.scheduler, invariants);
        if committed {
            report.commits += 1;
        } else {
            report.reverts += 1;
        }
        for (inv, detail) in failures {
            let small = shrink(executor, env0, &tx, &cfg.scheduler, inv);
            let scenario =
                repro_scenario(&format!("fuzz-{seed}-{inv}"), env0, &small, &cfg.scheduler);
            report.violations.push(Violation {
                seed,
                invariant: inv.name(),
                scenario: print_scenario(&scenario),
                detail,
            });
        }
    }
    report
}
