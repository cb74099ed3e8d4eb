//! Transaction trees and the validators run over them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::executor::ExecError;
use crate::model::{Address, Environment, OpKind, Operation, Timestamp, Value};
use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Executed,
    /// A wrapper whose contents were spliced into the pending structure.
    Expanded(OpKind),
    FailedHere,
}

impl NodeStatus {
    pub fn name(self) -> &'static str {
        match self {
            NodeStatus::Executed => "executed",
            NodeStatus::Expanded(_) => "expanded",
            NodeStatus::FailedHere => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub id: usize,
    /// Node whose execution emitted this one, or the wrapper that held it.
    pub parent: Option<usize>,
    pub seq: usize,
    pub sender: Address,
    pub op: Operation,
    pub status: NodeStatus,
    pub balance_deltas: BTreeMap<Address, i128>,
    pub storage_commits: BTreeMap<Address, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeOutcome {
    Commit,
    Revert(ExecError),
}

/// One pending entry in a rendered queue state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotEntry {
    pub sender: Address,
    pub op: Operation,
}

/// Queue contents at one instant, head frame first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StackSnapshot {
    pub frames: Vec<Vec<SnapshotEntry>>,
}

impl StackSnapshot {
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// `[[(@bad, @vault.withdraw(5)), (@vault, @bad.receive() amount=5)], [...]]`
impl fmt::Display for StackSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, frame) in self.frames.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, e) in frame.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "({}, {})", e.sender, e.op)?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionTree {
    pub nodes: Vec<TraceNode>,
    pub outcome: TreeOutcome,
    /// Level the transaction ran at.
    pub ts: Timestamp,
    /// Initial queue state followed by the state after every step, when
    /// recording was requested.
    pub snapshots: Option<Vec<StackSnapshot>>,
}

impl TransactionTree {
    pub fn is_commit(&self) -> bool {
        self.outcome == TreeOutcome::Commit
    }

    pub fn node(&self, id: usize) -> Option<&TraceNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn to_record(&self) -> TraceRecord {
        let (outcome, reason) = match &self.outcome {
            TreeOutcome::Commit => ("commit", None),
            TreeOutcome::Revert(e) => ("revert", Some(e.to_string())),
        };
        TraceRecord {
            outcome,
            reason,
            ts: self.ts.tick(),
            nodes: self.nodes.iter().map(node_record).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("trace records always serialize")
    }
}

/// Serialized form of a transaction tree.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub ts: u64,
    pub nodes: Vec<NodeRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub seq: usize,
    pub sender: String,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amount: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    pub status: &'static str,
    pub deltas: BTreeMap<String, i128>,
    pub commits: BTreeMap<String, String>,
}

fn node_record(n: &TraceNode) -> NodeRecord {
    let param = match &n.op {
        Operation::Transfer { param, .. } => Some(param.to_string()),
        Operation::CreateContract { storage, .. } => Some(storage.to_string()),
        _ => None,
    };
    NodeRecord {
        id: n.id,
        parent: n.parent,
        seq: n.seq,
        sender: n.sender.to_string(),
        kind: n.op.kind().name(),
        dest: n.op.target().map(Address::to_string),
        amount: n.op.amount().map(|a| a.mutez()),
        param,
        status: n.status.name(),
        deltas: n
            .balance_deltas
            .iter()
            .map(|(a, d)| (a.to_string(), *d))
            .collect(),
        commits: n
            .storage_commits
            .iter()
            .map(|(a, v)| (a.to_string(), v.to_string()))
            .collect(),
    }
}

/// Outcome of a validator; empty means the check passed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

/// Per-address balance change between two environments.
pub fn balance_diff(before: &Environment, after: &Environment) -> BTreeMap<Address, i128> {
    let addrs: BTreeSet<&Address> = before.addresses().chain(after.addresses()).collect();
    let mut out = BTreeMap::new();
    for a in addrs {
        let b = before.balance_of(a).map_or(0, |x| i128::from(x.mutez()));
        let c = after.balance_of(a).map_or(0, |x| i128::from(x.mutez()));
        if b != c {
            out.insert(a.clone(), c - b);
        }
    }
    out
}

/// Checks that the committed balance changes are exactly the nominal
/// debits and credits of the executed transfers and creations, each
/// counted once. A reverted tree must leave the environment untouched.
pub fn validate_no_double_spend(
    tree: &TransactionTree,
    before: &Environment,
    after: &Environment,
) -> Report {
    let mut report = Report::default();
    if !tree.is_commit() {
        if before != after {
            report.fail("reverted transaction changed the environment".into());
        }
        return report;
    }
    let mut ids = BTreeSet::new();
    let mut nominal: BTreeMap<Address, i128> = BTreeMap::new();
    for n in &tree.nodes {
        if !ids.insert(n.id) {
            report.fail(format!("node {} recorded twice", n.id));
        }
        if n.status != NodeStatus::Executed {
            continue;
        }
        if let (Some(dest), Some(amount)) = (n.op.target(), n.op.amount()) {
            let amount = i128::from(amount.mutez());
            *nominal.entry(n.sender.clone()).or_default() -= amount;
            *nominal.entry(dest.clone()).or_default() += amount;
        }
    }
    nominal.retain(|_, d| *d != 0);
    let actual = balance_diff(before, after);
    let addrs: BTreeSet<&Address> = nominal.keys().chain(actual.keys()).collect();
    for a in addrs {
        let want = nominal.get(a).copied().unwrap_or(0);
        let got = actual.get(a).copied().unwrap_or(0);
        if want != got {
            report.fail(format!(
                "{a}: balance moved by {got}, executed operations account for {want}"
            ));
        }
    }
    report
}

fn children_index(tree: &TransactionTree) -> BTreeMap<Option<usize>, Vec<&TraceNode>> {
    let mut index: BTreeMap<Option<usize>, Vec<&TraceNode>> = BTreeMap::new();
    for n in &tree.nodes {
        index.entry(n.parent).or_default().push(n);
    }
    index
}

/// Seq indices of the nodes under `parent`, descending through wrapper
/// nodes but not through executed ones.
fn group_seqs(
    index: &BTreeMap<Option<usize>, Vec<&TraceNode>>,
    parent: Option<usize>,
    out: &mut Vec<usize>,
) {
    for child in index.get(&parent).into_iter().flatten() {
        out.push(child.seq);
        if matches!(child.status, NodeStatus::Expanded(_)) {
            group_seqs(index, Some(child.id), out);
        }
    }
}

fn check_contiguous(label: &str, mut seqs: Vec<usize>, report: &mut Report) {
    seqs.sort_unstable();
    if let Some(gap) = seqs.windows(2).find(|w| w[1] != w[0] + 1) {
        report.fail(format!("{label}: seq {} is followed by {}", gap[0], gap[1]));
    }
}

/// Every atomic bundle and its wrapped contents occupy consecutive seq slots.
pub fn validate_atomic_bundles(tree: &TransactionTree) -> Report {
    let index = children_index(tree);
    let mut report = Report::default();
    for n in &tree.nodes {
        if n.status == NodeStatus::Expanded(OpKind::Atomic) {
            let mut seqs = vec![n.seq];
            group_seqs(&index, Some(n.id), &mut seqs);
            check_contiguous(&format!("atomic bundle {}", n.id), seqs, &mut report);
        }
    }
    report
}

/// Applies the atomic-bundle check to every emission group: the root
/// operations, and the operations emitted by each executed node.
pub fn validate_emission_groups(tree: &TransactionTree) -> Report {
    let index = children_index(tree);
    let mut report = Report::default();
    let mut roots = vec![];
    group_seqs(&index, None, &mut roots);
    check_contiguous("root group", roots, &mut report);
    for n in &tree.nodes {
        if n.status == NodeStatus::Executed {
            let mut seqs = vec![];
            group_seqs(&index, Some(n.id), &mut seqs);
            check_contiguous(&format!("emissions of node {}", n.id), seqs, &mut report);
        }
    }
    report
}

/// Total balance is the same on both sides. An overflowing total never
/// validates.
pub fn validate_conservation(before: &Environment, after: &Environment) -> bool {
    matches!((before.total_balance(), after.total_balance()), (Ok(a), Ok(b)) if a == b)
}

/// Rebuilds the post-commit environment from `before` and the recorded
/// deltas, commits and creations.
pub fn replay(
    tree: &TransactionTree,
    before: &Environment,
    registry: &Registry,
) -> Result<Environment, String> {
    let mut env = before.clone();
    for n in tree
        .nodes
        .iter()
        .filter(|n| n.status == NodeStatus::Executed)
    {
        if let Operation::CreateContract {
            addr,
            storage,
            code_key,
            config,
            ..
        } = &n.op
        {
            let c = registry
                .instantiate(
                    code_key,
                    config.clone(),
                    storage.clone(),
                    Default::default(),
                )
                .map_err(|e| e.to_string())?;
            env = env.update(addr.clone(), c);
        }
        for (addr, delta) in &n.balance_deltas {
            let c = env
                .get(addr)
                .ok_or_else(|| format!("delta on absent {addr}"))?;
            let bal = i128::from(c.balance().mutez()) + delta;
            let bal = u64::try_from(bal).map_err(|_| format!("{addr} balance out of range"))?;
            env = env.update(addr.clone(), c.with_balance(bal.into()));
        }
        for (addr, storage) in &n.storage_commits {
            let c = env
                .get(addr)
                .ok_or_else(|| format!("commit on absent {addr}"))?;
            let c = c.with_storage(storage.clone()).map_err(|e| e.to_string())?;
            env = env.update(addr.clone(), c);
        }
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Amount;

    fn addr(s: &str) -> Address {
        Address::new(s).unwrap()
    }

    fn node(id: usize, parent: Option<usize>, status: NodeStatus, op: Operation) -> TraceNode {
        TraceNode {
            id,
            parent,
            seq: id,
            sender: addr("s"),
            op,
            status,
            balance_deltas: BTreeMap::new(),
            storage_commits: BTreeMap::new(),
        }
    }

    fn tree(nodes: Vec<TraceNode>) -> TransactionTree {
        TransactionTree {
            nodes,
            outcome: TreeOutcome::Commit,
            ts: Timestamp::new(0),
            snapshots: None,
        }
    }

    fn t(dest: &str) -> Operation {
        Operation::transfer(addr(dest), Amount::ZERO)
    }

    #[test]
    fn empty_tree_passes_everything() {
        let env = Environment::new();
        let tr = tree(vec![]);
        assert!(validate_no_double_spend(&tr, &env, &env).passed());
        assert!(validate_atomic_bundles(&tr).passed());
        assert!(validate_emission_groups(&tr).passed());
        assert!(validate_conservation(&env, &env));
    }

    #[test]
    fn atomic_gap_is_reported() {
        let atomic = Operation::AtomicBundle {
            ops: vec![t("a"), t("b")],
        };
        let mut nodes = vec![
            node(0, None, NodeStatus::Expanded(OpKind::Atomic), atomic),
            node(1, Some(0), NodeStatus::Executed, t("a")),
            node(2, Some(1), NodeStatus::Executed, t("x")),
            node(3, Some(0), NodeStatus::Executed, t("b")),
        ];
        assert!(!validate_atomic_bundles(&tree(nodes.clone())).passed());
        nodes[2].seq = 3;
        nodes[3].seq = 2;
        assert!(validate_atomic_bundles(&tree(nodes)).passed());
    }

    #[test]
    fn single_op_bundle_passes() {
        let atomic = Operation::AtomicBundle { ops: vec![t("a")] };
        let nodes = vec![
            node(0, None, NodeStatus::Expanded(OpKind::Atomic), atomic),
            node(1, Some(0), NodeStatus::Executed, t("a")),
        ];
        assert!(validate_atomic_bundles(&tree(nodes)).passed());
    }

    #[test]
    fn snapshot_rendering() {
        let s = StackSnapshot {
            frames: vec![
                vec![SnapshotEntry {
                    sender: addr("bad"),
                    op: Operation::call(
                        addr("vault"),
                        Amount::ZERO,
                        "withdraw",
                        vec![Value::Nat(5)],
                    ),
                }],
                vec![SnapshotEntry {
                    sender: addr("vault"),
                    op: Operation::call(addr("bad"), Amount::new(5), "receive", vec![]),
                }],
            ],
        };
        assert_eq!(
            s.to_string(),
            "[[(@bad, @vault.withdraw(5))], [(@vault, @bad.receive() amount=5)]]"
        );
        assert_eq!(StackSnapshot::default().to_string(), "[]");
    }
}
