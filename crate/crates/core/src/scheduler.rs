//! Transaction driver: the pending structure, insertion strategies, wrapper
//! expansion, fuel, commit and revert.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::executor::{ErrorKind, ExecError, ExecInput, Executor};
use crate::features::{narrow_restrictions, Feature, FeatureSet};
use crate::model::{
    Address, Environment, ExecutionContext, Operation, PendingTransfer, QueueSnapshot, Timestamp,
};
use crate::trace::{
    balance_diff, NodeStatus, SnapshotEntry, StackSnapshot, TraceNode, TransactionTree, TreeOutcome,
};

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum SchedulingStrategy {
    #[default]
    Bfs,
    Dfs,
}

impl SchedulingStrategy {
    pub const ALL: [SchedulingStrategy; 2] = [SchedulingStrategy::Bfs, SchedulingStrategy::Dfs];

    pub fn name(self) -> &'static str {
        match self {
            SchedulingStrategy::Bfs => "bfs",
            SchedulingStrategy::Dfs => "dfs",
        }
    }
}

impl fmt::Display for SchedulingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy {0:?}, expected bfs or dfs")]
pub struct UnknownStrategy(pub String);

impl FromStr for SchedulingStrategy {
    type Err = UnknownStrategy;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfs" => Ok(SchedulingStrategy::Bfs),
            "dfs" => Ok(SchedulingStrategy::Dfs),
            other => Err(UnknownStrategy(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingOp {
    pub op: Operation,
    pub ectx: ExecutionContext,
    /// Trace node that emitted or wrapped this operation.
    pub parent: Option<usize>,
}

/// Sequence of pending queues, head frame first. Empty frames are dropped
/// as soon as they appear, so an empty stack means the transaction is done.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextStack {
    frames: VecDeque<VecDeque<PendingOp>>,
}

impl ContextStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_frames(frames: impl IntoIterator<Item = Vec<PendingOp>>) -> Self {
        let mut stack = Self {
            frames: frames.into_iter().map(VecDeque::from).collect(),
        };
        stack.prune();
        stack
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> impl Iterator<Item = &VecDeque<PendingOp>> {
        self.frames.iter()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn len(&self) -> usize {
        self.frames.iter().map(VecDeque::len).sum()
    }

    fn pop(&mut self) -> Option<PendingOp> {
        self.frames.front_mut().and_then(VecDeque::pop_front)
    }

    fn prepend(&mut self, ops: Vec<PendingOp>) {
        if self.frames.is_empty() {
            self.frames.push_front(VecDeque::new());
        }
        let head = self.frames.front_mut().expect("head frame exists");
        for op in ops.into_iter().rev() {
            head.push_front(op);
        }
    }

    fn push_frame(&mut self, ops: Vec<PendingOp>) {
        self.frames.push_front(ops.into());
    }

    fn prune(&mut self) {
        self.frames.retain(|f| !f.is_empty());
    }

    /// Every transfer still waiting, wrapped ones included.
    pub fn pending_transfers(&self) -> QueueSnapshot {
        fn walk(sender: &Address, op: &Operation, out: &mut Vec<PendingTransfer>) {
            match op {
                Operation::Transfer { dest, amount, .. } => out.push(PendingTransfer {
                    sender: sender.clone(),
                    dest: dest.clone(),
                    amount: *amount,
                }),
                other => other.children().iter().for_each(|c| walk(sender, c, out)),
            }
        }
        let mut transfers = vec![];
        for p in self.frames.iter().flatten() {
            walk(&p.ectx.sender, &p.op, &mut transfers);
        }
        QueueSnapshot { transfers }
    }

    pub fn snapshot(&self) -> StackSnapshot {
        StackSnapshot {
            frames: self
                .frames
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|p| SnapshotEntry {
                            sender: p.ectx.sender.clone(),
                            op: p.op.clone(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Places `emitted` into the head frame, or into a fresh head frame when
/// `open_new_frame` is set.
pub fn insert_emitted(
    strategy: SchedulingStrategy,
    mut stack: ContextStack,
    emitted: Vec<PendingOp>,
    open_new_frame: bool,
) -> ContextStack {
    if open_new_frame {
        stack.push_frame(emitted);
    } else {
        match strategy {
            SchedulingStrategy::Bfs => {
                if stack.frames.is_empty() {
                    stack.frames.push_front(VecDeque::new());
                }
                stack
                    .frames
                    .front_mut()
                    .expect("head frame exists")
                    .extend(emitted);
            }
            SchedulingStrategy::Dfs => stack.prepend(emitted),
        }
    }
    stack.prune();
    stack
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedTransaction {
    pub author: Address,
    pub ops: Vec<Operation>,
}

impl SignedTransaction {
    pub fn new(author: Address, ops: Vec<Operation>) -> Self {
        Self { author, ops }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulerConfig {
    pub strategy: SchedulingStrategy,
    pub features: FeatureSet,
    /// Maximum number of executed operations per transaction.
    pub fuel: u64,
    /// Keep a rendering of the queue after every step.
    pub record_snapshots: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            strategy: SchedulingStrategy::Bfs,
            features: FeatureSet::none(),
            fuel: DEFAULT_FUEL,
            record_snapshots: false,
        }
    }
}

impl SchedulerConfig {
    pub fn new(strategy: SchedulingStrategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    pub fn with_features(mut self, features: FeatureSet) -> Self {
        self.features = features;
        self
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_snapshots = true;
        self
    }
}

/// In-flight transaction. Drive it with [`SchedulerState::step`] until the
/// stack is empty.
pub struct SchedulerState<'a> {
    pub env: Environment,
    pub stack: ContextStack,
    pub end_interactions_owner: Option<Address>,
    pub fuel_left: u64,
    pub nodes: Vec<TraceNode>,
    pub snapshots: Option<Vec<StackSnapshot>>,
    executor: &'a dyn Executor,
    cfg: SchedulerConfig,
    level: Timestamp,
}

impl<'a> SchedulerState<'a> {
    pub fn new(
        executor: &'a dyn Executor,
        env: Environment,
        tx: &SignedTransaction,
        cfg: SchedulerConfig,
        level: Timestamp,
    ) -> Self {
        let root = ExecutionContext::root(tx.author.clone());
        let frame = tx
            .ops
            .iter()
            .map(|op| PendingOp {
                op: op.clone(),
                ectx: root.clone(),
                parent: None,
            })
            .collect::<Vec<_>>();
        let stack = ContextStack::from_frames([frame]);
        let snapshots = cfg.record_snapshots.then(|| vec![stack.snapshot()]);
        Self {
            env,
            stack,
            end_interactions_owner: None,
            fuel_left: cfg.fuel,
            nodes: vec![],
            snapshots,
            executor,
            cfg,
            level,
        }
    }

    pub fn is_done(&self) -> bool {
        self.stack.is_empty()
    }

    fn record(&mut self, p: &PendingOp, status: NodeStatus) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TraceNode {
            id,
            parent: p.parent,
            seq: id,
            sender: p.ectx.sender.clone(),
            op: p.op.clone(),
            status,
            balance_deltas: Default::default(),
            storage_commits: Default::default(),
        });
        id
    }

    fn fail(&mut self, p: &PendingOp, err: ExecError) -> ExecError {
        self.record(p, NodeStatus::FailedHere);
        err
    }

    fn require(&mut self, p: &PendingOp, feature: Feature) -> Result<(), ExecError> {
        if self.cfg.features.enabled(feature) {
            Ok(())
        } else {
            let err = ExecError::new(
                ErrorKind::FeatureDisabled(feature),
                format!("{} requires {feature}", p.op.kind().name()),
            );
            Err(self.fail(p, err))
        }
    }

    /// Consumes the first operation of the head frame.
    pub fn step(&mut self) -> Result<(), ExecError> {
        if self.fuel_left == 0 && !self.stack.is_empty() {
            return Err(ExecError::new(
                ErrorKind::FuelExhausted,
                format!("{} operations still pending", self.stack.len()),
            ));
        }
        let Some(p) = self.stack.pop() else {
            return Ok(());
        };
        match &p.op {
            Operation::AtomicBundle { ops } => {
                self.require(&p, Feature::Bundles)?;
                let id = self.record(&p, NodeStatus::Expanded(p.op.kind()));
                let inner = wrap(ops, &p.ectx, id);
                self.stack.prepend(inner);
            }
            Operation::Restricted { allow, block, ops } => {
                self.require(&p, Feature::Restrictions)?;
                let id = self.record(&p, NodeStatus::Expanded(p.op.kind()));
                let mut ectx = p.ectx.clone();
                ectx.restrictions =
                    narrow_restrictions(&ectx.restrictions, allow.as_ref(), block.as_ref());
                let inner = wrap(ops, &ectx, id);
                self.stack.prepend(inner);
            }
            Operation::ContextBundle { ops } => {
                self.require(&p, Feature::Contexts)?;
                let id = self.record(&p, NodeStatus::Expanded(p.op.kind()));
                let inner = wrap(ops, &p.ectx, id);
                self.stack.push_frame(inner);
            }
            _ => self.execute(p)?,
        }
        self.stack.prune();
        if let Some(s) = self.snapshots.as_mut() {
            s.push(self.stack.snapshot());
        }
        Ok(())
    }

    fn execute(&mut self, p: PendingOp) -> Result<(), ExecError> {
        let mut ectx = p.ectx.clone();
        ectx.end_interactions_owner = self.end_interactions_owner.clone();
        let pending = self.stack.pending_transfers();
        let input = ExecInput {
            env: &self.env,
            features: &self.cfg.features,
            pending: &pending,
            level: self.level,
        };
        let done = match self.executor.execute(&ectx, &p.op, input) {
            Ok(done) => done,
            Err(e) => return Err(self.fail(&p, e)),
        };
        let contextual = match &p.op {
            Operation::Transfer { dest, .. } => {
                done.env_after.get(dest).is_some_and(|c| c.is_contextual())
            }
            _ => false,
        };
        if contextual && !self.cfg.features.contexts {
            let err = ExecError::new(
                ErrorKind::FeatureDisabled(Feature::Contexts),
                format!("{} is contextual", done.emitter),
            );
            return Err(self.fail(&p, err));
        }
        self.fuel_left -= 1;
        let id = self.record(&p, NodeStatus::Executed);
        let node = &mut self.nodes[id];
        node.balance_deltas = balance_diff(&self.env, &done.env_after);
        if let Operation::Transfer { dest, .. } = &p.op {
            if let Some(c) = done.env_after.get(dest) {
                node.storage_commits
                    .insert(dest.clone(), c.storage().clone());
            }
        }
        if matches!(p.op, Operation::EndInteractions) && self.end_interactions_owner.is_none() {
            self.end_interactions_owner = Some(ectx.sender.clone());
        }
        self.env = done.env_after;
        let child = p.ectx.child(done.emitter);
        let emitted = wrap(&done.emitted, &child, id);
        let stack = std::mem::take(&mut self.stack);
        self.stack = insert_emitted(self.cfg.strategy, stack, emitted, contextual);
        Ok(())
    }

    fn into_tree(self, outcome: TreeOutcome) -> TransactionTree {
        TransactionTree {
            nodes: self.nodes,
            outcome,
            ts: self.level,
            snapshots: self.snapshots,
        }
    }
}

fn wrap(ops: &[Operation], ectx: &ExecutionContext, parent: usize) -> Vec<PendingOp> {
    ops.iter()
        .map(|op| PendingOp {
            op: op.clone(),
            ectx: ectx.clone(),
            parent: Some(parent),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxOutcome {
    Commit(Environment),
    Revert(ExecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxRun {
    pub outcome: TxOutcome,
    /// Clock after the transaction.
    pub ts: Timestamp,
    pub tree: TransactionTree,
}

impl TxRun {
    pub fn is_commit(&self) -> bool {
        matches!(self.outcome, TxOutcome::Commit(_))
    }

    /// Environment after the transaction: the committed one, or `before`.
    pub fn env_after<'e>(&'e self, before: &'e Environment) -> &'e Environment {
        match &self.outcome {
            TxOutcome::Commit(env) => env,
            TxOutcome::Revert(_) => before,
        }
    }

    pub fn error(&self) -> Option<&ExecError> {
        match &self.outcome {
            TxOutcome::Revert(e) => Some(e),
            TxOutcome::Commit(_) => None,
        }
    }
}

/// Runs `tx` to completion. A failure anywhere reverts to `env`; the clock
/// advances by one either way.
pub fn run_transaction(
    executor: &dyn Executor,
    env: &Environment,
    tx: &SignedTransaction,
    cfg: &SchedulerConfig,
    ts: Timestamp,
) -> TxRun {
    let mut state = SchedulerState::new(executor, env.clone(), tx, *cfg, ts);
    let result = if env.contains(&tx.author) {
        loop {
            if state.is_done() {
                break Ok(());
            }
            if let Err(e) = state.step() {
                break Err(e);
            }
        }
    } else {
        Err(ExecError::new(
            ErrorKind::UnknownAddress,
            format!("author {} is not in the environment", tx.author),
        ))
    };
    let (outcome, tree_outcome) = match result {
        Ok(()) => (TxOutcome::Commit(state.env.clone()), TreeOutcome::Commit),
        Err(e) => (TxOutcome::Revert(e.clone()), TreeOutcome::Revert(e)),
    };
    TxRun {
        outcome,
        ts: ts.next(),
        tree: state.into_tree(tree_outcome),
    }
}

/// Folds [`run_transaction`] over `txs`, skipping the effects of reverted ones.
pub fn run_block(
    executor: &dyn Executor,
    env: &Environment,
    txs: &[SignedTransaction],
    cfg: &SchedulerConfig,
    ts: Timestamp,
) -> (Environment, Timestamp, Vec<TransactionTree>) {
    let mut env = env.clone();
    let mut ts = ts;
    let mut trees = Vec::with_capacity(txs.len());
    for tx in txs {
        let run = run_transaction(executor, &env, tx, cfg, ts);
        if let TxOutcome::Commit(next) = run.outcome {
            env = next;
        }
        ts = run.ts;
        trees.push(run.tree);
    }
    (env, ts, trees)
}
