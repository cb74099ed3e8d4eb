//! Deliberately broken executors for exercising the validators.

use std::fmt;
use std::str::FromStr;

use crate::executor::{ExecInput, ExecResult, Executor, StandardExecutor};
use crate::model::{ExecutionContext, Operation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Transfers credit the destination but never debit the sender.
    SkipDebit,
}

impl Fault {
    pub fn name(self) -> &'static str {
        match self {
            Fault::SkipDebit => "skip-debit",
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fault {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skip-debit" => Ok(Fault::SkipDebit),
            other => Err(format!("unknown fault {other:?}")),
        }
    }
}

/// Wraps the reference executor and corrupts its results.
#[derive(Debug, Clone, Default)]
pub struct FaultyExecutor {
    pub inner: StandardExecutor,
    pub fault: Option<Fault>,
}

impl FaultyExecutor {
    pub fn new(inner: StandardExecutor, fault: Fault) -> Self {
        Self {
            inner,
            fault: Some(fault),
        }
    }
}

impl Executor for FaultyExecutor {
    fn execute(&self, ectx: &ExecutionContext, op: &Operation, input: ExecInput<'_>) -> ExecResult {
        let mut done = self.inner.execute(ectx, op, input)?;
        if let (Some(Fault::SkipDebit), Operation::Transfer { dest, amount, .. }) = (self.fault, op)
        {
            if dest != &ectx.sender {
                if let Some(sender) = done.env_after.get(&ectx.sender) {
                    if let Ok(refunded) = sender.balance().checked_add(*amount) {
                        let sender = sender.with_balance(refunded);
                        done.env_after = done.env_after.update(ectx.sender.clone(), sender);
                    }
                }
            }
        }
        Ok(done)
    }
}
