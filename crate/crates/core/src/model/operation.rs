use std::collections::BTreeSet;
use std::fmt;

use super::primitives::{Address, Amount, CodeKey};
use super::value::Value;

/// An operation emitted by a contract body or posted by an external author.
///
/// `Transfer`, `CreateContract` and `EndInteractions` are executed by the
/// executor. The remaining variants are wrappers the scheduler expands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operation {
    Transfer {
        dest: Address,
        amount: Amount,
        param: Value,
    },
    CreateContract {
        addr: Address,
        amount: Amount,
        storage: Value,
        code_key: CodeKey,
        config: Value,
    },
    /// Operations that must run back to back.
    AtomicBundle {
        ops: Vec<Operation>,
    },
    /// Operations drained in their own pending queue before the enclosing
    /// queue resumes.
    ContextBundle {
        ops: Vec<Operation>,
    },
    /// Operations (and all their descendants) limited to an address universe.
    Restricted {
        allow: Option<BTreeSet<Address>>,
        block: Option<BTreeSet<Address>>,
        ops: Vec<Operation>,
    },
    EndInteractions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Transfer,
    Create,
    Atomic,
    Context,
    Restricted,
    EndInteractions,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Transfer => "transfer",
            OpKind::Create => "create",
            OpKind::Atomic => "atomic",
            OpKind::Context => "context",
            OpKind::Restricted => "restricted",
            OpKind::EndInteractions => "end_interactions",
        }
    }

    pub fn is_wrapper(self) -> bool {
        matches!(self, OpKind::Atomic | OpKind::Context | OpKind::Restricted)
    }
}

impl Operation {
    /// Plain value transfer with the `default` entrypoint.
    pub fn transfer(dest: Address, amount: Amount) -> Self {
        Operation::Transfer {
            dest,
            amount,
            param: Value::default_call(),
        }
    }

    /// Entrypoint call carrying `amount`.
    pub fn call(dest: Address, amount: Amount, entrypoint: &str, args: Vec<Value>) -> Self {
        Operation::Transfer {
            dest,
            amount,
            param: Value::call(entrypoint, Value::pack_args(args)),
        }
    }

    pub fn allow(addrs: impl IntoIterator<Item = Address>, ops: Vec<Operation>) -> Self {
        Operation::Restricted {
            allow: Some(addrs.into_iter().collect()),
            block: None,
            ops,
        }
    }

    pub fn block(addrs: impl IntoIterator<Item = Address>, ops: Vec<Operation>) -> Self {
        Operation::Restricted {
            allow: None,
            block: Some(addrs.into_iter().collect()),
            ops,
        }
    }

    pub fn kind(&self) -> OpKind {
        match self {
            Operation::Transfer { .. } => OpKind::Transfer,
            Operation::CreateContract { .. } => OpKind::Create,
            Operation::AtomicBundle { .. } => OpKind::Atomic,
            Operation::ContextBundle { .. } => OpKind::Context,
            Operation::Restricted { .. } => OpKind::Restricted,
            Operation::EndInteractions => OpKind::EndInteractions,
        }
    }

    pub fn is_wrapper(&self) -> bool {
        self.kind().is_wrapper()
    }

    /// Destination of a transfer or address of a creation.
    pub fn target(&self) -> Option<&Address> {
        match self {
            Operation::Transfer { dest, .. } => Some(dest),
            Operation::CreateContract { addr, .. } => Some(addr),
            _ => None,
        }
    }

    pub fn amount(&self) -> Option<Amount> {
        match self {
            Operation::Transfer { amount, .. } | Operation::CreateContract { amount, .. } => {
                Some(*amount)
            }
            _ => None,
        }
    }

    /// Wrapped operations, empty for executable ones.
    pub fn children(&self) -> &[Operation] {
        match self {
            Operation::AtomicBundle { ops }
            | Operation::ContextBundle { ops }
            | Operation::Restricted { ops, .. } => ops,
            _ => &[],
        }
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, set: &BTreeSet<Address>) -> fmt::Result {
    f.write_str("[")?;
    for (i, a) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str("]")
}

fn write_ops(f: &mut fmt::Formatter<'_>, ops: &[Operation]) -> fmt::Result {
    f.write_str("{")?;
    for (i, op) in ops.iter().enumerate() {
        if i > 0 {
            f.write_str("; ")?;
        }
        write!(f, "{op}")?;
    }
    f.write_str("}")
}

/// Compact rendering used for queue states: `@vault.withdraw(5)`.
impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Transfer {
                dest,
                amount,
                param,
            } => {
                match param.as_call() {
                    Some((name, args)) => {
                        write!(f, "{dest}.{name}(")?;
                        for (i, a) in args.unpack_args().iter().enumerate() {
                            if i > 0 {
                                f.write_str(", ")?;
                            }
                            write!(f, "{a}")?;
                        }
                        f.write_str(")")?;
                    }
                    None => write!(f, "{dest}<{param}>")?,
                }
                if *amount != Amount::ZERO {
                    write!(f, " amount={amount}")?;
                }
                Ok(())
            }
            Operation::CreateContract {
                addr,
                amount,
                code_key,
                ..
            } => write!(f, "create {addr} code {code_key} amount={amount}"),
            Operation::AtomicBundle { ops } => {
                f.write_str("atomic")?;
                write_ops(f, ops)
            }
            Operation::ContextBundle { ops } => {
                f.write_str("context")?;
                write_ops(f, ops)
            }
            Operation::Restricted { allow, block, ops } => {
                if let Some(allow) = allow {
                    f.write_str("allow")?;
                    write_set(f, allow)?;
                }
                if let Some(block) = block {
                    f.write_str("block")?;
                    write_set(f, block)?;
                }
                write_ops(f, ops)
            }
            Operation::EndInteractions => f.write_str("end_interactions"),
        }
    }
}

/// Address-universe restriction inherited down a transaction tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RestrictionState {
    /// `None` is the full universe.
    pub allow: Option<BTreeSet<Address>>,
    pub block: BTreeSet<Address>,
}

impl RestrictionState {
    pub fn unrestricted() -> Self {
        Self::default()
    }

    pub fn is_unrestricted(&self) -> bool {
        self.allow.is_none() && self.block.is_empty()
    }

    /// Whether `dest` may be invoked under this state.
    pub fn admits(&self, dest: &Address) -> bool {
        !self.block.contains(dest) && self.allow.as_ref().is_none_or(|a| a.contains(dest))
    }
}

/// Per-operation context tracked by the scheduler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionContext {
    /// Emitter of the operation, the party debited by a transfer.
    pub sender: Address,
    /// External author of the whole transaction.
    pub source: Address,
    pub restrictions: RestrictionState,
    pub end_interactions_owner: Option<Address>,
}

impl ExecutionContext {
    pub fn root(author: Address) -> Self {
        Self {
            sender: author.clone(),
            source: author,
            restrictions: RestrictionState::unrestricted(),
            end_interactions_owner: None,
        }
    }

    /// Context for an operation emitted by `emitter` under this context.
    pub fn child(&self, emitter: Address) -> Self {
        Self {
            sender: emitter,
            ..self.clone()
        }
    }
}

/// An outgoing transfer that has been emitted but not yet executed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingTransfer {
    pub sender: Address,
    pub dest: Address,
    pub amount: Amount,
}

/// Read-only view of the transfers still waiting in the pending structure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueueSnapshot {
    pub transfers: Vec<PendingTransfer>,
}

impl QueueSnapshot {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn outgoing<'a>(
        &'a self,
        addr: &'a Address,
    ) -> impl Iterator<Item = &'a PendingTransfer> + 'a {
        self.transfers.iter().filter(move |t| &t.sender == addr)
    }
}
