use std::fmt;

use crate::features::Feature;
use crate::model::{Address, Amount, CodeKey, Operation, Value};
use crate::scheduler::{SchedulingStrategy, SignedTransaction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub decls: Vec<Decl>,
    pub transactions: Vec<TxSpec>,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Account {
        addr: Address,
        balance: u64,
    },
    Contract {
        addr: Address,
        code: CodeKey,
        config: Value,
        storage: Value,
        balance: u64,
        contextual: bool,
    },
    Strategy(SchedulingStrategy),
    Features(Vec<Feature>),
    Fuel(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxSpec {
    pub author: Address,
    pub ops: Vec<OpSpec>,
}

/// Operation as written, keeping the `call IDENT(args)` surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpSpec {
    Transfer {
        amount: u64,
        dest: Address,
        call: Option<(String, Vec<Value>)>,
    },
    Create {
        addr: Address,
        code: CodeKey,
        config: Value,
        storage: Value,
        balance: u64,
    },
    Atomic(Vec<OpSpec>),
    Context(Vec<OpSpec>),
    Allow(Vec<Address>, Vec<OpSpec>),
    Block(Vec<Address>, Vec<OpSpec>),
    EndInteractions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Lt,
    Gt,
}

impl Cmp {
    pub fn holds(self, actual: u64, expected: u64) -> bool {
        match self {
            Cmp::Eq => actual == expected,
            Cmp::Lt => actual < expected,
            Cmp::Gt => actual > expected,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Balance { addr: Address, cmp: Cmp, value: u64 },
    Storage { addr: Address, value: Value },
    Commit,
    Revert,
    Total(u64),
}

/// The expectation without its `expect` keyword: `balance @vault = 0`.
impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Balance { addr, cmp, value } => {
                write!(f, "balance {addr} {} {value}", cmp.symbol())
            }
            Expectation::Storage { addr, value } => write!(f, "storage {addr} = {value}"),
            Expectation::Commit => f.write_str("commit"),
            Expectation::Revert => f.write_str("revert"),
            Expectation::Total(n) => write!(f, "total = {n}"),
        }
    }
}

impl OpSpec {
    pub fn to_operation(&self) -> Operation {
        match self {
            OpSpec::Transfer { amount, dest, call } => {
                let amount = Amount::new(*amount);
                match call {
                    None => Operation::transfer(dest.clone(), amount),
                    Some((entry, args)) => {
                        Operation::call(dest.clone(), amount, entry, args.clone())
                    }
                }
            }
            OpSpec::Create {
                addr,
                code,
                config,
                storage,
                balance,
            } => Operation::CreateContract {
                addr: addr.clone(),
                amount: Amount::new(*balance),
                storage: storage.clone(),
                code_key: code.clone(),
                config: config.clone(),
            },
            OpSpec::Atomic(ops) => Operation::AtomicBundle { ops: lower(ops) },
            OpSpec::Context(ops) => Operation::ContextBundle { ops: lower(ops) },
            OpSpec::Allow(addrs, ops) => Operation::allow(addrs.iter().cloned(), lower(ops)),
            OpSpec::Block(addrs, ops) => Operation::block(addrs.iter().cloned(), lower(ops)),
            OpSpec::EndInteractions => Operation::EndInteractions,
        }
    }

    /// Surface form of an operation. Transfers whose parameter is not an
    /// entrypoint call have no surface form.
    pub fn from_operation(op: &Operation) -> Option<OpSpec> {
        let lift = |ops: &[Operation]| {
            ops.iter()
                .map(OpSpec::from_operation)
                .collect::<Option<Vec<_>>>()
        };
        Some(match op {
            Operation::Transfer {
                dest,
                amount,
                param,
            } => {
                let (entry, args) = param.as_call()?;
                let call = if entry == "default" && args == &Value::Unit {
                    None
                } else {
                    Some((entry.to_string(), args.unpack_args()))
                };
                OpSpec::Transfer {
                    amount: amount.mutez(),
                    dest: dest.clone(),
                    call,
                }
            }
            Operation::CreateContract {
                addr,
                amount,
                storage,
                code_key,
                config,
            } => OpSpec::Create {
                addr: addr.clone(),
                code: code_key.clone(),
                config: config.clone(),
                storage: storage.clone(),
                balance: amount.mutez(),
            },
            Operation::AtomicBundle { ops } => OpSpec::Atomic(lift(ops)?),
            Operation::ContextBundle { ops } => OpSpec::Context(lift(ops)?),
            Operation::Restricted { allow, block, ops } => match (allow, block) {
                (Some(a), None) => OpSpec::Allow(a.iter().cloned().collect(), lift(ops)?),
                (None, Some(b)) => OpSpec::Block(b.iter().cloned().collect(), lift(ops)?),
                (None, None) => OpSpec::Block(vec![], lift(ops)?),
                (Some(a), Some(b)) => OpSpec::Allow(
                    a.iter().cloned().collect(),
                    vec![OpSpec::Block(b.iter().cloned().collect(), lift(ops)?)],
                ),
            },
            Operation::EndInteractions => OpSpec::EndInteractions,
        })
    }
}

fn lower(ops: &[OpSpec]) -> Vec<Operation> {
    ops.iter().map(OpSpec::to_operation).collect()
}

impl TxSpec {
    pub fn to_transaction(&self) -> SignedTransaction {
        SignedTransaction::new(self.author.clone(), lower(&self.ops))
    }
}
