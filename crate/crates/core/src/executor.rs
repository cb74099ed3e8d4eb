//! Single-operation execution: one operation, one context, one environment.
//!
//! The executor never orders anything. It checks preconditions, moves funds
//! for the operation it was handed, runs the callee body and reports the
//! emitted operations verbatim together with the updated environment.

use std::fmt;
use std::sync::Arc;

use crate::features::{check_allowed, Feature, FeatureSet};
use crate::model::{
    value_typecheck, Address, Amount, CallContext, Environment, ExecutionContext, Operation,
    QueueSnapshot, Timestamp, Value,
};
use crate::registry::{Registry, RegistryError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    UnknownAddress,
    TypeMismatch,
    InsufficientBalance,
    AddressOccupied,
    ContractFailure(String),
    RestrictionViolation,
    EndInteractionsViolation,
    UnknownCodeKey,
    FeatureDisabled(Feature),
    FuelExhausted,
    Overflow,
    /// A wrapper reached the executor instead of being expanded.
    NotExecutable,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::UnknownAddress => f.write_str("unknown address"),
            ErrorKind::TypeMismatch => f.write_str("type mismatch"),
            ErrorKind::InsufficientBalance => f.write_str("insufficient balance"),
            ErrorKind::AddressOccupied => f.write_str("address occupied"),
            ErrorKind::ContractFailure(_) => f.write_str("contract failure"),
            ErrorKind::RestrictionViolation => f.write_str("restriction violation"),
            ErrorKind::EndInteractionsViolation => f.write_str("end-of-interactions violation"),
            ErrorKind::UnknownCodeKey => f.write_str("unknown code key"),
            ErrorKind::FeatureDisabled(feat) => write!(f, "feature disabled: {feat}"),
            ErrorKind::FuelExhausted => f.write_str("fuel exhausted"),
            ErrorKind::Overflow => f.write_str("amount overflow"),
            ErrorKind::NotExecutable => f.write_str("not executable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct ExecError {
    pub kind: ErrorKind,
    pub detail: String,
}

impl ExecError {
    pub fn new(kind: ErrorKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
        }
    }

    fn unknown(addr: &Address) -> Self {
        Self::new(
            ErrorKind::UnknownAddress,
            format!("{addr} is not in the environment"),
        )
    }

    fn feature_off(feature: Feature) -> Self {
        Self::new(
            ErrorKind::FeatureDisabled(feature),
            format!("{feature} is not enabled"),
        )
    }
}

impl From<RegistryError> for ExecError {
    fn from(e: RegistryError) -> Self {
        let kind = match &e {
            RegistryError::UnknownCodeKey(_) => ErrorKind::UnknownCodeKey,
            RegistryError::Duplicate(_) => ErrorKind::UnknownCodeKey,
            RegistryError::StorageType(_) | RegistryError::ConfigType { .. } => {
                ErrorKind::TypeMismatch
            }
        };
        Self::new(kind, e.to_string())
    }
}

/// Successful execution of one operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Executed {
    /// Sender of the emitted operations.
    pub emitter: Address,
    /// Operations exactly as returned by the body.
    pub emitted: Vec<Operation>,
    pub env_after: Environment,
}

pub type ExecResult = Result<Executed, ExecError>;

/// Everything besides the operation and its context that one execution reads.
#[derive(Debug, Clone, Copy)]
pub struct ExecInput<'a> {
    pub env: &'a Environment,
    pub features: &'a FeatureSet,
    pub pending: &'a QueueSnapshot,
    pub level: Timestamp,
}

/// An interpretation of executable operations.
pub trait Executor {
    fn execute(&self, ectx: &ExecutionContext, op: &Operation, input: ExecInput<'_>) -> ExecResult;
}

/// The reference executor, backed by a contract registry.
#[derive(Debug, Clone)]
pub struct StandardExecutor {
    registry: Arc<Registry>,
}

impl StandardExecutor {
    pub fn new(registry: Arc<Registry>) -> Self {
        Self { registry }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }
}

impl Default for StandardExecutor {
    fn default() -> Self {
        Self::new(Arc::new(Registry::standard()))
    }
}

impl Executor for StandardExecutor {
    fn execute(&self, ectx: &ExecutionContext, op: &Operation, input: ExecInput<'_>) -> ExecResult {
        execute_operation(&self.registry, ectx, op, input)
    }
}

/// Executes `op` from `ectx.sender` against `input.env`.
pub fn execute_operation(
    registry: &Registry,
    ectx: &ExecutionContext,
    op: &Operation,
    input: ExecInput<'_>,
) -> ExecResult {
    match op {
        Operation::Transfer {
            dest,
            amount,
            param,
        } => execute_transfer(registry, ectx, dest, *amount, param, input),
        Operation::CreateContract {
            addr,
            amount,
            storage,
            code_key,
            config,
        } => {
            let env = input.env;
            if ectx.end_interactions_owner.is_some() {
                return Err(ExecError::new(
                    ErrorKind::EndInteractionsViolation,
                    format!("cannot create {addr} after end_interactions"),
                ));
            }
            if env.contains(addr) {
                return Err(ExecError::new(
                    ErrorKind::AddressOccupied,
                    format!("{addr} is already in use"),
                ));
            }
            let creator = env
                .get(&ectx.sender)
                .ok_or_else(|| ExecError::unknown(&ectx.sender))?;
            let remaining = creator.balance().checked_sub(*amount).map_err(|_| {
                ExecError::new(
                    ErrorKind::InsufficientBalance,
                    format!("{} holds {} < {amount}", ectx.sender, creator.balance()),
                )
            })?;
            let contract =
                registry.instantiate(code_key, config.clone(), storage.clone(), *amount)?;
            let env_after = env
                .update(ectx.sender.clone(), creator.with_balance(remaining))
                .update(addr.clone(), contract);
            Ok(Executed {
                emitter: ectx.sender.clone(),
                emitted: vec![],
                env_after,
            })
        }
        Operation::EndInteractions => {
            if !input.features.end_interactions {
                return Err(ExecError::feature_off(Feature::EndInteractions));
            }
            if let Some(owner) = &ectx.end_interactions_owner {
                if owner != &ectx.sender {
                    return Err(ExecError::new(
                        ErrorKind::EndInteractionsViolation,
                        format!("end_interactions already owned by {owner}"),
                    ));
                }
            }
            Ok(Executed {
                emitter: ectx.sender.clone(),
                emitted: vec![],
                env_after: input.env.clone(),
            })
        }
        wrapper => Err(ExecError::new(
            ErrorKind::NotExecutable,
            format!(
                "{} must be expanded by the scheduler",
                wrapper.kind().name()
            ),
        )),
    }
}

fn execute_transfer(
    registry: &Registry,
    ectx: &ExecutionContext,
    dest: &Address,
    amount: Amount,
    param: &Value,
    input: ExecInput<'_>,
) -> ExecResult {
    let env = input.env;
    let sender = &ectx.sender;
    if !ectx.restrictions.admits(dest) {
        return Err(ExecError::new(
            ErrorKind::RestrictionViolation,
            format!("{dest} is outside the permitted address universe"),
        ));
    }
    if !check_allowed(
        &ectx.restrictions,
        dest,
        ectx.end_interactions_owner.as_ref(),
        sender,
    ) {
        return Err(ExecError::new(
            ErrorKind::EndInteractionsViolation,
            format!("only self-calls are allowed, got {sender} -> {dest}"),
        ));
    }
    let from = env.get(sender).ok_or_else(|| ExecError::unknown(sender))?;
    let debited = from.balance().checked_sub(amount).map_err(|_| {
        ExecError::new(
            ErrorKind::InsufficientBalance,
            format!("{sender} holds {} < {amount}", from.balance()),
        )
    })?;
    if !env.contains(dest) {
        return Err(ExecError::unknown(dest));
    }
    let env = env.update(sender.clone(), from.with_balance(debited));
    let to = env.get(dest).expect("destination checked above");
    if !value_typecheck(param, to.param_type()) {
        return Err(ExecError::new(
            ErrorKind::TypeMismatch,
            format!("{param} does not inhabit {} of {dest}", to.param_type()),
        ));
    }
    let credited = to.balance().checked_add(amount).map_err(|_| {
        ExecError::new(ErrorKind::Overflow, format!("crediting {amount} to {dest}"))
    })?;
    let to = to.with_balance(credited);
    let env = env.update(dest.clone(), to.clone());

    let def = registry.get(to.code_key()).ok_or_else(|| {
        ExecError::new(
            ErrorKind::UnknownCodeKey,
            format!("{} of {dest}", to.code_key()),
        )
    })?;
    let ctx = CallContext {
        self_addr: dest,
        sender,
        source: &ectx.source,
        amount,
        self_balance: credited,
        level: input.level,
        features: *input.features,
        config: to.config(),
        env: &env,
        pending: input.pending,
    };
    let (emitted, new_storage) = def.run(&ctx, param, to.storage()).map_err(|msg| {
        ExecError::new(
            ErrorKind::ContractFailure(msg.clone()),
            format!("{dest}: {msg}"),
        )
    })?;
    let committed = to
        .with_storage(new_storage)
        .map_err(|e| ExecError::new(ErrorKind::TypeMismatch, format!("{dest} returned {e}")))?;
    let env_after = env.update(dest.clone(), committed);
    Ok(Executed {
        emitter: dest.clone(),
        emitted,
        env_after,
    })
}

/// Current storage of `addr`. Requires the views feature.
pub fn view_storage(
    env: &Environment,
    addr: &Address,
    features: &FeatureSet,
) -> Result<Value, ExecError> {
    if !features.views {
        return Err(ExecError::feature_off(Feature::Views));
    }
    env.get(addr)
        .map(|c| c.storage().clone())
        .ok_or_else(|| ExecError::unknown(addr))
}

/// Balance of `addr` minus the amounts of pending transfers it emitted.
/// Pending incoming transfers are not counted.
pub fn pending_balance(
    env: &Environment,
    addr: &Address,
    pending: &QueueSnapshot,
    features: &FeatureSet,
) -> Result<i128, ExecError> {
    if !features.pending_balance {
        return Err(ExecError::feature_off(Feature::PendingBalance));
    }
    let balance = env
        .balance_of(addr)
        .ok_or_else(|| ExecError::unknown(addr))?;
    let outgoing: i128 = pending
        .outgoing(addr)
        .map(|t| i128::from(t.amount.mutez()))
        .sum();
    Ok(i128::from(balance.mutez()) - outgoing)
}
