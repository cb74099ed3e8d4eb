//! Catalog of contract bodies, keyed by code key.
//!
//! Bodies are plain host functions. They read the chain only through the
//! [`CallContext`] they are handed and express every effect as returned
//! [`Operation`]s plus a new storage value.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::model::{
    value_typecheck, Amount, CallContext, CodeKey, Contract, Operation, StorageTypeError, TypeTag,
    Value,
};

pub mod standard;

/// Successful body result: emitted operations and the new storage.
pub type BodyOutput = (Vec<Operation>, Value);

/// Signature of a contract body. `Err` carries the contract's failure message.
pub type BodyFn =
    dyn Fn(&CallContext<'_>, &Value, &Value) -> Result<BodyOutput, String> + Send + Sync;

#[derive(Clone)]
pub struct ContractDef {
    pub code_key: CodeKey,
    pub param_type: TypeTag,
    pub storage_type: TypeTag,
    pub config_type: TypeTag,
    body: Arc<BodyFn>,
}

impl ContractDef {
    pub fn new<F>(
        code_key: impl Into<CodeKey>,
        param_type: TypeTag,
        storage_type: TypeTag,
        config_type: TypeTag,
        body: F,
    ) -> Self
    where
        F: Fn(&CallContext<'_>, &Value, &Value) -> Result<BodyOutput, String>
            + Send
            + Sync
            + 'static,
    {
        Self {
            code_key: code_key.into(),
            param_type,
            storage_type,
            config_type,
            body: Arc::new(body),
        }
    }

    pub fn run(
        &self,
        ctx: &CallContext<'_>,
        param: &Value,
        storage: &Value,
    ) -> Result<BodyOutput, String> {
        (self.body)(ctx, param, storage)
    }
}

impl fmt::Debug for ContractDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContractDef")
            .field("code_key", &self.code_key)
            .field("param_type", &self.param_type)
            .field("storage_type", &self.storage_type)
            .field("config_type", &self.config_type)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("code key {0} is already registered")]
    Duplicate(CodeKey),
    #[error("unknown code key {0}")]
    UnknownCodeKey(CodeKey),
    #[error(transparent)]
    StorageType(#[from] StorageTypeError),
    #[error("config {config} of {code_key} does not inhabit {expected}")]
    ConfigType {
        code_key: CodeKey,
        config: Value,
        expected: TypeTag,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    defs: BTreeMap<CodeKey, ContractDef>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every contract in [`standard`].
    pub fn standard() -> Self {
        let mut reg = Self::new();
        for def in standard::all() {
            reg.register(def).expect("standard code keys are distinct");
        }
        reg
    }

    pub fn register(&mut self, def: ContractDef) -> Result<(), RegistryError> {
        if self.defs.contains_key(&def.code_key) {
            return Err(RegistryError::Duplicate(def.code_key));
        }
        self.defs.insert(def.code_key.clone(), def);
        Ok(())
    }

    pub fn get(&self, key: &CodeKey) -> Option<&ContractDef> {
        self.defs.get(key)
    }

    pub fn contains(&self, key: &CodeKey) -> bool {
        self.defs.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &CodeKey> {
        self.defs.keys()
    }

    pub fn instantiate(
        &self,
        code_key: &CodeKey,
        config: Value,
        storage: Value,
        balance: Amount,
    ) -> Result<Contract, RegistryError> {
        let def = self
            .get(code_key)
            .ok_or_else(|| RegistryError::UnknownCodeKey(code_key.clone()))?;
        if !value_typecheck(&config, &def.config_type) {
            return Err(RegistryError::ConfigType {
                code_key: code_key.clone(),
                config,
                expected: def.config_type.clone(),
            });
        }
        Ok(Contract::new(
            code_key.clone(),
            def.param_type.clone(),
            def.storage_type.clone(),
            config,
            storage,
            balance,
        )?)
    }
}
