use super::primitives::{Amount, CodeKey};
use super::value::{value_typecheck, TypeTag, Value};

/// An installed contract: mutable storage and balance around an immutable
/// code reference, type signature and constructor configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    param_type: TypeTag,
    storage_type: TypeTag,
    storage: Value,
    balance: Amount,
    code_key: CodeKey,
    config: Value,
    contextual: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("storage {storage} does not inhabit {expected}")]
pub struct StorageTypeError {
    pub storage: Value,
    pub expected: TypeTag,
}

impl Contract {
    pub fn new(
        code_key: CodeKey,
        param_type: TypeTag,
        storage_type: TypeTag,
        config: Value,
        storage: Value,
        balance: Amount,
    ) -> Result<Self, StorageTypeError> {
        if !value_typecheck(&storage, &storage_type) {
            return Err(StorageTypeError {
                storage,
                expected: storage_type,
            });
        }
        Ok(Self {
            param_type,
            storage_type,
            storage,
            balance,
            code_key,
            config,
            contextual: false,
        })
    }

    pub fn param_type(&self) -> &TypeTag {
        &self.param_type
    }

    pub fn storage_type(&self) -> &TypeTag {
        &self.storage_type
    }

    pub fn storage(&self) -> &Value {
        &self.storage
    }

    pub fn balance(&self) -> Amount {
        self.balance
    }

    pub fn code_key(&self) -> &CodeKey {
        &self.code_key
    }

    pub fn config(&self) -> &Value {
        &self.config
    }

    /// Callee-contextual contracts run their emissions in a fresh context.
    pub fn is_contextual(&self) -> bool {
        self.contextual
    }

    pub fn with_contextual(mut self, contextual: bool) -> Self {
        self.contextual = contextual;
        self
    }

    pub fn with_balance(&self, balance: Amount) -> Self {
        Self {
            balance,
            ..self.clone()
        }
    }

    pub fn with_storage(&self, storage: Value) -> Result<Self, StorageTypeError> {
        if !value_typecheck(&storage, &self.storage_type) {
            return Err(StorageTypeError {
                storage,
                expected: self.storage_type.clone(),
            });
        }
        Ok(Self {
            storage,
            ..self.clone()
        })
    }

    /// True when code, types and configuration are the same.
    pub fn same_code(&self, other: &Contract) -> bool {
        self.code_key == other.code_key
            && self.param_type == other.param_type
            && self.storage_type == other.storage_type
            && self.config == other.config
            && self.contextual == other.contextual
    }
}
