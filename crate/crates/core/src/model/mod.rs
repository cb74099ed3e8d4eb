//! Domain types shared by every layer of the simulator.

mod call;
mod contract;
mod env;
mod operation;
mod primitives;
mod value;

pub use call::CallContext;
pub use contract::{Contract, StorageTypeError};
pub use env::Environment;
pub use operation::{
    ExecutionContext, OpKind, Operation, PendingTransfer, QueueSnapshot, RestrictionState,
};
pub use primitives::{Address, Amount, ArithmeticError, CodeKey, InvalidAddress, Timestamp};
pub use value::{value_typecheck, TypeTag, Value};

pub(crate) use primitives::is_address_char;
pub(crate) use value::write_string_literal;
