//! Deterministic simulator of multi-contract execution.
//!
//! Contract bodies are pure functions that return the operations they want
//! performed. A scheduler keeps those operations pending and decides their
//! order, and an executor applies one at a time against a persistent
//! environment.
//!
//! ```
//! use msc::prelude::*;
//!
//! let text = r#"
//! scenario "vault-bfs-attack"
//! account @owner balance 100
//! contract @vault code bank config (pair 9 @bad) storage unit balance 15
//! contract @bad code bad config @vault storage unit balance 0
//! strategy bfs
//! transaction from @owner { transfer 0 to @bad call rob(3, 5) }
//! expect commit
//! expect balance @vault = 0
//! expect balance @bad = 15
//! "#;
//! let scenario = parse_scenario(text).unwrap();
//! let outcome = run_scenario(&scenario, &Overrides::default()).unwrap();
//! assert!(outcome.all_passed());
//! ```

pub mod cli;
pub mod executor;
pub mod features;
pub mod harness;
pub mod model;
pub mod registry;
pub mod scenario;
pub mod scheduler;
pub mod trace;

/// The names most programs need.
pub mod prelude {
    pub use crate::executor::{ErrorKind, ExecError, Executor, StandardExecutor};
    pub use crate::features::{Feature, FeatureSet};
    pub use crate::model::{
        Address, Amount, Contract, Environment, Operation, Timestamp, TypeTag, Value,
    };
    pub use crate::registry::Registry;
    pub use crate::scenario::{parse_scenario, print_scenario, run_scenario, Overrides, Scenario};
    pub use crate::scheduler::{
        run_block, run_transaction, SchedulerConfig, SchedulingStrategy, SignedTransaction,
        TxOutcome,
    };
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/scheduling.md")]
    mod scheduling {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/fuzzing.md")]
    mod fuzzing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
