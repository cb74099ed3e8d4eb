use super::env::Environment;
use super::operation::QueueSnapshot;
use super::primitives::{Address, Amount, Timestamp};
use super::value::Value;
use crate::executor::{self, ExecError};
use crate::features::FeatureSet;

/// Everything a contract body may observe about the chain during one call.
///
/// Bodies never see the environment directly; `view` and `pending_balance`
/// are the only reads of foreign state and each is gated by its feature.
#[derive(Debug, Clone, Copy)]
pub struct CallContext<'a> {
    pub self_addr: &'a Address,
    pub sender: &'a Address,
    pub source: &'a Address,
    /// Amount carried by this call.
    pub amount: Amount,
    /// Own balance after the incoming amount was credited.
    pub self_balance: Amount,
    pub level: Timestamp,
    pub features: FeatureSet,
    /// Constructor-captured constants of the called contract.
    pub config: &'a Value,
    pub(crate) env: &'a Environment,
    pub(crate) pending: &'a QueueSnapshot,
}

impl<'a> CallContext<'a> {
    /// Synchronous read of another contract's storage.
    pub fn view(&self, addr: &Address) -> Result<Value, ExecError> {
        executor::view_storage(self.env, addr, &self.features)
    }

    /// Balance of `addr` minus its emitted-but-unexecuted outgoing transfers.
    pub fn pending_balance(&self, addr: &Address) -> Result<i128, ExecError> {
        executor::pending_balance(self.env, addr, self.pending, &self.features)
    }

    /// Builds a context over a detached environment, for driving bodies
    /// outside the executor.
    #[allow(clippy::too_many_arguments)]
    pub fn detached(
        self_addr: &'a Address,
        sender: &'a Address,
        source: &'a Address,
        amount: Amount,
        self_balance: Amount,
        level: Timestamp,
        features: FeatureSet,
        config: &'a Value,
        env: &'a Environment,
        pending: &'a QueueSnapshot,
    ) -> Self {
        Self {
            self_addr,
            sender,
            source,
            amount,
            self_balance,
            level,
            features,
            config,
            env,
            pending,
        }
    }
}
