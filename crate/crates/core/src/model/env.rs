use std::collections::BTreeMap;
use std::sync::Arc;

use super::contract::Contract;
use super::primitives::{Address, Amount, ArithmeticError};

/// The observable chain state: a partial map from addresses to contracts.
///
/// Environments are persistent. [`Environment::update`] returns a new value
/// and leaves the receiver untouched, so a snapshot taken before a
/// transaction is the revert target.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    accounts: Arc<BTreeMap<Address, Arc<Contract>>>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, addr: &Address) -> Option<&Contract> {
        self.accounts.get(addr).map(Arc::as_ref)
    }

    pub fn contains(&self, addr: &Address) -> bool {
        self.accounts.contains_key(addr)
    }

    pub fn balance_of(&self, addr: &Address) -> Option<Amount> {
        self.get(addr).map(Contract::balance)
    }

    #[must_use]
    pub fn update(&self, addr: Address, contract: Contract) -> Environment {
        let mut accounts = (*self.accounts).clone();
        accounts.insert(addr, Arc::new(contract));
        Environment {
            accounts: Arc::new(accounts),
        }
    }

    pub fn total_balance(&self) -> Result<Amount, ArithmeticError> {
        self.accounts
            .values()
            .try_fold(Amount::ZERO, |acc, c| acc.checked_add(c.balance()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &Contract)> {
        self.accounts.iter().map(|(a, c)| (a, c.as_ref()))
    }

    pub fn addresses(&self) -> impl Iterator<Item = &Address> {
        self.accounts.keys()
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }
}

impl FromIterator<(Address, Contract)> for Environment {
    fn from_iter<T: IntoIterator<Item = (Address, Contract)>>(iter: T) -> Self {
        Environment {
            accounts: Arc::new(iter.into_iter().map(|(a, c)| (a, Arc::new(c))).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CodeKey, TypeTag, Value};

    fn account(balance: u64) -> Contract {
        Contract::new(
            CodeKey::new("receiver"),
            TypeTag::Unit,
            TypeTag::Unit,
            Value::Unit,
            Value::Unit,
            Amount::new(balance),
        )
        .unwrap()
    }

    fn addr(s: &str) -> Address {
        Address::new(s).unwrap()
    }

    #[test]
    fn map_frame_and_persistence_laws() {
        let env = Environment::new().update(addr("a"), account(1));
        let env2 = env.update(addr("b"), account(2));
        let env3 = env2.update(addr("a"), account(7));
        assert_eq!(env3.balance_of(&addr("a")), Some(Amount::new(7)));
        assert_eq!(env3.balance_of(&addr("b")), Some(Amount::new(2)));
        assert_eq!(env2.balance_of(&addr("a")), Some(Amount::new(1)));
        assert_eq!(env.get(&addr("b")), None);
        assert!(!env.contains(&addr("b")));
    }

    #[test]
    fn total_balance_sums_and_detects_overflow() {
        let env: Environment = [("vault", 15), ("bad", 0), ("alice", 100)]
            .into_iter()
            .map(|(a, b)| (addr(a), account(b)))
            .collect();
        assert_eq!(env.total_balance(), Ok(Amount::new(115)));
        assert_eq!(Environment::new().total_balance(), Ok(Amount::ZERO));
        let big = env.update(addr("x"), account(u64::MAX));
        assert_eq!(big.total_balance(), Err(ArithmeticError::Overflow));
    }
}
