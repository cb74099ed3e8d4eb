use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque account identifier.
///
/// Addresses are compared by exact string equality. The accepted alphabet
/// (ASCII alphanumerics plus `_`, `-` and `.`) is the one the scenario
/// language can spell after `@`, so every address has a printable form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Address(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid address {0:?}: expected a non-empty token of [A-Za-z0-9_.-]")]
pub struct InvalidAddress(pub String);

impl Address {
    pub fn new(token: impl Into<String>) -> Result<Self, InvalidAddress> {
        let token = token.into();
        if Self::is_valid(&token) {
            Ok(Self(token))
        } else {
            Err(InvalidAddress(token))
        }
    }

    pub fn is_valid(token: &str) -> bool {
        !token.is_empty() && token.chars().all(is_address_char)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_address_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

impl TryFrom<String> for Address {
    type Error = InvalidAddress;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl TryFrom<&str> for Address {
    type Error = InvalidAddress;
    fn try_from(value: &str) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Address> for String {
    fn from(value: Address) -> Self {
        value.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ArithmeticError {
    #[error("amount overflow")]
    Overflow,
    #[error("amount underflow")]
    Underflow,
}

/// Quantity of currency in mutez. All arithmetic is checked.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn new(mutez: u64) -> Self {
        Self(mutez)
    }

    pub const fn mutez(self) -> u64 {
        self.0
    }

    pub fn checked_add(self, other: Amount) -> Result<Amount, ArithmeticError> {
        self.0
            .checked_add(other.0)
            .map(Amount)
            .ok_or(ArithmeticError::Overflow)
    }

    pub fn checked_sub(self, other: Amount) -> Result<Amount, ArithmeticError> {
        self.0
            .checked_sub(other.0)
            .map(Amount)
            .ok_or(ArithmeticError::Underflow)
    }
}

impl From<u64> for Amount {
    fn from(value: u64) -> Self {
        Self(value)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Logical clock; one tick per transaction, reverted ones included.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(u64);

impl Timestamp {
    pub const fn new(tick: u64) -> Self {
        Self(tick)
    }

    pub const fn tick(self) -> u64 {
        self.0
    }

    pub fn next(self) -> Self {
        Self(self.0 + 1)
    }

    pub fn advance(self, ticks: u64) -> Self {
        Self(self.0 + ticks)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Name under which a contract body is registered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CodeKey(String);

impl CodeKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<String> for CodeKey {
    fn from(value: String) -> Self {
        Self(value)
    }
}

impl From<&str> for CodeKey {
    fn from(value: &str) -> Self {
        Self::new(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn address_rejects_whitespace_and_empty() {
        assert!(Address::new("vault").is_ok());
        assert!(Address::new("").is_err());
        assert!(Address::new("a b").is_err());
        assert!(Address::new("tab\t").is_err());
        assert_eq!(Address::new("bad").unwrap().to_string(), "@bad");
    }

    #[test]
    fn amount_arithmetic_is_checked() {
        assert_eq!(
            Amount::new(u64::MAX).checked_add(Amount::new(1)),
            Err(ArithmeticError::Overflow)
        );
        assert_eq!(
            Amount::ZERO.checked_sub(Amount::new(1)),
            Err(ArithmeticError::Underflow)
        );
        assert_eq!(
            Amount::new(15).checked_sub(Amount::new(5)),
            Ok(Amount::new(10))
        );
    }

    proptest! {
        #[test]
        fn add_then_sub_is_identity_or_errors(a in any::<u64>(), b in any::<u64>()) {
            let (a, b) = (Amount::new(a), Amount::new(b));
            match a.checked_add(b) {
                Ok(sum) => prop_assert_eq!(sum.checked_sub(b), Ok(a)),
                Err(e) => prop_assert_eq!(e, ArithmeticError::Overflow),
            }
        }
    }
}
