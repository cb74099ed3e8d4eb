//! The standard cast of contracts: a threshold vault and its fixed variant,
//! a well-behaved client, the vault robber, plain receivers, forwarders, a
//! balance observer, and the seed-driven demonic contract.
//!
//! Every contract accepts `default()` and `receive()` as plain deposits.

use crate::model::{Address, Amount, Operation, TypeTag, Value};

use super::{BodyOutput, ContractDef};

type BodyResult = Result<BodyOutput, String>;

pub const BANK: &str = "bank";
pub const FIXED_BANK: &str = "fixed_bank";
pub const GOOD_CLIENT: &str = "good_client";
pub const BAD: &str = "bad";
pub const RECEIVER: &str = "receiver";
pub const FORWARDER: &str = "forwarder";
pub const OBSERVER: &str = "observer";
pub const DEMONIC: &str = "demonic";

pub fn all() -> Vec<ContractDef> {
    vec![
        bank(),
        fixed_bank(),
        good_client(),
        bad(),
        receiver(),
        forwarder(),
        observer(),
        demonic(),
    ]
}

fn entrypoints(extra: Vec<(&str, TypeTag)>) -> TypeTag {
    let mut entries = vec![("default", TypeTag::Unit), ("receive", TypeTag::Unit)];
    entries.extend(extra);
    TypeTag::entrypoints(entries)
}

fn split_call(param: &Value) -> Result<(&str, &Value), String> {
    param
        .as_call()
        .ok_or_else(|| format!("malformed parameter {param}"))
}

fn is_deposit(entry: &str) -> bool {
    matches!(entry, "default" | "receive")
}

fn unknown_entrypoint(entry: &str) -> String {
    format!("unknown entrypoint {entry}")
}

fn nat_arg(v: &Value) -> Result<u64, String> {
    v.as_nat().ok_or_else(|| format!("expected nat, got {v}"))
}

fn address_arg(v: &Value) -> Result<&Address, String> {
    v.as_address()
        .ok_or_else(|| format!("expected address, got {v}"))
}

fn pair_arg(v: &Value) -> Result<(&Value, &Value), String> {
    v.as_pair().ok_or_else(|| format!("expected pair, got {v}"))
}

/// `(pair threshold owner)`.
fn bank_config(config: &Value) -> Result<(u64, &Address), String> {
    let (threshold, owner) = pair_arg(config)?;
    Ok((nat_arg(threshold)?, address_arg(owner)?))
}

fn payout(owner: &Address, amount: u64) -> Operation {
    Operation::call(owner.clone(), Amount::new(amount), "receive", vec![])
}

/// Threshold vault. `withdraw(ret)` pays `ret` to the owner as long as the
/// current balance minus `ret` stays strictly above the threshold. The check
/// reads the balance at call time, so payouts that were emitted but not yet
/// executed are invisible to it.
pub fn bank() -> ContractDef {
    ContractDef::new(
        BANK,
        entrypoints(vec![("deposit", TypeTag::Unit), ("withdraw", TypeTag::Nat)]),
        TypeTag::Unit,
        TypeTag::pair(TypeTag::Nat, TypeTag::Address),
        |ctx, param, storage| -> BodyResult {
            let (threshold, owner) = bank_config(ctx.config)?;
            match split_call(param)? {
                (e, _) if is_deposit(e) || e == "deposit" => Ok((vec![], storage.clone())),
                ("withdraw", ret) => {
                    let ret = nat_arg(ret)?;
                    if ctx.sender != owner {
                        return Err("not owner".into());
                    }
                    let remaining = i128::from(ctx.self_balance.mutez()) - i128::from(ret);
                    if remaining > i128::from(threshold) {
                        Ok((vec![payout(owner, ret)], storage.clone()))
                    } else {
                        Err("breaking invariant".into())
                    }
                }
                (e, _) => Err(unknown_entrypoint(e)),
            }
        },
    )
}

/// Vault that books every emitted payout as compromised balance until a
/// private `settle` self-call confirms the payout has been executed.
pub fn fixed_bank() -> ContractDef {
    ContractDef::new(
        FIXED_BANK,
        entrypoints(vec![
            ("deposit", TypeTag::Unit),
            ("withdraw", TypeTag::Nat),
            ("settle", TypeTag::Nat),
        ]),
        TypeTag::Mutez,
        TypeTag::pair(TypeTag::Nat, TypeTag::Address),
        |ctx, param, storage| -> BodyResult {
            let (threshold, owner) = bank_config(ctx.config)?;
            let compromised = storage
                .as_mutez()
                .ok_or_else(|| format!("malformed storage {storage}"))?;
            match split_call(param)? {
                (e, _) if is_deposit(e) || e == "deposit" => Ok((vec![], storage.clone())),
                ("withdraw", ret) => {
                    let ret = nat_arg(ret)?;
                    if ctx.sender != owner {
                        return Err("not owner".into());
                    }
                    let remaining = i128::from(ctx.self_balance.mutez())
                        - i128::from(compromised.mutez())
                        - i128::from(ret);
                    if remaining <= i128::from(threshold) {
                        return Err("breaking invariant".into());
                    }
                    let booked = compromised
                        .checked_add(Amount::new(ret))
                        .map_err(|e| e.to_string())?;
                    let settle = Operation::call(
                        ctx.self_addr.clone(),
                        Amount::ZERO,
                        "settle",
                        vec![Value::Nat(ret)],
                    );
                    Ok((vec![payout(owner, ret), settle], Value::Mutez(booked)))
                }
                ("settle", ret) => {
                    if ctx.sender != ctx.self_addr {
                        return Err("private entrypoint".into());
                    }
                    let left = compromised
                        .checked_sub(Amount::new(nat_arg(ret)?))
                        .map_err(|e| e.to_string())?;
                    Ok((vec![], Value::Mutez(left)))
                }
                (e, _) => Err(unknown_entrypoint(e)),
            }
        },
    )
}

/// `askMoney(m)` asks the configured bank for `m`.
pub fn good_client() -> ContractDef {
    ContractDef::new(
        GOOD_CLIENT,
        entrypoints(vec![("askMoney", TypeTag::Nat)]),
        TypeTag::Unit,
        TypeTag::Address,
        |ctx, param, storage| -> BodyResult {
            let bank = address_arg(ctx.config)?;
            match split_call(param)? {
                (e, _) if is_deposit(e) => Ok((vec![], storage.clone())),
                ("askMoney", m) => {
                    let m = nat_arg(m)?;
                    let op = Operation::call(
                        bank.clone(),
                        Amount::ZERO,
                        "withdraw",
                        vec![Value::Nat(m)],
                    );
                    Ok((vec![op], storage.clone()))
                }
                (e, _) => Err(unknown_entrypoint(e)),
            }
        },
    )
}

/// `rob(n, m)` emits `n` withdraw requests of `m` against the configured bank.
pub fn bad() -> ContractDef {
    ContractDef::new(
        BAD,
        entrypoints(vec![("rob", TypeTag::pair(TypeTag::Nat, TypeTag::Nat))]),
        TypeTag::Unit,
        TypeTag::Address,
        |ctx, param, storage| -> BodyResult {
            let bank = address_arg(ctx.config)?;
            match split_call(param)? {
                (e, _) if is_deposit(e) => Ok((vec![], storage.clone())),
                ("rob", args) => {
                    let (n, m) = pair_arg(args)?;
                    let (n, m) = (nat_arg(n)?, nat_arg(m)?);
                    let withdraw = Operation::call(
                        bank.clone(),
                        Amount::ZERO,
                        "withdraw",
                        vec![Value::Nat(m)],
                    );
                    let ops = (0..n).map(|_| withdraw.clone()).collect();
                    Ok((ops, storage.clone()))
                }
                (e, _) => Err(unknown_entrypoint(e)),
            }
        },
    )
}

/// Accepts any deposit and does nothing. Implicit accounts use this code.
pub fn receiver() -> ContractDef {
    ContractDef::new(
        RECEIVER,
        entrypoints(vec![]),
        TypeTag::Unit,
        TypeTag::Unit,
        |_ctx, param, storage| -> BodyResult {
            match split_call(param)? {
                (e, _) if is_deposit(e) => Ok((vec![], storage.clone())),
                (e, _) => Err(unknown_entrypoint(e)),
            }
        },
    )
}

/// `invoke(dest, amount)` sends one transfer out of the forwarder's own
/// balance; `fanout(dests, amount)` sends one to each destination in order.
pub fn forwarder() -> ContractDef {
    ContractDef::new(
        FORWARDER,
        entrypoints(vec![
            ("invoke", TypeTag::pair(TypeTag::Address, TypeTag::Nat)),
            (
                "fanout",
                TypeTag::pair(TypeTag::list(TypeTag::Address), TypeTag::Nat),
            ),
        ]),
        TypeTag::Unit,
        TypeTag::Unit,
        |_ctx, param, storage| -> BodyResult {
            match split_call(param)? {
                (e, _) if is_deposit(e) => Ok((vec![], storage.clone())),
                ("invoke", args) => {
                    let (dest, amount) = pair_arg(args)?;
                    let op = Operation::transfer(
                        address_arg(dest)?.clone(),
                        Amount::new(nat_arg(amount)?),
                    );
                    Ok((vec![op], storage.clone()))
                }
                ("fanout", args) => {
                    let (dests, amount) = pair_arg(args)?;
                    let amount = Amount::new(nat_arg(amount)?);
                    let dests = dests
                        .as_list()
                        .ok_or_else(|| format!("expected list, got {dests}"))?;
                    let ops = dests
                        .iter()
                        .map(|d| Ok(Operation::transfer(address_arg(d)?.clone(), amount)))
                        .collect::<Result<Vec<_>, String>>()?;
                    Ok((ops, storage.clone()))
                }
                (e, _) => Err(unknown_entrypoint(e)),
            }
        },
    )
}

/// `observe(a, b, total)` reads the pending-adjusted balances of `a` and `b`
/// and appends both to its storage. It fails unless their sum falls short of
/// `total`, the combined balance the pair actually holds, so a committed
/// observation records a mismatch.
pub fn observer() -> ContractDef {
    ContractDef::new(
        OBSERVER,
        entrypoints(vec![(
            "observe",
            TypeTag::pair(
                TypeTag::Address,
                TypeTag::pair(TypeTag::Address, TypeTag::Nat),
            ),
        )]),
        TypeTag::list(TypeTag::Int),
        TypeTag::Unit,
        |ctx, param, storage| -> BodyResult {
            match split_call(param)? {
                (e, _) if is_deposit(e) => Ok((vec![], storage.clone())),
                ("observe", args) => {
                    let (a, rest) = pair_arg(args)?;
                    let (b, total) = pair_arg(rest)?;
                    let (a, b, total) = (address_arg(a)?, address_arg(b)?, nat_arg(total)?);
                    let pa = ctx.pending_balance(a).map_err(|e| e.to_string())?;
                    let pb = ctx.pending_balance(b).map_err(|e| e.to_string())?;
                    if pa + pb >= i128::from(total) {
                        return Err(format!("no mismatch: {pa} + {pb} >= {total}"));
                    }
                    let to_int = |x: i128| {
                        i64::try_from(x)
                            .map(Value::Int)
                            .map_err(|_| "observed balance out of range".to_string())
                    };
                    let mut seen = storage.as_list().map(<[Value]>::to_vec).unwrap_or_default();
                    seen.push(to_int(pa)?);
                    seen.push(to_int(pb)?);
                    Ok((vec![], Value::List(seen)))
                }
                (e, _) => Err(unknown_entrypoint(e)),
            }
        },
    )
}

/// Behaviors a demonic contract can be frozen into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DemonicBehavior {
    /// Accept and do nothing.
    Accept,
    /// Send `count` transfers of `amount` to the transaction source.
    EmitTransfers,
    /// Send `amount` straight back to the caller.
    Reenter,
    /// Install a fresh receiver funded with `amount`.
    Create,
    /// Fail on calls selected by a hash of the seed and call counter.
    FailBySeed,
}

impl DemonicBehavior {
    pub const ALL: [DemonicBehavior; 5] = [
        DemonicBehavior::Accept,
        DemonicBehavior::EmitTransfers,
        DemonicBehavior::Reenter,
        DemonicBehavior::Create,
        DemonicBehavior::FailBySeed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DemonicBehavior::Accept => "accept",
            DemonicBehavior::EmitTransfers => "emit",
            DemonicBehavior::Reenter => "reenter",
            DemonicBehavior::Create => "create",
            DemonicBehavior::FailBySeed => "fail",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }
}

/// Configuration `(pair seed (pair behavior (pair count amount)))` of a
/// demonic contract.
pub fn demonic_config(seed: u64, behavior: DemonicBehavior, count: u64, amount: u64) -> Value {
    Value::pair(
        Value::Nat(seed),
        Value::pair(
            Value::string(behavior.name()),
            Value::pair(Value::Nat(count), Value::Nat(amount)),
        ),
    )
}

fn parse_demonic_config(config: &Value) -> Result<(u64, DemonicBehavior, u64, u64), String> {
    let (seed, rest) = pair_arg(config)?;
    let (behavior, rest) = pair_arg(rest)?;
    let (count, amount) = pair_arg(rest)?;
    let behavior = match behavior {
        Value::String(s) => {
            DemonicBehavior::from_name(s).ok_or_else(|| format!("unknown behavior {s}"))?
        }
        other => return Err(format!("expected behavior name, got {other}")),
    };
    Ok((nat_arg(seed)?, behavior, nat_arg(count)?, nat_arg(amount)?))
}

/// SplitMix64 finalizer, used to derive per-call coin flips.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Contract whose behavior is fixed by its configuration. Storage counts
/// calls so repeated invocations stay distinguishable yet deterministic.
pub fn demonic() -> ContractDef {
    ContractDef::new(
        DEMONIC,
        entrypoints(vec![("poke", TypeTag::Nat)]),
        TypeTag::Nat,
        TypeTag::pair(
            TypeTag::Nat,
            TypeTag::pair(TypeTag::String, TypeTag::pair(TypeTag::Nat, TypeTag::Nat)),
        ),
        |ctx, param, storage| -> BodyResult {
            let (seed, behavior, count, amount) = parse_demonic_config(ctx.config)?;
            let (entry, _) = split_call(param)?;
            if !is_deposit(entry) && entry != "poke" {
                return Err(unknown_entrypoint(entry));
            }
            let calls = nat_arg(storage)?;
            let next = Value::Nat(calls.wrapping_add(1));
            let amount = Amount::new(amount);
            let ops = match behavior {
                DemonicBehavior::Accept => vec![],
                DemonicBehavior::EmitTransfers => (0..count)
                    .map(|_| Operation::transfer(ctx.source.clone(), amount))
                    .collect(),
                DemonicBehavior::Reenter => vec![Operation::transfer(ctx.sender.clone(), amount)],
                DemonicBehavior::Create => {
                    let addr = Address::new(format!("{}.c{calls}", ctx.self_addr.as_str()))
                        .map_err(|e| e.to_string())?;
                    vec![Operation::CreateContract {
                        addr,
                        amount,
                        storage: Value::Unit,
                        code_key: RECEIVER.into(),
                        config: Value::Unit,
                    }]
                }
                DemonicBehavior::FailBySeed => {
                    if mix64(seed ^ mix64(calls ^ ctx.level.tick())) & 1 == 1 {
                        return Err("demonic failure".into());
                    }
                    vec![]
                }
            };
            Ok((ops, next))
        },
    )
}
