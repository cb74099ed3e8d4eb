mod common;

use common::addr;
use msc::executor::{
    pending_balance, view_storage, ErrorKind, ExecInput, ExecResult, Executor, StandardExecutor,
};
use msc::features::{Feature, FeatureSet};
use msc::model::{
    Amount, Environment, ExecutionContext, Operation, PendingTransfer, QueueSnapshot, Timestamp,
    Value,
};
use msc::registry::{standard, Registry};
use proptest::prelude::*;

fn vault_env() -> Environment {
    let r = Registry::standard();
    let mk = |code: &str, config: Value, storage: Value, b: u64| {
        r.instantiate(&code.into(), config, storage, Amount::new(b))
            .unwrap()
    };
    Environment::new()
        .update(
            addr("owner"),
            mk(standard::RECEIVER, Value::Unit, Value::Unit, 100),
        )
        .update(
            addr("vault"),
            mk(
                standard::BANK,
                Value::pair(Value::Nat(9), Value::Address(addr("bad"))),
                Value::Unit,
                15,
            ),
        )
        .update(
            addr("bad"),
            mk(standard::BAD, Value::Address(addr("vault")), Value::Unit, 0),
        )
        .update(
            addr("fwd"),
            mk(standard::FORWARDER, Value::Unit, Value::Unit, 20),
        )
}

fn exec_with(env: &Environment, sender: &str, op: &Operation, features: FeatureSet) -> ExecResult {
    let pending = QueueSnapshot::empty();
    StandardExecutor::default().execute(
        &ExecutionContext::root(addr(sender)),
        op,
        ExecInput {
            env,
            features: &features,
            pending: &pending,
            level: Timestamp::new(0),
        },
    )
}

fn exec(env: &Environment, sender: &str, op: &Operation) -> ExecResult {
    exec_with(env, sender, op, FeatureSet::none())
}

fn kind(r: ExecResult) -> ErrorKind {
    r.expect_err("operation should fail").kind
}

#[test]
fn payout_moves_funds_and_runs_the_receiver() {
    let env = vault_env();
    let op = Operation::call(addr("bad"), Amount::new(5), "receive", vec![]);
    let done = exec(&env, "vault", &op).unwrap();
    assert_eq!(
        done.env_after.balance_of(&addr("vault")),
        Some(Amount::new(10))
    );
    assert_eq!(
        done.env_after.balance_of(&addr("bad")),
        Some(Amount::new(5))
    );
    assert_eq!(done.emitter, addr("bad"));
    assert!(done.emitted.is_empty());
}

#[test]
fn zero_transfer_leaves_balances_and_storage() {
    let env = vault_env();
    let done = exec(
        &env,
        "owner",
        &Operation::transfer(addr("vault"), Amount::ZERO),
    )
    .unwrap();
    assert_eq!(done.env_after, env);
    assert!(done.emitted.is_empty());
}

#[test]
fn withdraw_guard_sees_balance_before_pending_payouts() {
    // Emission never moves funds; the third withdraw in the BFS attack still sees 15.
    let env = vault_env();
    let withdraw = Operation::call(addr("vault"), Amount::ZERO, "withdraw", vec![Value::Nat(5)]);
    for _ in 0..3 {
        let done = exec(&env, "bad", &withdraw).unwrap();
        assert_eq!(
            done.env_after.balance_of(&addr("vault")),
            Some(Amount::new(15))
        );
        assert_eq!(
            done.emitted,
            vec![Operation::call(
                addr("bad"),
                Amount::new(5),
                "receive",
                vec![]
            )]
        );
    }
    let after_one_payout = exec(
        &env,
        "vault",
        &Operation::call(addr("bad"), Amount::new(5), "receive", vec![]),
    )
    .unwrap()
    .env_after;
    let e = exec(&after_one_payout, "bad", &withdraw).unwrap_err();
    assert_eq!(
        e.kind,
        ErrorKind::ContractFailure("breaking invariant".into())
    );
}

#[test]
fn bank_emits_nothing_when_its_guard_fails() {
    let env = vault_env();
    let withdraw = Operation::call(addr("vault"), Amount::ZERO, "withdraw", vec![Value::Nat(7)]);
    assert!(
        matches!(kind(exec(&env, "bad", &withdraw)), ErrorKind::ContractFailure(m) if m == "breaking invariant")
    );
    let withdraw = Operation::call(addr("vault"), Amount::ZERO, "withdraw", vec![Value::Nat(1)]);
    assert!(
        matches!(kind(exec(&env, "owner", &withdraw)), ErrorKind::ContractFailure(m) if m == "not owner")
    );
}

#[test]
fn precondition_failures_have_distinct_kinds() {
    let env = vault_env();
    assert_eq!(
        kind(exec(
            &env,
            "owner",
            &Operation::transfer(addr("nobody"), Amount::ZERO)
        )),
        ErrorKind::UnknownAddress
    );
    assert_eq!(
        kind(exec(
            &env,
            "ghost",
            &Operation::transfer(addr("vault"), Amount::ZERO)
        )),
        ErrorKind::UnknownAddress
    );
    assert_eq!(
        kind(exec(
            &env,
            "owner",
            &Operation::transfer(addr("vault"), Amount::new(101))
        )),
        ErrorKind::InsufficientBalance
    );
    let bad_param = Operation::Transfer {
        dest: addr("vault"),
        amount: Amount::ZERO,
        param: Value::Nat(3),
    };
    assert_eq!(
        kind(exec(&env, "owner", &bad_param)),
        ErrorKind::TypeMismatch
    );
    assert_eq!(
        kind(exec(
            &env,
            "owner",
            &Operation::AtomicBundle { ops: vec![] }
        )),
        ErrorKind::NotExecutable
    );
    assert_eq!(
        kind(exec(&env, "owner", &Operation::EndInteractions)),
        ErrorKind::FeatureDisabled(Feature::EndInteractions)
    );
}

#[test]
fn credit_overflow_is_an_error() {
    let r = Registry::standard();
    let env = Environment::new()
        .update(
            addr("a"),
            r.instantiate(
                &standard::RECEIVER.into(),
                Value::Unit,
                Value::Unit,
                Amount::new(1),
            )
            .unwrap(),
        )
        .update(
            addr("b"),
            r.instantiate(
                &standard::RECEIVER.into(),
                Value::Unit,
                Value::Unit,
                Amount::new(u64::MAX),
            )
            .unwrap(),
        );
    assert_eq!(
        kind(exec(
            &env,
            "a",
            &Operation::transfer(addr("b"), Amount::new(1))
        )),
        ErrorKind::Overflow
    );
}

#[test]
fn self_transfer_cancels_out() {
    let env = vault_env();
    let done = exec(
        &env,
        "fwd",
        &Operation::transfer(addr("fwd"), Amount::new(20)),
    )
    .unwrap();
    assert_eq!(
        done.env_after.balance_of(&addr("fwd")),
        Some(Amount::new(20))
    );
}

#[test]
fn create_contract_installs_and_debits() {
    let env = vault_env();
    let create = |a: &str, amount: u64| Operation::CreateContract {
        addr: addr(a),
        amount: Amount::new(amount),
        storage: Value::Unit,
        code_key: standard::RECEIVER.into(),
        config: Value::Unit,
    };
    let done = exec(&env, "owner", &create("fresh", 30)).unwrap();
    assert_eq!(
        done.env_after.balance_of(&addr("fresh")),
        Some(Amount::new(30))
    );
    assert_eq!(
        done.env_after.balance_of(&addr("owner")),
        Some(Amount::new(70))
    );
    assert_eq!(done.emitter, addr("owner"));
    assert_eq!(
        kind(exec(&env, "owner", &create("owner", 0))),
        ErrorKind::AddressOccupied
    );
    assert_eq!(
        kind(exec(&env, "owner", &create("fresh", 101))),
        ErrorKind::InsufficientBalance
    );
    let unknown = Operation::CreateContract {
        addr: addr("fresh"),
        amount: Amount::ZERO,
        storage: Value::Unit,
        code_key: "nope".into(),
        config: Value::Unit,
    };
    assert_eq!(
        kind(exec(&env, "owner", &unknown)),
        ErrorKind::UnknownCodeKey
    );
    let ill_typed = Operation::CreateContract {
        addr: addr("fresh"),
        amount: Amount::ZERO,
        storage: Value::Nat(1),
        code_key: standard::RECEIVER.into(),
        config: Value::Unit,
    };
    assert_eq!(
        kind(exec(&env, "owner", &ill_typed)),
        ErrorKind::TypeMismatch
    );
}

#[test]
fn views_and_pending_balance() {
    let env = vault_env();
    let all = FeatureSet::all();
    assert_eq!(view_storage(&env, &addr("bad"), &all).unwrap(), Value::Unit);
    assert_eq!(
        view_storage(&env, &addr("nobody"), &all).unwrap_err().kind,
        ErrorKind::UnknownAddress
    );
    assert_eq!(
        view_storage(&env, &addr("bad"), &FeatureSet::none())
            .unwrap_err()
            .kind,
        ErrorKind::FeatureDisabled(Feature::Views)
    );

    let payout = |dest: &str| PendingTransfer {
        sender: addr("vault"),
        dest: addr(dest),
        amount: Amount::new(5),
    };
    let pending = QueueSnapshot {
        transfers: vec![payout("bad"), payout("bad"), payout("bad")],
    };
    assert_eq!(
        pending_balance(&env, &addr("vault"), &pending, &all).unwrap(),
        0
    );
    assert_eq!(
        pending_balance(&env, &addr("bad"), &pending, &all).unwrap(),
        0
    );
    assert_eq!(
        pending_balance(&env, &addr("vault"), &QueueSnapshot::empty(), &all).unwrap(),
        15
    );
    assert_eq!(
        pending_balance(&env, &addr("vault"), &pending, &FeatureSet::none())
            .unwrap_err()
            .kind,
        ErrorKind::FeatureDisabled(Feature::PendingBalance)
    );
}

fn arb_op() -> impl Strategy<Value = (String, Operation)> {
    let names = ["owner", "vault", "bad", "fwd"];
    let who = prop::sample::select(names.to_vec()).prop_map(str::to_string);
    let dest = prop::sample::select(names.to_vec()).prop_map(addr);
    let param = prop_oneof![
        Just(Value::default_call()),
        (0u64..20).prop_map(|n| Value::call("withdraw", Value::Nat(n))),
        (0u64..5, 1u64..20)
            .prop_map(|(n, m)| Value::call("rob", Value::pair(Value::Nat(n), Value::Nat(m)))),
        (0u64..20).prop_map(|n| Value::call(
            "invoke",
            Value::pair(Value::Address(addr("bad")), Value::Nat(n))
        )),
        Just(Value::Nat(1)),
    ];
    let transfer = (dest, 0u64..120, param).prop_map(|(dest, amount, param)| Operation::Transfer {
        dest,
        amount: Amount::new(amount),
        param,
    });
    let create = (0u64..120).prop_map(|amount| Operation::CreateContract {
        addr: addr("fresh"),
        amount: Amount::new(amount),
        storage: Value::Unit,
        code_key: standard::RECEIVER.into(),
        config: Value::Unit,
    });
    (who, prop_oneof![4 => transfer, 1 => create])
}

proptest! {
    #[test]
    fn failures_never_produce_an_environment_and_successes_keep_code((sender, op) in arb_op()) {
        let env = vault_env();
        let before = env.clone();
        match exec_with(&env, &sender, &op, FeatureSet::all()) {
            Ok(done) => {
                for (a, c) in before.iter() {
                    let now = done.env_after.get(a).expect("no address disappears");
                    prop_assert!(now.same_code(c));
                    prop_assert_eq!(now.config(), c.config());
                    prop_assert_eq!(now.code_key(), c.code_key());
                    prop_assert_eq!(now.param_type(), c.param_type());
                    prop_assert_eq!(now.storage_type(), c.storage_type());
                }
                prop_assert_eq!(done.env_after.total_balance(), before.total_balance());
            }
            Err(_) => prop_assert_eq!(&env, &before),
        }
    }

    #[test]
    fn execution_is_deterministic((sender, op) in arb_op()) {
        let env = vault_env();
        let a = exec(&env, &sender, &op).map(|d| (d.emitter, d.emitted, d.env_after));
        let b = exec(&env, &sender, &op).map(|d| (d.emitter, d.emitted, d.env_after));
        prop_assert_eq!(a, b);
    }
}
