#![allow(dead_code)]

use std::path::PathBuf;

use msc::features::Feature;
use msc::model::{Address, Amount, CodeKey, Value};
use msc::scenario::{Cmp, Decl, Expectation, OpSpec, Scenario, TxSpec};
use msc::scheduler::SchedulingStrategy;
use proptest::prelude::*;

pub fn addr(s: &str) -> Address {
    Address::new(s).expect("valid test address")
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

pub fn golden(name: &str) -> String {
    std::fs::read_to_string(golden_path(name)).expect("golden exists")
}

pub fn all_fixtures() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .expect("fixtures directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "msc"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("msc").chain(args.iter().copied());
    let code = msc::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// The `--step` queue lines of a `run` invocation, unindented.
pub fn step_lines(stdout: &str) -> Vec<String> {
    stdout
        .lines()
        .filter_map(|l| l.strip_prefix("  "))
        .map(str::to_string)
        .collect()
}

pub fn arb_address() -> BoxedStrategy<Address> {
    "[a-zA-Z0-9_][a-zA-Z0-9_.-]{0,5}"
        .prop_map(|s| addr(&s))
        .boxed()
}

pub fn arb_ident() -> impl Strategy<Value = String> {
    "[a-z_][a-zA-Z0-9_]{0,6}"
}

fn arb_string() -> impl Strategy<Value = String> {
    "[ -~\n\t\r]{0,8}"
}

fn arb_leaf() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Unit),
        any::<u64>().prop_map(Value::Nat),
        any::<i64>().prop_map(Value::Int),
        any::<bool>().prop_map(Value::Bool),
        arb_string().prop_map(Value::String),
        any::<u64>().prop_map(|m| Value::Mutez(Amount::new(m))),
        arb_address().prop_map(Value::Address),
    ]
}

/// Well-formed values: every list is homogeneous.
pub fn arb_value() -> impl Strategy<Value = Value> {
    arb_leaf().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Value::pair(l, r)),
            (inner, 0..4usize).prop_map(|(v, n)| Value::List(vec![v; n])),
            prop::collection::vec(any::<u64>().prop_map(Value::Nat), 0..4).prop_map(Value::List),
            prop::collection::vec(any::<i64>().prop_map(Value::Int), 0..4).prop_map(Value::List),
            prop::collection::vec(arb_address().prop_map(Value::Address), 0..4)
                .prop_map(Value::List),
        ]
    })
}

fn arb_feature() -> impl Strategy<Value = Feature> {
    prop::sample::select(Feature::ALL.to_vec())
}

fn arb_strategy() -> impl Strategy<Value = SchedulingStrategy> {
    prop::sample::select(SchedulingStrategy::ALL.to_vec())
}

fn arb_decl() -> impl Strategy<Value = Decl> {
    prop_oneof![
        3 => (arb_address(), any::<u64>()).prop_map(|(addr, balance)| Decl::Account { addr, balance }),
        3 => (arb_address(), arb_ident(), arb_value(), arb_value(), any::<u64>(), any::<bool>()).prop_map(
            |(addr, code, config, storage, balance, contextual)| Decl::Contract {
                addr,
                code: CodeKey::new(code),
                config,
                storage,
                balance,
                contextual,
            }
        ),
        1 => arb_strategy().prop_map(Decl::Strategy),
        1 => prop::collection::vec(arb_feature(), 1..4).prop_map(Decl::Features),
        1 => any::<u64>().prop_map(Decl::Fuel),
    ]
}

fn arb_op() -> impl Strategy<Value = OpSpec> {
    let leaf = prop_oneof![
        4 => (
            any::<u64>(),
            arb_address(),
            prop::option::of((arb_ident(), prop::collection::vec(arb_value(), 0..3)))
        )
            .prop_map(|(amount, dest, call)| OpSpec::Transfer { amount, dest, call }),
        1 => (arb_address(), arb_ident(), arb_value(), arb_value(), any::<u64>()).prop_map(
            |(addr, code, config, storage, balance)| OpSpec::Create {
                addr,
                code: CodeKey::new(code),
                config,
                storage,
                balance,
            }
        ),
        1 => Just(OpSpec::EndInteractions),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        let ops = prop::collection::vec(inner, 0..3);
        let addrs = prop::collection::vec(arb_address(), 0..3);
        prop_oneof![
            ops.clone().prop_map(OpSpec::Atomic),
            ops.clone().prop_map(OpSpec::Context),
            (addrs.clone(), ops.clone()).prop_map(|(a, o)| OpSpec::Allow(a, o)),
            (addrs, ops).prop_map(|(a, o)| OpSpec::Block(a, o)),
        ]
    })
}

fn arb_expectation() -> impl Strategy<Value = Expectation> {
    let cmp = prop::sample::select(vec![Cmp::Eq, Cmp::Lt, Cmp::Gt]);
    prop_oneof![
        (arb_address(), cmp, any::<u64>()).prop_map(|(addr, cmp, value)| Expectation::Balance {
            addr,
            cmp,
            value
        }),
        (arb_address(), arb_value()).prop_map(|(addr, value)| Expectation::Storage { addr, value }),
        Just(Expectation::Commit),
        Just(Expectation::Revert),
        any::<u64>().prop_map(Expectation::Total),
    ]
}

/// Syntactically arbitrary scenarios; they need not be runnable.
pub fn arb_scenario() -> impl Strategy<Value = Scenario> {
    (
        arb_string(),
        prop::collection::vec(arb_decl(), 0..5),
        prop::collection::vec(
            (arb_address(), prop::collection::vec(arb_op(), 0..4))
                .prop_map(|(author, ops)| TxSpec { author, ops }),
            0..3,
        ),
        prop::collection::vec(arb_expectation(), 0..4),
    )
        .prop_map(|(name, decls, transactions, expectations)| Scenario {
            name,
            decls,
            transactions,
            expectations,
        })
}
