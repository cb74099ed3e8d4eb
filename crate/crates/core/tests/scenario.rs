mod common;

use common::{addr, all_fixtures, arb_scenario, arb_value, fixture};
use msc::model::{value_typecheck, Value};
use msc::registry::Registry;
use msc::scenario::{
    parse_scenario, parse_value, print_scenario, run_scenario, validate_setup, Decl, Overrides,
    SetupError,
};
use msc::scheduler::SchedulingStrategy;
use proptest::prelude::*;

fn dfs() -> Overrides {
    Overrides {
        strategy: Some(SchedulingStrategy::Dfs),
        ..Overrides::default()
    }
}

#[test]
fn vault_fixture_shape() {
    let s = parse_scenario(&fixture("vault-bfs-attack.msc")).unwrap();
    assert_eq!(s.name, "vault-bfs-attack");
    assert_eq!(s.transactions.len(), 1);
    assert_eq!(s.transactions[0].ops.len(), 1);
    assert_eq!(s.expectations.len(), 3);
}

#[test]
fn printing_preserves_declaration_order() {
    let s = parse_scenario(&fixture("vault-bfs-attack.msc")).unwrap();
    let printed = print_scenario(&s);
    let order: Vec<_> = printed
        .lines()
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    assert_eq!(
        order,
        [
            "scenario",
            "account",
            "contract",
            "contract",
            "strategy",
            "transaction",
            "transfer",
            "}",
            "expect",
            "expect",
            "expect"
        ]
    );
    let addrs: Vec<_> = s
        .decls
        .iter()
        .filter_map(|d| match d {
            Decl::Account { addr, .. } | Decl::Contract { addr, .. } => Some(addr.to_string()),
            _ => None,
        })
        .collect();
    assert_eq!(addrs, ["@owner", "@vault", "@bad"]);
}

#[test]
fn vault_expectations_per_strategy() {
    let s = parse_scenario(&fixture("vault-bfs-attack.msc")).unwrap();
    let bfs = run_scenario(&s, &Overrides::default()).unwrap();
    assert!(bfs.all_passed());
    assert_eq!(bfs.results[1].to_string(), "balance @vault = 0: PASS");

    let mut s = s;
    s.expectations = parse_scenario(
        "scenario \"e\" expect revert expect balance @vault = 15 expect total = 115",
    )
    .unwrap()
    .expectations;
    let o = run_scenario(&s, &dfs()).unwrap();
    assert!(o.all_passed(), "{:?}", o.results);
}

#[test]
fn failed_expectations_report_the_observed_value() {
    let s = parse_scenario(&fixture("vault-bfs-attack.msc")).unwrap();
    let o = run_scenario(&s, &dfs()).unwrap();
    let lines: Vec<String> = o.results.iter().map(ToString::to_string).collect();
    assert_eq!(
        lines,
        [
            "commit: FAIL (got 0 committed, 1 reverted)",
            "balance @vault = 0: FAIL (got 15)",
            "balance @bad = 15: FAIL (got 0)"
        ]
    );
}

#[test]
fn setup_errors_come_before_execution() {
    let r = Registry::standard();
    let check = |src: &str| validate_setup(&parse_scenario(src).unwrap(), &r).unwrap_err();
    assert!(matches!(
        check("scenario \"x\" contract @c code warp config unit storage unit balance 0"),
        SetupError::UnknownCodeKey { .. }
    ));
    assert_eq!(
        check("scenario \"x\" account @a balance 1 account @a balance 2"),
        SetupError::DuplicateAddress(addr("a"))
    );
    assert_eq!(check("scenario \"x\" fuel 0"), SetupError::ZeroFuel);
    assert_eq!(
        check("scenario \"x\" strategy bfs strategy dfs"),
        SetupError::Repeated("strategy")
    );
    assert!(matches!(
        check("scenario \"x\" account @a balance 1 transaction from @a { transfer 1 to @ghost }"),
        SetupError::UndeclaredAddress { index: 0, .. }
    ));
    assert!(matches!(
        check("scenario \"x\" contract @v code bank config unit storage unit balance 0"),
        SetupError::Instantiate { .. }
    ));
    assert!(validate_setup(
        &parse_scenario(
            "scenario \"x\" account @a balance 5 transaction from @a { create @n code receiver config unit storage unit balance 1 } transaction from @a { transfer 1 to @n }"
        )
        .unwrap(),
        &r
    )
    .is_ok());
}

#[test]
fn parse_error_examples() {
    let e = parse_scenario("").unwrap_err();
    assert_eq!(
        (e.line, e.column, e.expected.as_str()),
        (1, 1, "`scenario`")
    );
    let e = parse_scenario(
        "scenario \"x\" account @a balance 1 transaction from @a { transfer -5 to @v }",
    )
    .unwrap_err();
    assert_eq!(e.expected, "natural number");
    assert_eq!(e.found, "`-5`");
}

#[test]
fn comments_and_whitespace_are_ignored() {
    let a = parse_scenario("scenario \"c\"\n# a comment\naccount   @a\tbalance 3 # trailing\n")
        .unwrap();
    let b = parse_scenario("scenario \"c\" account @a balance 3").unwrap();
    assert_eq!(a, b);
}

#[test]
fn fixtures_run_green_and_deterministically() {
    for (name, text) in all_fixtures() {
        let s = parse_scenario(&text).unwrap();
        let a = run_scenario(&s, &Overrides::default()).unwrap();
        let b = run_scenario(&s, &Overrides::default()).unwrap();
        assert!(a.all_passed(), "{name}: {:?}", a.results);
        assert_eq!(a, b, "{name}");
    }
}

proptest! {
    #[test]
    fn value_literals_round_trip(v in arb_value()) {
        let text = v.to_string();
        let parsed = parse_value(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&parsed, &v);
        let tag = parsed.type_tag().expect("parsed values are homogeneous");
        prop_assert!(value_typecheck(&parsed, &tag));
    }

    #[test]
    fn scenarios_round_trip(s in arb_scenario()) {
        let printed = print_scenario(&s);
        let parsed = parse_scenario(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(print_scenario(&parsed), printed);
        prop_assert_eq!(parsed, s);
    }

    #[test]
    fn heterogeneous_lists_are_rejected(n in any::<u64>(), b in any::<bool>()) {
        let text = Value::List(vec![Value::Nat(n), Value::Bool(b)]).to_string();
        prop_assert!(parse_value(&text).is_err());
    }
}
