mod common;

use common::{addr, fixture};
use msc::executor::StandardExecutor;
use msc::features::FeatureSet;
use msc::harness::{default_env, default_universe, gen_transaction, GenConfig};
use msc::model::{Amount, Environment, OpKind, Timestamp};
use msc::registry::Registry;
use msc::scenario::{build_environment, parse_scenario, scheduler_config, Overrides};
use msc::scheduler::{run_transaction, SchedulerConfig, SchedulingStrategy, TxRun};
use msc::trace::{
    replay, validate_atomic_bundles, validate_conservation, validate_no_double_spend, NodeStatus,
    TransactionTree, TreeOutcome,
};
use proptest::prelude::*;

fn vault_run(strategy: SchedulingStrategy) -> (Environment, TxRun) {
    let s = parse_scenario(&fixture("vault-bfs-attack.msc")).unwrap();
    let env = build_environment(&s, &Registry::standard()).unwrap();
    let cfg = scheduler_config(
        &s,
        &Overrides {
            strategy: Some(strategy),
            ..Overrides::default()
        },
    )
    .unwrap();
    let run = run_transaction(
        &StandardExecutor::default(),
        &env,
        &s.transactions[0].to_transaction(),
        &cfg,
        Timestamp::new(0),
    );
    (env, run)
}

#[test]
fn bfs_attack_passes_no_double_spend_with_three_debits() {
    let (env, run) = vault_run(SchedulingStrategy::Bfs);
    let after = run.env_after(&env).clone();
    assert!(validate_no_double_spend(&run.tree, &env, &after).passed());
    let debits: Vec<_> = run
        .tree
        .nodes
        .iter()
        .filter(|n| n.balance_deltas.get(&addr("vault")) == Some(&-5))
        .collect();
    assert_eq!(debits.len(), 3);
    assert!(validate_conservation(&env, &after));
}

#[test]
fn empty_trace_passes() {
    let env = Environment::new();
    let tree = TransactionTree {
        nodes: vec![],
        outcome: TreeOutcome::Commit,
        ts: Timestamp::new(0),
        snapshots: None,
    };
    assert!(validate_no_double_spend(&tree, &env, &env).passed());
    assert!(validate_atomic_bundles(&tree).passed());
}

#[test]
fn duplicated_node_is_caught() {
    let (env, run) = vault_run(SchedulingStrategy::Bfs);
    let after = run.env_after(&env).clone();
    let mut tree = run.tree.clone();
    let payout = tree
        .nodes
        .iter()
        .find(|n| n.sender == addr("vault"))
        .unwrap()
        .clone();
    tree.nodes.push(payout);
    assert!(!validate_no_double_spend(&tree, &env, &after).passed());
}

#[test]
fn minted_funds_break_conservation() {
    let (env, run) = vault_run(SchedulingStrategy::Bfs);
    let after = run.env_after(&env);
    let bad = after.get(&addr("bad")).unwrap();
    let minted = after.update(
        addr("bad"),
        bad.with_balance(Amount::new(bad.balance().mutez() + 1)),
    );
    assert!(!validate_conservation(&env, &minted));
    assert!(!validate_no_double_spend(&run.tree, &env, &minted).passed());
    assert!(validate_conservation(&env, &env));
}

#[test]
fn single_op_bundle_is_contiguous() {
    let s = parse_scenario(
        r#"scenario "one"
account @a balance 5
account @b balance 0
features bundles
strategy dfs
transaction from @a { atomic { transfer 1 to @b } }
"#,
    )
    .unwrap();
    let env = build_environment(&s, &Registry::standard()).unwrap();
    let cfg = scheduler_config(&s, &Overrides::default()).unwrap();
    let run = run_transaction(
        &StandardExecutor::default(),
        &env,
        &s.transactions[0].to_transaction(),
        &cfg,
        Timestamp::new(0),
    );
    assert!(run.is_commit());
    assert!(validate_atomic_bundles(&run.tree).passed());
}

#[test]
fn json_uses_the_documented_field_names() {
    let (_, run) = vault_run(SchedulingStrategy::Bfs);
    let json: serde_json::Value = serde_json::from_str(&run.tree.to_json()).unwrap();
    assert_eq!(json["outcome"], "commit");
    assert_eq!(json["ts"], 0);
    assert!(json.get("reason").is_none());
    let nodes = json["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 7);
    for key in [
        "id", "parent", "seq", "sender", "kind", "dest", "amount", "param", "status", "deltas",
        "commits",
    ] {
        assert!(nodes[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(nodes[0]["param"], "(pair \"rob\" (pair 3 5))");
    assert_eq!(nodes[0]["status"], "executed");
    assert_eq!(nodes[0]["parent"], serde_json::Value::Null);
    assert_eq!(nodes[4]["deltas"]["@vault"], -5);
    assert_eq!(nodes[4]["deltas"]["@bad"], 5);

    let (_, dfs) = vault_run(SchedulingStrategy::Dfs);
    let json: serde_json::Value = serde_json::from_str(&dfs.tree.to_json()).unwrap();
    assert_eq!(json["outcome"], "revert");
    assert!(json["reason"]
        .as_str()
        .unwrap()
        .contains("breaking invariant"));
    assert_eq!(
        json["nodes"].as_array().unwrap().last().unwrap()["status"],
        "failed"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn replay_reproduces_committed_environments(seed in any::<u64>(), dfs in any::<bool>()) {
        let r = Registry::standard();
        let env = default_env(&r);
        let gen = GenConfig::new(0, default_universe(&env, &r));
        let tx = gen_transaction(seed, &gen);
        let strategy = if dfs { SchedulingStrategy::Dfs } else { SchedulingStrategy::Bfs };
        let run = run_transaction(&StandardExecutor::default(), &env, &tx, &SchedulerConfig::new(strategy).with_features(FeatureSet::all()), Timestamp::new(0));
        for n in &run.tree.nodes {
            if matches!(n.status, NodeStatus::Expanded(_)) || n.op.kind().is_wrapper() {
                prop_assert!(n.balance_deltas.is_empty() || n.balance_deltas.values().all(|d| *d == 0));
                prop_assert!(n.storage_commits.is_empty());
                prop_assert!(n.op.kind() != OpKind::Transfer);
            }
        }
        if run.is_commit() {
            let replayed = replay(&run.tree, &env, &r).map_err(TestCaseError::fail)?;
            prop_assert_eq!(&replayed, run.env_after(&env));
            prop_assert!(validate_no_double_spend(&run.tree, &env, run.env_after(&env)).passed());
        }
    }
}
