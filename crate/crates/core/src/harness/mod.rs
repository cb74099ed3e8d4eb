//! Seeded generation of transactions and adversarial contracts.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with `seed_from_u64`
//! (rand_chacha 0.3), so a seed names the same output on every platform
//! and release.

pub mod faults;
mod fuzz;

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub use fuzz::{
    check_case, fuzz, fuzz_with, repro_scenario, FuzzConfig, FuzzReport, Invariant, Violation,
};

use crate::model::{Address, Amount, CodeKey, Environment, Operation, TypeTag, Value};
use crate::registry::standard::{self, demonic_config, DemonicBehavior};
use crate::registry::{ContractDef, Registry};
use crate::scheduler::SignedTransaction;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Addresses and code keys the generator may use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Universe {
    /// Callable addresses with their parameter types.
    pub targets: BTreeMap<Address, TypeTag>,
    /// Addresses that may author transactions.
    pub authors: Vec<Address>,
    /// Code keys with their config and storage types.
    pub code_keys: BTreeMap<CodeKey, (TypeTag, TypeTag)>,
}

impl Universe {
    /// Every address of `env` is a target. Receivers author transactions,
    /// or every address does when there are none.
    pub fn from_env(env: &Environment, registry: &Registry) -> Self {
        let targets = env
            .iter()
            .map(|(a, c)| (a.clone(), c.param_type().clone()))
            .collect();
        let mut authors: Vec<Address> = env
            .iter()
            .filter(|(_, c)| c.code_key().as_str() == standard::RECEIVER)
            .map(|(a, _)| a.clone())
            .collect();
        if authors.is_empty() {
            authors = env.addresses().cloned().collect();
        }
        let code_keys = registry
            .keys()
            .filter_map(|k| {
                registry
                    .get(k)
                    .map(|d| (k.clone(), (d.config_type.clone(), d.storage_type.clone())))
            })
            .collect();
        Self {
            targets,
            authors,
            code_keys,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Relative weights of generated operation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpWeights {
    pub transfer: u32,
    pub create: u32,
    pub atomic: u32,
    pub context: u32,
    pub restricted: u32,
    pub end_interactions: u32,
}

impl Default for OpWeights {
    fn default() -> Self {
        Self {
            transfer: 12,
            create: 1,
            atomic: 2,
            context: 1,
            restricted: 1,
            end_interactions: 0,
        }
    }
}

impl OpWeights {
    pub fn transfers_only() -> Self {
        Self {
            transfer: 1,
            create: 0,
            atomic: 0,
            context: 0,
            restricted: 0,
            end_interactions: 0,
        }
    }

    pub fn without_contexts(self) -> Self {
        Self { context: 0, ..self }
    }
}

/// Weights over demonic behaviors. All zero means a plain receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemonicProfile {
    pub emit_transfers: u32,
    pub reenter: u32,
    pub create: u32,
    pub fail_by_seed: u32,
}

impl Default for DemonicProfile {
    fn default() -> Self {
        Self {
            emit_transfers: 1,
            reenter: 1,
            create: 1,
            fail_by_seed: 1,
        }
    }
}

impl DemonicProfile {
    pub fn none() -> Self {
        Self {
            emit_transfers: 0,
            reenter: 0,
            create: 0,
            fail_by_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub universe: Universe,
    pub max_ops_per_tx: usize,
    pub amount_bound: u64,
    pub demonic_profile: DemonicProfile,
    pub weights: OpWeights,
    /// Maximum wrapper nesting.
    pub max_depth: usize,
}

impl GenConfig {
    pub fn new(seed: u64, universe: Universe) -> Self {
        Self {
            seed,
            universe,
            max_ops_per_tx: 4,
            amount_bound: 20,
            demonic_profile: DemonicProfile::default(),
            weights: OpWeights::default(),
            max_depth: 2,
        }
    }
}

/// A random inhabitant of `t`, with numbers bounded by `bound`.
pub fn gen_value(rng: &mut impl Rng, t: &TypeTag, universe: &Universe, bound: u64) -> Value {
    match t {
        TypeTag::Unit => Value::Unit,
        TypeTag::Nat => Value::Nat(rng.gen_range(0..=bound)),
        TypeTag::Int => {
            let b = i64::try_from(bound).unwrap_or(i64::MAX);
            Value::Int(rng.gen_range(-b..=b))
        }
        TypeTag::Bool => Value::Bool(rng.gen()),
        TypeTag::String => {
            let len = rng.gen_range(0..4);
            Value::String(
                (0..len)
                    .map(|_| rng.gen_range(b'a'..=b'z') as char)
                    .collect(),
            )
        }
        TypeTag::Mutez => Value::Mutez(Amount::new(rng.gen_range(0..=bound))),
        TypeTag::Address => match universe.targets.keys().choose(rng) {
            Some(a) => Value::Address(a.clone()),
            None => Value::Address(Address::new("nobody").expect("valid literal")),
        },
        TypeTag::Pair(l, r) => Value::pair(
            gen_value(rng, l, universe, bound),
            gen_value(rng, r, universe, bound),
        ),
        TypeTag::List(e) => {
            let len = rng.gen_range(0..3);
            Value::List(
                (0..len)
                    .map(|_| gen_value(rng, e, universe, bound))
                    .collect(),
            )
        }
        TypeTag::Entrypoints(entries) => {
            let (name, arg) = entries
                .iter()
                .choose(rng)
                .expect("entrypoint maps are non-empty");
            Value::call(name, gen_value(rng, arg, universe, bound))
        }
    }
}

struct OpGen<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    created: usize,
}

impl OpGen<'_> {
    fn op(&mut self, depth: usize) -> Operation {
        let w = &self.cfg.weights;
        let nested = depth < self.cfg.max_depth;
        let creatable = !self.cfg.universe.code_keys.is_empty();
        let weights = [
            w.transfer,
            if creatable { w.create } else { 0 },
            if nested { w.atomic } else { 0 },
            if nested { w.context } else { 0 },
            if nested { w.restricted } else { 0 },
            w.end_interactions,
        ];
        let choice = match WeightedIndex::new(weights) {
            Ok(d) => d.sample(&mut self.rng),
            Err(_) => 0,
        };
        match choice {
            0 => self.transfer(),
            1 => self.create(),
            2 => Operation::AtomicBundle {
                ops: self.inner(depth),
            },
            3 => Operation::ContextBundle {
                ops: self.inner(depth),
            },
            4 => {
                let addrs: Vec<Address> = self
                    .cfg
                    .universe
                    .targets
                    .keys()
                    .filter(|_| self.rng.gen_bool(0.5))
                    .cloned()
                    .collect();
                let ops = self.inner(depth);
                if self.rng.gen_bool(0.5) {
                    Operation::allow(addrs, ops)
                } else {
                    Operation::block(addrs, ops)
                }
            }
            _ => Operation::EndInteractions,
        }
    }

    fn inner(&mut self, depth: usize) -> Vec<Operation> {
        let n = self.rng.gen_range(1..=3);
        (0..n).map(|_| self.op(depth + 1)).collect()
    }

    fn transfer(&mut self) -> Operation {
        let u = &self.cfg.universe;
        let (dest, param_type) = u
            .targets
            .iter()
            .choose(&mut self.rng)
            .expect("universe is non-empty");
        let amount = Amount::new(self.rng.gen_range(0..=self.cfg.amount_bound));
        let param = gen_value(&mut self.rng, param_type, u, self.cfg.amount_bound);
        Operation::Transfer {
            dest: dest.clone(),
            amount,
            param,
        }
    }

    fn create(&mut self) -> Operation {
        let u = &self.cfg.universe;
        let (code_key, (config_t, storage_t)) = u
            .code_keys
            .iter()
            .choose(&mut self.rng)
            .expect("checked non-empty");
        let bound = self.cfg.amount_bound;
        let config = if code_key.as_str() == standard::DEMONIC {
            gen_demonic_contract(self.rng.gen(), &self.cfg.demonic_profile).config
        } else {
            gen_value(&mut self.rng, config_t, u, bound)
        };
        let storage = gen_value(&mut self.rng, storage_t, u, bound);
        self.created += 1;
        Operation::CreateContract {
            addr: Address::new(format!("new{}-{}", self.cfg.seed, self.created))
                .expect("valid literal"),
            amount: Amount::new(self.rng.gen_range(0..=bound)),
            storage,
            code_key: code_key.clone(),
            config,
        }
    }
}

/// A transaction over `cfg.universe`, determined by `seed` and `cfg` alone.
pub fn gen_transaction(seed: u64, cfg: &GenConfig) -> SignedTransaction {
    let mut rng = rng_for(seed);
    let author = cfg
        .universe
        .authors
        .choose(&mut rng)
        .or_else(|| cfg.universe.targets.keys().next())
        .cloned()
        .expect("universe is non-empty");
    let n = if cfg.max_ops_per_tx == 0 {
        0
    } else {
        rng.gen_range(0..=cfg.max_ops_per_tx)
    };
    let mut g = OpGen {
        cfg: &GenConfig {
            seed,
            ..cfg.clone()
        },
        rng,
        created: 0,
    };
    let ops = (0..n).map(|_| g.op(0)).collect();
    SignedTransaction::new(author, ops)
}

/// A demonic contract with its behavior frozen into `config`.
#[derive(Debug, Clone)]
pub struct DemonicContract {
    pub def: ContractDef,
    pub behavior: DemonicBehavior,
    pub config: Value,
}

pub fn gen_demonic_contract(seed: u64, profile: &DemonicProfile) -> DemonicContract {
    let mut rng = rng_for(seed);
    let weights = [
        profile.emit_transfers,
        profile.reenter,
        profile.create,
        profile.fail_by_seed,
    ];
    let behavior = match WeightedIndex::new(weights) {
        Ok(d) => [
            DemonicBehavior::EmitTransfers,
            DemonicBehavior::Reenter,
            DemonicBehavior::Create,
            DemonicBehavior::FailBySeed,
        ][d.sample(&mut rng)],
        Err(_) => DemonicBehavior::Accept,
    };
    let count = rng.gen_range(1..=3);
    let amount = rng.gen_range(0..=3);
    let inner_seed = rng.gen();
    DemonicContract {
        def: standard::demonic(),
        behavior,
        config: demonic_config(inner_seed, behavior, count, amount),
    }
}

/// Environment used by fuzzing when none is given: two vaults, their
/// attacker and client, a forwarder, two plain accounts and three demonic
/// contracts.
pub fn default_env(registry: &Registry) -> Environment {
    let a = |s: &str| Address::new(s).expect("valid literal");
    let mk = |code: &str, config: Value, storage: Value, balance: u64| {
        registry
            .instantiate(&code.into(), config, storage, Amount::new(balance))
            .expect("default universe is well typed")
    };
    let mut env = Environment::new()
        .update(
            a("alice"),
            mk(standard::RECEIVER, Value::Unit, Value::Unit, 100),
        )
        .update(
            a("bob"),
            mk(standard::RECEIVER, Value::Unit, Value::Unit, 100),
        )
        .update(
            a("vault"),
            mk(
                standard::BANK,
                Value::pair(Value::Nat(9), Value::Address(a("bad"))),
                Value::Unit,
                15,
            ),
        )
        .update(
            a("bad"),
            mk(standard::BAD, Value::Address(a("vault")), Value::Unit, 0),
        )
        .update(
            a("vault2"),
            mk(
                standard::BANK,
                Value::pair(Value::Nat(5), Value::Address(a("client"))),
                Value::Unit,
                40,
            ),
        )
        .update(
            a("client"),
            mk(
                standard::GOOD_CLIENT,
                Value::Address(a("vault2")),
                Value::Unit,
                0,
            ),
        )
        .update(
            a("fwd"),
            mk(standard::FORWARDER, Value::Unit, Value::Unit, 20),
        );
    for i in 1..=3u64 {
        let d = gen_demonic_contract(i, &DemonicProfile::default());
        env = env.update(
            a(&format!("demon{i}")),
            mk(standard::DEMONIC, d.config, Value::Nat(0), 10),
        );
    }
    env
}

/// Code keys of the default universe.
pub const DEFAULT_CODE_KEYS: [&str; 6] = [
    standard::BANK,
    standard::BAD,
    standard::GOOD_CLIENT,
    standard::FORWARDER,
    standard::RECEIVER,
    standard::DEMONIC,
];

/// Universe over [`default_env`] restricted to [`DEFAULT_CODE_KEYS`].
pub fn default_universe(env: &Environment, registry: &Registry) -> Universe {
    let mut u = Universe::from_env(env, registry);
    u.code_keys
        .retain(|k, _| DEFAULT_CODE_KEYS.contains(&k.as_str()));
    u
}
