mod common;

use std::collections::BTreeSet;

use common::addr;
use msc::features::{check_allowed, narrow_restrictions, Feature, FeatureSet};
use msc::model::{Address, RestrictionState};
use proptest::prelude::*;

fn set(names: &[&str]) -> BTreeSet<Address> {
    names.iter().map(|n| addr(n)).collect()
}

#[test]
fn narrowing_examples() {
    let top = RestrictionState::unrestricted();
    let ab = narrow_restrictions(&top, Some(&set(&["a", "b"])), None);
    assert_eq!(ab.allow, Some(set(&["a", "b"])));
    let b = narrow_restrictions(&ab, Some(&set(&["b", "c"])), None);
    assert_eq!(b.allow, Some(set(&["b"])));
    let x = narrow_restrictions(&top, None, Some(&set(&["x"])));
    let xy = narrow_restrictions(&x, None, Some(&set(&["y"])));
    assert_eq!(xy.block, set(&["x", "y"]));
}

#[test]
fn check_allowed_examples() {
    let top = RestrictionState::unrestricted();
    let vault_only = narrow_restrictions(&top, Some(&set(&["vault"])), None);
    assert!(check_allowed(
        &vault_only,
        &addr("vault"),
        None,
        &addr("owner")
    ));
    let no_bad = narrow_restrictions(&top, None, Some(&set(&["bad"])));
    assert!(!check_allowed(&no_bad, &addr("bad"), None, &addr("owner")));
    let v = addr("v");
    assert!(check_allowed(&top, &v, Some(&v), &v));
    assert!(!check_allowed(&top, &addr("w"), Some(&v), &v));
    assert!(!check_allowed(&top, &v, Some(&v), &addr("w")));
}

#[test]
fn feature_names_parse() {
    let fs = FeatureSet::parse_list("views,contexts").unwrap();
    assert!(fs.enabled(Feature::Views) && fs.enabled(Feature::Contexts));
    assert!(!fs.enabled(Feature::Bundles));
    assert!(FeatureSet::parse_list("views,telepathy").is_err());
    for f in Feature::ALL {
        assert_eq!(f.name().parse::<Feature>(), Ok(f));
        assert!(FeatureSet::all().enabled(f));
        assert!(!FeatureSet::none().enabled(f));
    }
}

const UNIVERSE: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn subset(bits: u8) -> BTreeSet<Address> {
    UNIVERSE
        .iter()
        .enumerate()
        .filter(|(i, _)| bits & (1 << i) != 0)
        .map(|(_, n)| addr(n))
        .collect()
}

proptest! {
    #[test]
    fn narrowing_chains_only_shrink(chain in prop::collection::vec((0u8..3, 0u8..64), 0..8), owner in prop::option::of(0usize..6), sender in 0usize..6) {
        let owner = owner.map(|i| addr(UNIVERSE[i]));
        let sender = addr(UNIVERSE[sender]);
        let passing = |r: &RestrictionState| -> BTreeSet<Address> {
            UNIVERSE.iter().map(|n| addr(n)).filter(|d| check_allowed(r, d, owner.as_ref(), &sender)).collect()
        };
        let mut state = RestrictionState::unrestricted();
        let mut admitted = passing(&state);
        for (mode, bits) in chain {
            let s = subset(bits);
            let parent = state.clone();
            state = match mode {
                0 => narrow_restrictions(&parent, Some(&s), None),
                1 => narrow_restrictions(&parent, None, Some(&s)),
                _ => narrow_restrictions(&parent, None, None),
            };
            if let (Some(p), Some(c)) = (&parent.allow, &state.allow) {
                prop_assert!(c.is_subset(p));
            }
            prop_assert!(parent.allow.is_none() || state.allow.is_some());
            prop_assert!(parent.block.is_subset(&state.block));
            let now = passing(&state);
            prop_assert!(now.is_subset(&admitted));
            admitted = now;
        }
    }
}
