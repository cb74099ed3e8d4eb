//! Toggleable chain features and the address-restriction machinery.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::model::{Address, RestrictionState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Views,
    PendingBalance,
    Restrictions,
    Bundles,
    Contexts,
    EndInteractions,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::Views,
        Feature::PendingBalance,
        Feature::Restrictions,
        Feature::Bundles,
        Feature::Contexts,
        Feature::EndInteractions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Views => "views",
            Feature::PendingBalance => "pending_balance",
            Feature::Restrictions => "restrictions",
            Feature::Bundles => "bundles",
            Feature::Contexts => "contexts",
            Feature::EndInteractions => "end_interactions",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown feature {0:?}")]
pub struct UnknownFeature(pub String);

impl FromStr for Feature {
    type Err = UnknownFeature;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownFeature(s.to_string()))
    }
}

/// Enabled features. A disabled feature turns the matching operation or
/// capability into an error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FeatureSet {
    pub views: bool,
    pub pending_balance: bool,
    pub restrictions: bool,
    pub bundles: bool,
    pub contexts: bool,
    pub end_interactions: bool,
}

impl FeatureSet {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        Feature::ALL.into_iter().collect()
    }

    pub fn enabled(&self, feature: Feature) -> bool {
        match feature {
            Feature::Views => self.views,
            Feature::PendingBalance => self.pending_balance,
            Feature::Restrictions => self.restrictions,
            Feature::Bundles => self.bundles,
            Feature::Contexts => self.contexts,
            Feature::EndInteractions => self.end_interactions,
        }
    }

    pub fn set(&mut self, feature: Feature, on: bool) {
        let slot = match feature {
            Feature::Views => &mut self.views,
            Feature::PendingBalance => &mut self.pending_balance,
            Feature::Restrictions => &mut self.restrictions,
            Feature::Bundles => &mut self.bundles,
            Feature::Contexts => &mut self.contexts,
            Feature::EndInteractions => &mut self.end_interactions,
        };
        *slot = on;
    }

    #[must_use]
    pub fn with(mut self, feature: Feature) -> Self {
        self.set(feature, true);
        self
    }

    #[must_use]
    pub fn without(mut self, feature: Feature) -> Self {
        self.set(feature, false);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = Feature> + '_ {
        Feature::ALL.into_iter().filter(|f| self.enabled(*f))
    }

    /// Parses a comma- or whitespace-separated list of feature names.
    pub fn parse_list(list: &str) -> Result<Self, UnknownFeature> {
        list.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(Feature::from_str)
            .collect()
    }
}

impl FromIterator<Feature> for FeatureSet {
    fn from_iter<T: IntoIterator<Item = Feature>>(iter: T) -> Self {
        let mut set = FeatureSet::none();
        for f in iter {
            set.set(f, true);
        }
        set
    }
}

/// Narrows `parent` by one restriction wrapper: allow sets intersect (an
/// absent set is the full universe) and block sets union.
pub fn narrow_restrictions(
    parent: &RestrictionState,
    allow: Option<&BTreeSet<Address>>,
    block: Option<&BTreeSet<Address>>,
) -> RestrictionState {
    let allow = match (&parent.allow, allow) {
        (None, None) => None,
        (Some(p), None) => Some(p.clone()),
        (None, Some(a)) => Some(a.clone()),
        (Some(p), Some(a)) => Some(p.intersection(a).cloned().collect()),
    };
    let mut blocked = parent.block.clone();
    if let Some(b) = block {
        blocked.extend(b.iter().cloned());
    }
    RestrictionState {
        allow,
        block: blocked,
    }
}

/// Whether an invocation of `dest` by `sender` passes the restriction state
/// and, when end-of-interactions mode is active, the owner-only rule.
pub fn check_allowed(
    r: &RestrictionState,
    dest: &Address,
    mode_owner: Option<&Address>,
    sender: &Address,
) -> bool {
    if !r.admits(dest) {
        return false;
    }
    match mode_owner {
        Some(owner) => sender == owner && dest == owner,
        None => true,
    }
}
