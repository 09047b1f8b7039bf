use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// The set of category ids assigned to one record along one dimension.
///
/// Ids are opaque strings: dotted indices such as `"1.10"` and `"1.1"` are
/// different labels.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSet(BTreeSet<String>);

impl LabelSet {
    pub fn new() -> Self {
        LabelSet(BTreeSet::new())
    }

    pub fn single(label: impl Into<String>) -> Self {
        let mut s = BTreeSet::new();
        s.insert(label.into());
        LabelSet(s)
    }

    pub fn insert(&mut self, label: impl Into<String>) -> bool {
        self.0.insert(label.into())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn intersection_len(&self, other: &LabelSet) -> usize {
        self.0.intersection(&other.0).count()
    }

    pub fn union_len(&self, other: &LabelSet) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<String> {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for LabelSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        LabelSet(iter.into_iter().map(Into::into).collect())
    }
}

impl<'a> IntoIterator for &'a LabelSet {
    type Item = &'a String;
    type IntoIter = std::collections::btree_set::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(l)?;
        }
        f.write_str("}")
    }
}

/// Shorthand for building label sets in tests and fixtures.
#[macro_export]
macro_rules! labels {
    () => { $crate::LabelSet::new() };
    ($($l:expr),+ $(,)?) => { [$($l),+].into_iter().collect::<$crate::LabelSet>() };
}
