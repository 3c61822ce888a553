//! Structure identifiers and Theiler stages.

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

/// Number of Theiler stages in mouse development.
pub const STAGE_COUNT: u8 = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("malformed structure id {0:?}: expected EMAP:<n> or EMAPA:<n>")]
    MalformedId(alloc::string::String),
    #[error("stage {0} outside 1..=26")]
    StageOutOfRange(i64),
    #[error("malformed stage token {0:?}")]
    MalformedStage(alloc::string::String),
}

/// Which identifier space an id lives in.
///
/// Staged ids (`EMAP:`) name one structure at one stage; abstract ids
/// (`EMAPA:`) name the structure across every stage it exists in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Namespace {
    Staged,
    Abstract,
}

impl Namespace {
    pub fn prefix(self) -> &'static str {
        match self {
            Namespace::Staged => "EMAP",
            Namespace::Abstract => "EMAPA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StructureId {
    pub namespace: Namespace,
    pub number: u64,
}

impl StructureId {
    pub const fn staged(number: u64) -> Self {
        StructureId { namespace: Namespace::Staged, number }
    }

    pub const fn abstract_id(number: u64) -> Self {
        StructureId { namespace: Namespace::Abstract, number }
    }

    pub fn is_abstract(&self) -> bool {
        self.namespace == Namespace::Abstract
    }
}

impl fmt::Display for StructureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.namespace.prefix(), self.number)
    }
}

impl FromStr for StructureId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || IdError::MalformedId(s.into());
        let (prefix, digits) = s.split_once(':').ok_or_else(malformed)?;
        let namespace = match prefix {
            "EMAP" => Namespace::Staged,
            "EMAPA" => Namespace::Abstract,
            _ => return Err(malformed()),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let number = digits.parse().map_err(|_| malformed())?;
        Ok(StructureId { namespace, number })
    }
}

/// A Theiler stage, 1 through 26.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StageNumber(u8);

impl StageNumber {
    pub const FIRST: StageNumber = StageNumber(1);
    pub const LAST: StageNumber = StageNumber(STAGE_COUNT);

    pub fn new(value: i64) -> Result<Self, IdError> {
        if (1..=STAGE_COUNT as i64).contains(&value) {
            Ok(StageNumber(value as u8))
        } else {
            Err(IdError::StageOutOfRange(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl DoubleEndedIterator<Item = StageNumber> {
        (1..=STAGE_COUNT).map(StageNumber)
    }

    pub fn next(self) -> Option<StageNumber> {
        (self.0 < STAGE_COUNT).then(|| StageNumber(self.0 + 1))
    }

    pub fn prev(self) -> Option<StageNumber> {
        (self.0 > 1).then(|| StageNumber(self.0 - 1))
    }
}

impl fmt::Display for StageNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for StageNumber {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: i64 = s.trim().parse().map_err(|_| IdError::MalformedStage(s.into()))?;
        StageNumber::new(v)
    }
}

/// A set of stages, stored as a bitmask (bit `n` set means stage `n` is a member).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StageSet(u32);

impl StageSet {
    pub const EMPTY: StageSet = StageSet(0);

    pub fn all() -> StageSet {
        StageSet::range(StageNumber::FIRST, StageNumber::LAST)
    }

    /// Inclusive range; empty when `from > to`.
    pub fn range(from: StageNumber, to: StageNumber) -> StageSet {
        let mut set = StageSet::EMPTY;
        for s in from.0..=to.0 {
            set.0 |= 1 << s;
        }
        set
    }

    pub fn insert(&mut self, stage: StageNumber) {
        self.0 |= 1 << stage.0;
    }

    pub fn contains(&self, stage: StageNumber) -> bool {
        self.0 & (1 << stage.0) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(&self, other: &StageSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(&self, other: &StageSet) -> StageSet {
        StageSet(self.0 | other.0)
    }

    pub fn difference(&self, other: &StageSet) -> StageSet {
        StageSet(self.0 & !other.0)
    }

    pub fn first(&self) -> Option<StageNumber> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = StageNumber> + '_ {
        StageNumber::all().filter(move |s| self.contains(*s))
    }

    /// Parses one stage token as used in the anatomy file: either a single
    /// stage (`"12"`) or an inclusive interval (`"16-26"`).
    pub fn parse_token(token: &str) -> Result<StageSet, IdError> {
        let token = token.trim();
        match token.split_once('-') {
            Some((a, b)) => {
                let from: StageNumber = a.parse()?;
                let to: StageNumber = b.parse()?;
                if from > to {
                    return Err(IdError::MalformedStage(token.into()));
                }
                Ok(StageSet::range(from, to))
            }
            None => {
                let mut set = StageSet::EMPTY;
                set.insert(token.parse()?);
                Ok(set)
            }
        }
    }
}

impl FromIterator<StageNumber> for StageSet {
    fn from_iter<I: IntoIterator<Item = StageNumber>>(iter: I) -> Self {
        let mut set = StageSet::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn renders_both_namespaces() {
        assert_eq!(StructureId::staged(315).to_string(), "EMAP:315");
        assert_eq!(StructureId::abstract_id(16105).to_string(), "EMAPA:16105");
    }

    #[test]
    fn rejects_malformed_ids() {
        for bad in ["", "EMAP", "EMAP:", "EMAPB:1", "emap:1", "EMAP:-3", "EMAP:1a", "EMAP: 1"] {
            assert!(bad.parse::<StructureId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn stage_bounds() {
        assert!(StageNumber::new(0).is_err());
        assert!(StageNumber::new(27).is_err());
        assert_eq!(StageNumber::new(26).unwrap(), StageNumber::LAST);
        assert_eq!(StageNumber::LAST.next(), None);
        assert_eq!(StageNumber::FIRST.prev(), None);
    }

    #[test]
    fn stage_tokens() {
        let liver = StageSet::parse_token("16-26").unwrap();
        assert_eq!(liver.len(), 11);
        assert_eq!(liver.first().unwrap().get(), 16);
        assert_eq!(StageSet::parse_token("12").unwrap().len(), 1);
        assert!(StageSet::parse_token("20-12").is_err());
        assert!(StageSet::parse_token("0-3").is_err());
        assert!(StageSet::parse_token("x").is_err());
    }

    proptest! {
        #[test]
        fn id_round_trip(staged in any::<bool>(), number in any::<u64>()) {
            let id = if staged { StructureId::staged(number) } else { StructureId::abstract_id(number) };
            prop_assert_eq!(id.to_string().parse::<StructureId>().unwrap(), id);
        }

        #[test]
        fn stage_set_subset_matches_members(a in 0u32..(1 << 27), b in 0u32..(1 << 27)) {
            let a = StageSet(a & !1);
            let b = StageSet(b & !1);
            let by_members = a.iter().all(|s| b.contains(s));
            prop_assert_eq!(a.is_subset(&b), by_members);
        }
    }
}
