//! Exact combinatorial primitives over small ground sets `[H] = {1, ..., H}`.
//!
//! Subsets are stored as 64-bit masks, so ground sets are limited to 64
//! elements. All ordering is lexicographic on the ascending member tuple,
//! which fixes the row and column order of every generated array.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

/// Largest supported ground set.
pub const MAX_GROUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatError {
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("cannot parse relay set {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// `n` choose `k`, exactly. Zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k.min(n - k)))
}

/// `binomial` narrowed to `usize`, for sizes of things that are actually
/// enumerated. Panics if the value does not fit.
pub fn binomial_usize(n: usize, k: usize) -> usize {
    binomial(n as u64, k as u64)
        .to_usize()
        .expect("binomial coefficient exceeds usize")
}

/// A subset of relays `{1, ..., 64}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RelaySet(u64);

impl RelaySet {
    pub const EMPTY: RelaySet = RelaySet(0);

    /// Builds a set from 1-based relay ids. Duplicates collapse.
    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Result<Self, CombinatError> {
        let mut bits = 0u64;
        for m in members {
            if m == 0 || m > MAX_GROUND {
                return Err(CombinatError::InvalidArguments(format!(
                    "relay id {m} outside 1..={MAX_GROUND}"
                )));
            }
            bits |= 1 << (m - 1);
        }
        Ok(RelaySet(bits))
    }

    /// Panicking variant of [`RelaySet::from_members`] for literals in tests and fixtures.
    pub fn of(members: &[usize]) -> Self {
        Self::from_members(members.iter().copied()).expect("relay ids in range")
    }

    pub fn from_bits(bits: u64) -> Self {
        RelaySet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, relay: usize) -> bool {
        (1..=MAX_GROUND).contains(&relay) && self.0 & (1 << (relay - 1)) != 0
    }

    /// Largest member, or 0 for the empty set.
    pub fn max_member(self) -> usize {
        (u64::BITS - self.0.leading_zeros()) as usize
    }

    /// Members in ascending order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(self, other: RelaySet) -> RelaySet {
        RelaySet(self.0 | other.0)
    }

    pub fn intersection(self, other: RelaySet) -> RelaySet {
        RelaySet(self.0 & other.0)
    }

    pub fn difference(self, other: RelaySet) -> RelaySet {
        RelaySet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: RelaySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: RelaySet) -> bool {
        self.0 & other.0 == 0
    }

    /// Intersection of every set in `sets`; `None` for an empty sequence.
    pub fn intersect_all<I: IntoIterator<Item = RelaySet>>(sets: I) -> Option<RelaySet> {
        sets.into_iter().reduce(RelaySet::intersection)
    }

    /// Concatenated digits, e.g. `123`. Only unambiguous when every member is below 10.
    pub fn compact(self) -> String {
        if self.iter().all(|m| m < 10) {
            self.iter().map(|m| m.to_string()).collect()
        } else {
            self.to_string()
        }
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let low = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(low + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

impl Ord for RelaySet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for RelaySet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for RelaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().join(","))
    }
}

/// Dash-joined ascending ids (`1-2-3`); the empty set renders as `-`.
impl fmt::Display for RelaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        write!(f, "{}", self.iter().join("-"))
    }
}

impl FromStr for RelaySet {
    type Err = CombinatError;

    /// Strict parse of the dash-joined form: ids must be strictly ascending.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| CombinatError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        if text == "-" {
            return Ok(RelaySet::EMPTY);
        }
        let mut prev = 0usize;
        let mut bits = 0u64;
        for part in text.split('-') {
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(fail("expected dash-separated decimal ids"));
            }
            if part.len() > 1 && part.starts_with('0') {
                return Err(fail("leading zero"));
            }
            let id: usize = part.parse().map_err(|_| fail("id out of range"))?;
            if id == 0 || id > MAX_GROUND {
                return Err(fail("id out of range"));
            }
            if id <= prev {
                return Err(fail("ids must be strictly ascending"));
            }
            prev = id;
            bits |= 1 << (id - 1);
        }
        Ok(RelaySet(bits))
    }
}

/// The `k`-subsets of `[H]` in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetOrder {
    ground_size: usize,
    subset_size: usize,
}

impl SubsetOrder {
    pub fn new(ground_size: usize, subset_size: usize) -> Result<Self, CombinatError> {
        if ground_size > MAX_GROUND {
            return Err(CombinatError::InvalidArguments(format!(
                "ground set size {ground_size} exceeds {MAX_GROUND}"
            )));
        }
        if subset_size > ground_size {
            return Err(CombinatError::InvalidArguments(format!(
                "subset size {subset_size} exceeds ground set size {ground_size}"
            )));
        }
        Ok(SubsetOrder {
            ground_size,
            subset_size,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn subset_size(&self) -> usize {
        self.subset_size
    }

    pub fn len(&self) -> usize {
        binomial_usize(self.ground_size, self.subset_size)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = RelaySet> {
        (1..=self.ground_size)
            .combinations(self.subset_size)
            .map(|c| RelaySet::of(&c))
    }

    /// Position of `set` in the enumeration, or `None` if it is not a
    /// `k`-subset of the ground set.
    pub fn rank(&self, set: RelaySet) -> Option<usize> {
        if set.len() != self.subset_size || set.max_member() > self.ground_size {
            return None;
        }
        let (n, k) = (self.ground_size, self.subset_size);
        let mut rank = 0usize;
        let mut next = 1usize;
        for (i, m) in set.iter().enumerate() {
            // subsets that agree on the first i members and put a smaller value at slot i
            for v in next..m {
                rank += binomial_usize(n - v, k - i - 1);
            }
            next = m + 1;
        }
        Some(rank)
    }

    pub fn unrank(&self, mut rank: usize) -> Option<RelaySet> {
        if rank >= self.len() {
            return None;
        }
        let (n, k) = (self.ground_size, self.subset_size);
        let mut members = Vec::with_capacity(k);
        let mut v = 1usize;
        for i in 0..k {
            loop {
                let block = binomial_usize(n - v, k - i - 1);
                if rank < block {
                    members.push(v);
                    v += 1;
                    break;
                }
                rank -= block;
                v += 1;
            }
        }
        Some(RelaySet::of(&members))
    }
}

/// All `k`-subsets of `[H]`, lexicographic.
pub fn enumerate_subsets(
    ground_size: usize,
    subset_size: usize,
) -> Result<Vec<RelaySet>, CombinatError> {
    Ok(SubsetOrder::new(ground_size, subset_size)?.iter().collect())
}

/// Signed-argument front end for callers that take sizes from user input.
pub fn enumerate_subsets_checked(
    ground_size: i64,
    subset_size: i64,
) -> Result<Vec<RelaySet>, CombinatError> {
    if ground_size < 0 || subset_size < 0 {
        return Err(CombinatError::InvalidArguments(format!(
            "negative size in ({ground_size}, {subset_size})"
        )));
    }
    enumerate_subsets(ground_size as usize, subset_size as usize)
}
