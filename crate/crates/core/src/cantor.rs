//! Points and cylinders of the Cantor space `{0,1}^ω`.
//!
//! Points are eventually periodic sequences kept in a canonical form (minimal
//! period, then minimal preperiod), so structural equality is point equality.
//! The metric is the first-difference metric `d(x, y) = 2^-(i+1)` where `i` is
//! the first index at which `x` and `y` differ.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// An eventually periodic binary sequence `pre · period^ω`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CantorPoint {
    pre: Vec<bool>,
    period: Vec<bool>,
}

impl CantorPoint {
    pub fn new(pre: Vec<bool>, period: Vec<bool>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidInput("period must be nonempty".into()));
        }
        Ok(Self::canonical(pre, period))
    }

    fn canonical(mut pre: Vec<bool>, mut period: Vec<bool>) -> Self {
        let len = period.len();
        if let Some(p) = (1..=len)
            .filter(|p| len % p == 0)
            .find(|&p| (p..len).all(|i| period[i] == period[i - p]))
        {
            period.truncate(p);
        }
        while let Some(&last) = pre.last() {
            if last != *period.last().unwrap() {
                break;
            }
            pre.pop();
            period.rotate_right(1);
        }
        CantorPoint { pre, period }
    }

    /// The all-zero sequence, also the identity of the dyadic group.
    pub fn zeros() -> Self {
        CantorPoint {
            pre: Vec::new(),
            period: vec![false],
        }
    }

    pub fn ones() -> Self {
        CantorPoint {
            pre: Vec::new(),
            period: vec![true],
        }
    }

    /// `prefix` followed by the all-zero tail.
    pub fn from_prefix(prefix: &[bool]) -> Self {
        Self::canonical(prefix.to_vec(), vec![false])
    }

    pub fn preperiod(&self) -> &[bool] {
        &self.pre
    }

    pub fn period(&self) -> &[bool] {
        &self.period
    }

    pub fn bit(&self, i: usize) -> bool {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<bool> {
        (0..len).map(|i| self.bit(i)).collect()
    }

    /// Length of the shortest prefix after which every bit is zero.
    pub fn support_depth(&self) -> Option<usize> {
        (self.period == [false]).then_some(self.pre.len())
    }

    /// First index where the sequences differ, `None` if equal.
    pub fn first_difference(&self, other: &CantorPoint) -> Option<usize> {
        if self == other {
            return None;
        }
        let bound = self.pre.len().max(other.pre.len())
            + lcm(self.period.len(), other.period.len());
        (0..bound).find(|&i| self.bit(i) != other.bit(i))
    }

    /// Number of leading ones; `None` for the all-ones sequence.
    pub fn leading_ones(&self) -> Option<usize> {
        if self.period.iter().all(|&b| b) && self.pre.iter().all(|&b| b) {
            return None;
        }
        (0..).find(|&i| !self.bit(i))
    }

    /// Coordinatewise XOR, the dyadic group operation.
    pub fn xor(&self, other: &CantorPoint) -> CantorPoint {
        let pre_len = self.pre.len().max(other.pre.len());
        let per_len = lcm(self.period.len(), other.period.len());
        let bit = |i: usize| self.bit(i) ^ other.bit(i);
        let pre = (0..pre_len).map(bit).collect();
        let period = (pre_len..pre_len + per_len).map(bit).collect();
        Self::canonical(pre, period)
    }

    /// Canonical order: finitely supported points first, by support depth and
    /// then lexicographically; the rest by representation length and bits.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        let key = |p: &CantorPoint| match p.support_depth() {
            Some(d) => (0usize, d),
            None => (1, p.pre.len() + p.period.len()),
        };
        key(self)
            .cmp(&key(other))
            .then_with(|| self.pre.len().cmp(&other.pre.len()))
            .then_with(|| self.pre.cmp(&other.pre))
            .then_with(|| self.period.cmp(&other.period))
    }
}

impl Ord for CantorPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(other)
    }
}

impl PartialOrd for CantorPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub(crate) fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub(crate) fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("`{s}` is not a bit string"))),
        })
        .collect()
}

/// `110(0)`: preperiod `110`, period `0`.
impl fmt::Display for CantorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({})",
            bits_to_string(&self.pre),
            bits_to_string(&self.period)
        )
    }
}

impl fmt::Debug for CantorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `pre(period)`; a bare bit string means a zero tail.
impl FromStr for CantorPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('(') {
            Some((pre, rest)) => {
                let period = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("unterminated period in `{s}`")))?;
                let period = parse_bits(period)?;
                if period.is_empty() {
                    return Err(Error::Parse(format!("empty period in `{s}`")));
                }
                Ok(Self::canonical(parse_bits(pre)?, period))
            }
            None => Ok(Self::from_prefix(&parse_bits(s)?)),
        }
    }
}

/// `d(x, y) = 2^-(i+1)` for the first differing index `i`, 0 if equal.
pub fn point_dist(x: &CantorPoint, y: &CantorPoint) -> Dyadic {
    match x.first_difference(y) {
        None => Dyadic::ZERO,
        Some(i) => Dyadic::pow2_neg(i as u32 + 1),
    }
}

/// All sequences extending a finite prefix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    prefix: Vec<bool>,
}

impl Cylinder {
    pub fn new(prefix: Vec<bool>) -> Self {
        Cylinder { prefix }
    }

    pub fn whole() -> Self {
        Cylinder { prefix: Vec::new() }
    }

    pub fn prefix(&self) -> &[bool] {
        &self.prefix
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    pub fn contains(&self, p: &CantorPoint) -> bool {
        self.prefix.iter().enumerate().all(|(i, &b)| p.bit(i) == b)
    }

    /// True if `self ⊆ other`.
    pub fn is_within(&self, other: &Cylinder) -> bool {
        self.prefix.starts_with(&other.prefix)
    }

    pub fn is_disjoint(&self, other: &Cylinder) -> bool {
        !self.is_within(other) && !other.is_within(self)
    }

    /// `2^-(m+1)` for prefix length `m`.
    pub fn diameter(&self) -> Dyadic {
        Dyadic::pow2_neg(self.depth() as u32 + 1)
    }

    /// Prefix followed by the all-zero tail.
    pub fn representative(&self) -> CantorPoint {
        CantorPoint::from_prefix(&self.prefix)
    }

    /// Position in the canonical enumeration (by length, then lexicographic).
    pub fn basis_index(&self) -> u64 {
        let offset = self
            .prefix
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64);
        (1u64 << self.depth()) - 1 + offset
    }

    /// Index of this cylinder among the `2^depth` cylinders of its depth.
    pub fn lex_index(&self) -> usize {
        self.prefix
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn from_lex_index(depth: usize, index: usize) -> Self {
        Cylinder {
            prefix: (0..depth).map(|i| (index >> (depth - 1 - i)) & 1 == 1).collect(),
        }
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", bits_to_string(&self.prefix))
    }
}

impl fmt::Debug for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The `k`-th basic open set: cylinders enumerated by prefix length, then
/// lexicographically. `0 ↦ ""`, `1 ↦ "0"`, `2 ↦ "1"`, `3 ↦ "00"`, ...
pub fn basis_cylinder(k: u64) -> Cylinder {
    let depth = (64 - (k + 1).leading_zeros() - 1) as usize;
    let offset = (k + 1 - (1u64 << depth)) as usize;
    Cylinder::from_lex_index(depth, offset)
}

/// The `2^d` cylinders of depth `d` in lexicographic order.
pub fn partition_at_depth(d: usize) -> Vec<Cylinder> {
    (0..1usize << d)
        .map(|i| Cylinder::from_lex_index(d, i))
        .collect()
}

/// Canonical representatives (prefix + zero tail) of every depth-`d` cylinder.
#[derive(Clone, Debug)]
pub struct ProbeGrid {
    depth: usize,
    representatives: Vec<CantorPoint>,
}

impl ProbeGrid {
    pub fn new(depth: usize) -> Self {
        ProbeGrid {
            depth,
            representatives: partition_at_depth(depth)
                .iter()
                .map(Cylinder::representative)
                .collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn representatives(&self) -> &[CantorPoint] {
        &self.representatives
    }
}
