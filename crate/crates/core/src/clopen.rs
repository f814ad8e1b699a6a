//! Clopen subsets of Cantor space in a canonical binary-trie normal form.
//!
//! A clopen set is a finite union of cylinders. The trie collapses any node
//! whose two children are both full (or both empty), so two sets are equal
//! iff their tries are structurally equal. [`ClosedSet`] extends this with a
//! finite set of isolated points, which is all the closed sets the strip
//! construction produces.

use std::fmt;

use crate::cantor::{bits_to_string, parse_bits, CantorPoint, Cylinder};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Trie {
    Empty,
    Full,
    Split(Box<Trie>, Box<Trie>),
}

impl Trie {
    fn split(zero: Trie, one: Trie) -> Trie {
        match (&zero, &one) {
            (Trie::Empty, Trie::Empty) => Trie::Empty,
            (Trie::Full, Trie::Full) => Trie::Full,
            _ => Trie::Split(Box::new(zero), Box::new(one)),
        }
    }

    fn cylinder(prefix: &[bool]) -> Trie {
        match prefix.split_first() {
            None => Trie::Full,
            Some((&false, rest)) => Trie::split(Trie::cylinder(rest), Trie::Empty),
            Some((&true, rest)) => Trie::split(Trie::Empty, Trie::cylinder(rest)),
        }
    }

    fn union(&self, other: &Trie) -> Trie {
        match (self, other) {
            (Trie::Full, _) | (_, Trie::Full) => Trie::Full,
            (Trie::Empty, t) | (t, Trie::Empty) => t.clone(),
            (Trie::Split(a0, a1), Trie::Split(b0, b1)) => Trie::split(a0.union(b0), a1.union(b1)),
        }
    }

    fn intersect(&self, other: &Trie) -> Trie {
        match (self, other) {
            (Trie::Empty, _) | (_, Trie::Empty) => Trie::Empty,
            (Trie::Full, t) | (t, Trie::Full) => t.clone(),
            (Trie::Split(a0, a1), Trie::Split(b0, b1)) => {
                Trie::split(a0.intersect(b0), a1.intersect(b1))
            }
        }
    }

    fn complement(&self) -> Trie {
        match self {
            Trie::Empty => Trie::Full,
            Trie::Full => Trie::Empty,
            Trie::Split(a, b) => Trie::split(a.complement(), b.complement()),
        }
    }

    fn contains(&self, p: &CantorPoint, i: usize) -> bool {
        match self {
            Trie::Empty => false,
            Trie::Full => true,
            Trie::Split(a, b) => {
                if p.bit(i) {
                    b.contains(p, i + 1)
                } else {
                    a.contains(p, i + 1)
                }
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            Trie::Split(a, b) => 1 + a.depth().max(b.depth()),
            _ => 0,
        }
    }

    fn collect(&self, prefix: &mut Vec<bool>, out: &mut Vec<Cylinder>) {
        match self {
            Trie::Empty => {}
            Trie::Full => out.push(Cylinder::new(prefix.clone())),
            Trie::Split(a, b) => {
                prefix.push(false);
                a.collect(prefix, out);
                prefix.pop();
                prefix.push(true);
                b.collect(prefix, out);
                prefix.pop();
            }
        }
    }

    fn restrict(&self, prefix: &[bool]) -> &Trie {
        match (self, prefix.split_first()) {
            (Trie::Split(a, b), Some((&bit, rest))) => {
                if bit {
                    b.restrict(rest)
                } else {
                    a.restrict(rest)
                }
            }
            (t, _) => t,
        }
    }
}

/// A clopen subset of `{0,1}^ω`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet(Trie);

impl ClopenSet {
    pub fn empty() -> Self {
        ClopenSet(Trie::Empty)
    }

    pub fn whole() -> Self {
        ClopenSet(Trie::Full)
    }

    pub fn from_cylinder(c: &Cylinder) -> Self {
        ClopenSet(Trie::cylinder(c.prefix()))
    }

    pub fn from_cylinders<'a>(cs: impl IntoIterator<Item = &'a Cylinder>) -> Self {
        cs.into_iter().fold(Self::empty(), |acc, c| {
            acc.union(&Self::from_cylinder(c))
        })
    }

    pub fn union(&self, other: &Self) -> Self {
        ClopenSet(self.0.union(&other.0))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        ClopenSet(self.0.intersect(&other.0))
    }

    pub fn complement(&self) -> Self {
        ClopenSet(self.0.complement())
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersect(&other.complement())
    }

    pub fn contains_point(&self, p: &CantorPoint) -> bool {
        self.0.contains(p, 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == Trie::Empty
    }

    pub fn is_whole(&self) -> bool {
        self.0 == Trie::Full
    }

    pub fn meets_cylinder(&self, c: &Cylinder) -> bool {
        !self.intersect(&Self::from_cylinder(c)).is_empty()
    }

    /// True if the cylinder lies entirely inside the set.
    pub fn covers_cylinder(&self, c: &Cylinder) -> bool {
        *self.0.restrict(c.prefix()) == Trie::Full
    }

    /// Maximal cylinders of the normal form, in lexicographic order. They are
    /// pairwise disjoint.
    pub fn cylinders(&self) -> Vec<Cylinder> {
        let mut out = Vec::new();
        self.0.collect(&mut Vec::new(), &mut out);
        out
    }

    /// Depth of the deepest cylinder in the normal form.
    pub fn depth(&self) -> usize {
        self.0.depth()
    }

    /// Some point of the set (the representative of its first cylinder).
    pub fn witness(&self) -> Option<CantorPoint> {
        self.cylinders().first().map(Cylinder::representative)
    }

    /// Representatives of the depth-`d` cylinders contained in the set.
    /// Requires `d >= self.depth()` for every cylinder to be sampled.
    pub fn grid_points(&self, d: usize) -> Vec<CantorPoint> {
        let mut out = Vec::new();
        for c in self.cylinders() {
            let free = d.saturating_sub(c.depth());
            for i in 0..1usize << free {
                let mut prefix = c.prefix().to_vec();
                prefix.extend(Cylinder::from_lex_index(free, i).prefix());
                out.push(CantorPoint::from_prefix(&prefix));
            }
        }
        out
    }
}

/// `{110, 0}`; a leading `!` denotes the complement. `{}` is empty and `!{}`
/// the whole space.
impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .cylinders()
            .iter()
            .map(|c| {
                if c.depth() == 0 {
                    "*".to_string()
                } else {
                    bits_to_string(c.prefix())
                }
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for ClopenSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negate, body) = match s.strip_prefix('!') {
            Some(rest) => (true, rest.trim()),
            None => (false, s),
        };
        let inner = body
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("clopen set `{s}` must be braced")))?;
        let mut set = ClopenSet::empty();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let prefix = if part == "*" { Vec::new() } else { parse_bits(part)? };
            set = set.union(&ClopenSet::from_cylinder(&Cylinder::new(prefix)));
        }
        Ok(if negate { set.complement() } else { set })
    }
}

/// A closed set of the form `clopen ∪ {finitely many points}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClosedSet {
    clopen: ClopenSet,
    points: Vec<CantorPoint>,
}

impl ClosedSet {
    pub fn new(clopen: ClopenSet, points: impl IntoIterator<Item = CantorPoint>) -> Self {
        let mut points: Vec<CantorPoint> = points
            .into_iter()
            .filter(|p| !clopen.contains_point(p))
            .collect();
        points.sort();
        points.dedup();
        ClosedSet { clopen, points }
    }

    pub fn empty() -> Self {
        Self::new(ClopenSet::empty(), [])
    }

    pub fn point(p: CantorPoint) -> Self {
        Self::new(ClopenSet::empty(), [p])
    }

    pub fn clopen_part(&self) -> &ClopenSet {
        &self.clopen
    }

    pub fn isolated_points(&self) -> &[CantorPoint] {
        &self.points
    }

    pub fn is_clopen(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.clopen.is_empty() && self.points.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(
            self.clopen.union(&other.clopen),
            self.points.iter().chain(&other.points).cloned(),
        )
    }

    pub fn contains_point(&self, p: &CantorPoint) -> bool {
        self.clopen.contains_point(p) || self.points.contains(p)
    }

    pub fn meets_cylinder(&self, c: &Cylinder) -> bool {
        self.clopen.meets_cylinder(c) || self.points.iter().any(|p| c.contains(p))
    }

    pub fn meets(&self, other: &Self) -> bool {
        !self.clopen.intersect(&other.clopen).is_empty()
            || self.points.iter().any(|p| other.contains_point(p))
            || other.points.iter().any(|p| self.clopen.contains_point(p))
    }

    pub fn depth(&self) -> usize {
        self.clopen.depth()
    }

    /// Grid representatives of the clopen part plus the isolated points.
    pub fn grid_points(&self, d: usize) -> Vec<CantorPoint> {
        let mut out = self.clopen.grid_points(d);
        out.extend(self.points.iter().cloned());
        out
    }
}

impl From<ClopenSet> for ClosedSet {
    fn from(c: ClopenSet) -> Self {
        Self::new(c, [])
    }
}

impl fmt::Display for ClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clopen)?;
        for p in &self.points {
            write!(f, " + {p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(s: &str) -> ClopenSet {
        s.parse().unwrap()
    }

    #[test]
    fn algebra_examples() {
        let a = set("{110, 0}");
        assert_eq!(a.complement().complement(), a);
        assert_eq!(set("{0}").intersect(&set("{01}")), set("{01}"));
        assert!(set("{110}").is_subset(&set("{11}")));
        assert!(!set("{11}").is_subset(&set("{110}")));
        assert_eq!(set("{0, 1}"), ClopenSet::whole());
        assert_eq!(set("!{}"), ClopenSet::whole());
        assert_eq!(set("!{0}"), set("{1}"));
        assert_eq!(set("{10, 11, 0}").to_string(), "{*}");
        assert_eq!(set("{110, 0}").to_string(), "{0, 110}");
    }

    #[test]
    fn normal_form_cylinders_are_disjoint() {
        let a = set("{0, 101, 1101, 111}");
        let cs = a.cylinders();
        for (i, c) in cs.iter().enumerate() {
            for d in &cs[i + 1..] {
                assert!(c.is_disjoint(d));
            }
        }
        assert_eq!(a.depth(), 4);
    }

    #[test]
    fn closed_set_absorbs_points() {
        let c = ClosedSet::new(set("{1}"), [CantorPoint::ones(), CantorPoint::zeros()]);
        assert_eq!(c.isolated_points(), &[CantorPoint::zeros()]);
        assert!(c.meets_cylinder(&Cylinder::new(vec![false, false])));
        assert!(!c.meets_cylinder(&Cylinder::new(vec![false, true])));
    }

    fn clopen() -> impl Strategy<Value = ClopenSet> {
        prop::collection::vec(prop::collection::vec(any::<bool>(), 0..5), 0..5).prop_map(|ps| {
            ClopenSet::from_cylinders(&ps.into_iter().map(Cylinder::new).collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn set_semantics_on_grid(a in clopen(), b in clopen()) {
            for p in crate::cantor::ProbeGrid::new(5).representatives() {
                let p = p.clone();
                prop_assert_eq!(a.union(&b).contains_point(&p), a.contains_point(&p) || b.contains_point(&p));
                prop_assert_eq!(a.intersect(&b).contains_point(&p), a.contains_point(&p) && b.contains_point(&p));
                prop_assert_eq!(a.complement().contains_point(&p), !a.contains_point(&p));
            }
            prop_assert_eq!(a.is_subset(&b), a.union(&b) == b);
            prop_assert_eq!(a.to_string().parse::<ClopenSet>().unwrap(), a);
        }
    }

}
