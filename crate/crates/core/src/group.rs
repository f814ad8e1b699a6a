//! Metric groups with a bounded left-invariant metric.
//!
//! Three families are provided:
//!
//! * `dyadic`: the compact group `Z_2^ω` of binary sequences under XOR, with
//!   the first-difference metric `2^-(i+1)` (bi-invariant, ultrametric).
//! * finite groups given by a multiplication table (e.g. `cyclic:<n>`), with
//!   the discrete metric scaled to `1/2`.
//! * `real`: the additive reals restricted to dyadic rational carriers, with
//!   the bounded metric `min(|a - b|, 1/2)`.
//!
//! All metric values are exact dyadic rationals bounded by `1/2`.

use std::fmt;
use std::sync::Arc;

use crate::cantor::{CantorPoint, Cylinder};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Half-width of the window the `real` group enumerates densely.
pub const REAL_ENUMERATION_RANGE: i64 = 4;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Bits(CantorPoint),
    Index(u32),
    Real(Dyadic),
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Bits(p) => write!(f, "{p}"),
            GroupElement::Index(i) => write!(f, "{i}"),
            GroupElement::Real(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite group from its Cayley table; index 0 is the identity.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<u32>>,
    inverses: Vec<u32>,
}

impl FiniteGroup {
    pub fn from_table(name: impl Into<String>, table: Vec<Vec<u32>>) -> Result<Self> {
        let n = table.len();
        let bad = |msg: &str| Error::InvalidInput(format!("multiplication table: {msg}"));
        if n == 0 || table.iter().any(|row| row.len() != n) {
            return Err(bad("must be a nonempty square table"));
        }
        if table.iter().flatten().any(|&v| v as usize >= n) {
            return Err(bad("entry out of range"));
        }
        for (i, row) in table.iter().enumerate() {
            if table[0][i] != i as u32 || row[0] != i as u32 {
                return Err(bad("element 0 must be the identity"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let ab = table[a][b] as usize;
                    let bc = table[b][c] as usize;
                    if table[ab][c] != table[a][bc] {
                        return Err(bad("operation is not associative"));
                    }
                }
            }
        }
        let inverses = (0..n)
            .map(|a| {
                (0..n as u32)
                    .find(|&b| table[a][b as usize] == 0 && table[b as usize][a] == 0)
                    .ok_or_else(|| bad("element without inverse"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteGroup {
            name: name.into(),
            table,
            inverses,
        })
    }

    pub fn cyclic(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("cyclic group order must be positive".into()));
        }
        let table = (0..order)
            .map(|a| (0..order).map(|b| (a + b) % order).collect())
            .collect();
        Self::from_table(format!("cyclic:{order}"), table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }
}

/// A metric group instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupSpec {
    Dyadic,
    Finite(Arc<FiniteGroup>),
    Real,
}

impl GroupSpec {
    pub fn cyclic(order: u32) -> Result<Self> {
        Ok(GroupSpec::Finite(Arc::new(FiniteGroup::cyclic(order)?)))
    }

    /// Parses `dyadic`, `cyclic:<order>` or `real`.
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "dyadic" => Ok(GroupSpec::Dyadic),
            "real" => Ok(GroupSpec::Real),
            _ => {
                let order = name
                    .strip_prefix("cyclic:")
                    .and_then(|o| o.trim().parse().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown group `{name}`")))?;
                Self::cyclic(order)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            GroupSpec::Dyadic => "dyadic".into(),
            GroupSpec::Finite(g) => g.name.clone(),
            GroupSpec::Real => "real".into(),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupSpec::Dyadic => GroupElement::Bits(CantorPoint::zeros()),
            GroupSpec::Finite(_) => GroupElement::Index(0),
            GroupSpec::Real => GroupElement::Real(Dyadic::ZERO),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::Finite(g) => {
                let n = g.order();
                (0..n).all(|a| (0..n).all(|b| g.table[a][b] == g.table[b][a]))
            }
            _ => true,
        }
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        matches!(
            (self, e),
            (GroupSpec::Dyadic, GroupElement::Bits(_)) | (GroupSpec::Real, GroupElement::Real(_))
        ) || matches!((self, e), (GroupSpec::Finite(g), GroupElement::Index(i)) if (*i as usize) < g.order())
    }

    fn check(&self, e: &GroupElement) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "element {e} is not a member of group {}",
                self.name()
            )))
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (self, a, b) {
            (GroupSpec::Dyadic, GroupElement::Bits(x), GroupElement::Bits(y)) => {
                GroupElement::Bits(x.xor(y))
            }
            (GroupSpec::Finite(g), GroupElement::Index(i), GroupElement::Index(j)) => {
                GroupElement::Index(g.table[*i as usize][*j as usize])
            }
            (GroupSpec::Real, GroupElement::Real(x), GroupElement::Real(y)) => {
                GroupElement::Real(*x + *y)
            }
            _ => unreachable!("membership checked"),
        })
    }

    pub fn inv(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(match (self, a) {
            (GroupSpec::Dyadic, GroupElement::Bits(_)) => a.clone(),
            (GroupSpec::Finite(g), GroupElement::Index(i)) => {
                GroupElement::Index(g.inverses[*i as usize])
            }
            (GroupSpec::Real, GroupElement::Real(x)) => GroupElement::Real(-*x),
            _ => unreachable!("membership checked"),
        })
    }

    /// `a⁻¹·b`.
    pub fn left_quotient(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.mul(&self.inv(a)?, b)
    }

    pub fn dist(&self, a: &GroupElement, b: &GroupElement) -> Result<Dyadic> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupElement::Bits(x), GroupElement::Bits(y)) => crate::cantor::point_dist(x, y),
            (GroupElement::Index(i), GroupElement::Index(j)) => {
                if i == j {
                    Dyadic::ZERO
                } else {
                    Dyadic::HALF
                }
            }
            (GroupElement::Real(x), GroupElement::Real(y)) => (*x - *y).abs().min(Dyadic::HALF),
            _ => unreachable!("membership checked"),
        })
    }

    /// `d(1, a)`.
    pub fn norm(&self, a: &GroupElement) -> Result<Dyadic> {
        self.dist(&self.identity(), a)
    }

    /// Finite dense approximation, increasing in `depth`, listed in canonical
    /// order (by the depth at which an element first appears, then
    /// lexicographically).
    pub fn dense_enumeration(&self, depth: usize) -> Vec<GroupElement> {
        match self {
            GroupSpec::Dyadic => {
                let mut out = vec![GroupElement::Bits(CantorPoint::zeros())];
                for d in 1..=depth {
                    // points of support depth exactly d: prefixes ending in 1
                    for i in 0..1usize << (d - 1) {
                        let mut prefix = Cylinder::from_lex_index(d - 1, i).prefix().to_vec();
                        prefix.push(true);
                        out.push(GroupElement::Bits(CantorPoint::from_prefix(&prefix)));
                    }
                }
                out
            }
            GroupSpec::Finite(g) => (0..g.order() as u32).map(GroupElement::Index).collect(),
            GroupSpec::Real => {
                let mut out = vec![GroupElement::Real(Dyadic::ZERO)];
                for d in 0..=depth as u32 {
                    // values first appearing at denominator 2^d, by magnitude
                    let limit = REAL_ENUMERATION_RANGE as i128 * (1i128 << d);
                    for k in 1..=limit {
                        let v = Dyadic::new(k, d);
                        if v.log2_denominator() == d {
                            out.push(GroupElement::Real(v));
                            out.push(GroupElement::Real(-v));
                        }
                    }
                }
                out
            }
        }
    }

    /// Membership of `g` in `U·f·U` for the open ball `U = {u : d(1,u) < eps}`.
    pub fn in_double_ball(&self, f: &GroupElement, g: &GroupElement, eps: Dyadic) -> Result<bool> {
        let h = self.left_quotient(f, g)?;
        match self {
            // U is a subgroup for a bi-invariant ultrametric and the group is
            // abelian, so U·f·U = f·U.
            GroupSpec::Dyadic => Ok(self.norm(&h)? < eps),
            GroupSpec::Real => {
                if eps > Dyadic::HALF {
                    return Ok(true);
                }
                let GroupElement::Real(x) = h else { unreachable!() };
                Ok(x.abs() < eps + eps)
            }
            GroupSpec::Finite(grp) => {
                let ball: Vec<GroupElement> = (0..grp.order() as u32)
                    .map(GroupElement::Index)
                    .filter(|u| self.norm(u).map(|n| n < eps).unwrap_or(false))
                    .collect();
                for u in &ball {
                    for v in &ball {
                        if self.mul(&self.mul(u, f)?, v)? == *g {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
        }
    }

    /// Parses an element literal; `e` is the identity in every group.
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let s = s.trim();
        if s == "e" {
            return Ok(self.identity());
        }
        let e = match self {
            GroupSpec::Dyadic => GroupElement::Bits(s.parse()?),
            GroupSpec::Finite(_) => GroupElement::Index(
                s.parse()
                    .map_err(|_| Error::Parse(format!("invalid finite-group element `{s}`")))?,
            ),
            GroupSpec::Real => GroupElement::Real(s.parse()?),
        };
        self.check(&e)?;
        Ok(e)
    }
}
