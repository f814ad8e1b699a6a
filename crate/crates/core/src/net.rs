//! Greedy maximal separated nets inside balls around the identity.
//!
//! `net(k)` is a maximal `2^-(k+2)`-separated subset of the closed ball
//! `B[2^-k]`, taken relative to a finite dense enumeration of the group.
//! The quantizer tower draws its increments at step `n → n+1` from `net(n)`.

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatedNet {
    pub scale: u32,
    pub radius: Dyadic,
    pub separation: Dyadic,
    pub elements: Vec<GroupElement>,
    pub enumeration_depth: usize,
}

/// Outcome of the three exact net checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetCheck {
    pub contained: bool,
    pub separated: bool,
    pub maximal: bool,
}

impl NetCheck {
    pub fn passed(&self) -> bool {
        self.contained && self.separated && self.maximal
    }
}

/// Scans `dense_enumeration(depth)` in canonical order and keeps every
/// candidate in `B[2^-k]` at distance `>= 2^-(k+2)` from all kept elements.
pub fn ball_net(group: &GroupSpec, k: u32, enumeration_depth: usize) -> Result<SeparatedNet> {
    let radius = Dyadic::pow2_neg(k);
    let separation = Dyadic::pow2_neg(k + 2);
    greedy_net(group, k, radius, separation, enumeration_depth)
}

/// Greedy net with explicit radius and separation.
pub fn greedy_net(
    group: &GroupSpec,
    scale: u32,
    radius: Dyadic,
    separation: Dyadic,
    enumeration_depth: usize,
) -> Result<SeparatedNet> {
    let candidates = group.dense_enumeration(enumeration_depth);
    if candidates.is_empty() {
        return Err(Error::EmptyEnumeration(format!(
            "group {} at depth {enumeration_depth}",
            group.name()
        )));
    }
    let mut elements: Vec<GroupElement> = Vec::new();
    for c in candidates {
        if group.norm(&c)? > radius {
            continue;
        }
        let far = elements
            .iter()
            .map(|e| group.dist(e, &c).map(|d| d >= separation))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .all(|b| b);
        if far {
            elements.push(c);
        }
    }
    Ok(SeparatedNet {
        scale,
        radius,
        separation,
        elements,
        enumeration_depth,
    })
}

impl SeparatedNet {
    /// Ball containment, pairwise separation, and maximality relative to the
    /// declared enumeration depth, all exact.
    pub fn verify(&self, group: &GroupSpec) -> Result<NetCheck> {
        let mut contained = true;
        for e in &self.elements {
            contained &= group.norm(e)? <= self.radius;
        }
        let mut separated = true;
        for (i, a) in self.elements.iter().enumerate() {
            for b in &self.elements[i + 1..] {
                separated &= group.dist(a, b)? >= self.separation;
            }
        }
        let mut maximal = true;
        for c in group.dense_enumeration(self.enumeration_depth) {
            if group.norm(&c)? > self.radius {
                continue;
            }
            let mut near = false;
            for e in &self.elements {
                if group.dist(e, &c)? < self.separation {
                    near = true;
                    break;
                }
            }
            maximal &= near;
        }
        Ok(NetCheck {
            contained,
            separated,
            maximal,
        })
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.elements.contains(e)
    }

    /// The net element nearest to `target` with distance strictly below the
    /// separation; ties go to the earlier element in canonical order.
    pub fn nearest_within_separation(
        &self,
        group: &GroupSpec,
        target: &GroupElement,
    ) -> Result<Option<GroupElement>> {
        let mut best: Option<(Dyadic, &GroupElement)> = None;
        for e in &self.elements {
            let d = group.dist(e, target)?;
            if d < self.separation && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, e));
            }
        }
        Ok(best.map(|(_, e)| e.clone()))
    }
}

/// Nets `net(0) ..= net(max_scale)` at a common enumeration depth.
pub fn net_tower(group: &GroupSpec, max_scale: u32, enumeration_depth: usize) -> Result<Vec<SeparatedNet>> {
    (0..=max_scale)
        .map(|k| ball_net(group, k, enumeration_depth))
        .collect()
}
