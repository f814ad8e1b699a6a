//! Exact sections and strip sets.

use std::collections::BTreeMap;

use super::{cell_index, ones_cell, Axis, DiagonalSchema, Node, SepFunction};
use crate::cantor::{CantorPoint, Cylinder};
use crate::clopen::{ClopenSet, ClosedSet};
use crate::error::{Error, Result};
use crate::group::GroupElement;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionPart {
    pub set: ClopenSet,
    pub value: GroupElement,
}

/// The section through a fixed point as a finite clopen partition of the
/// free coordinate, one part per value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub axis: Axis,
    pub fixed: CantorPoint,
    pub parts: Vec<SectionPart>,
}

impl Section {
    pub fn preimage(&self, z: &GroupElement) -> ClopenSet {
        self.parts
            .iter()
            .find(|p| &p.value == z)
            .map(|p| p.set.clone())
            .unwrap_or_else(ClopenSet::empty)
    }

    pub fn value_at(&self, p: &CantorPoint) -> Option<&GroupElement> {
        self.parts
            .iter()
            .find(|part| part.set.contains_point(p))
            .map(|part| &part.value)
    }

    /// Deepest cylinder needed to describe the partition.
    pub fn depth(&self) -> usize {
        self.parts.iter().map(|p| p.set.depth()).max().unwrap_or(0)
    }

    /// Parts are nonempty, pairwise disjoint, and cover the space.
    pub fn is_partition(&self) -> bool {
        let mut seen = ClopenSet::empty();
        for p in &self.parts {
            if p.set.is_empty() || !seen.intersect(&p.set).is_empty() {
                return false;
            }
            seen = seen.union(&p.set);
        }
        seen.is_whole()
    }
}

fn merge(parts: impl IntoIterator<Item = (ClopenSet, GroupElement)>) -> Vec<SectionPart> {
    let mut by_value: BTreeMap<GroupElement, ClopenSet> = BTreeMap::new();
    for (set, value) in parts {
        if set.is_empty() {
            continue;
        }
        let slot = by_value.entry(value).or_insert_with(ClopenSet::empty);
        *slot = slot.union(&set);
    }
    by_value
        .into_iter()
        .map(|(value, set)| SectionPart { set, value })
        .collect()
}

impl SepFunction {
    /// `f(x, ·)` for `Axis::X` (fixed `x`), `f(·, y)` for `Axis::Y`.
    pub fn section(&self, axis: Axis, fixed: &CantorPoint) -> Result<Section> {
        Ok(Section {
            axis,
            fixed: fixed.clone(),
            parts: self.section_parts(axis, fixed)?,
        })
    }

    fn section_parts(&self, axis: Axis, fixed: &CantorPoint) -> Result<Vec<SectionPart>> {
        Ok(match &*self.node {
            Node::Constant(g) => merge([(ClopenSet::whole(), g.clone())]),
            Node::Table(t) => {
                let d = t.depth();
                let i = cell_index(fixed, d);
                merge((0..1usize << d).map(|j| {
                    let v = match axis {
                        Axis::X => t.cell(i, j),
                        Axis::Y => t.cell(j, i),
                    };
                    (
                        ClopenSet::from_cylinder(&Cylinder::from_lex_index(d, j)),
                        v.clone(),
                    )
                }))
            }
            Node::Diagonal(diag) => match diag.cell_of(fixed) {
                Some((cell, _, z)) => {
                    let c = ClopenSet::from_cylinder(&cell);
                    merge([(c.complement(), diag.identity.clone()), (c, z.clone())])
                }
                None => merge([(ClopenSet::whole(), diag.identity.clone())]),
            },
            Node::Product(a, b) => {
                let pa = a.section_parts(axis, fixed)?;
                let pb = b.section_parts(axis, fixed)?;
                let mut out = Vec::new();
                for p in &pa {
                    for q in &pb {
                        let set = p.set.intersect(&q.set);
                        if !set.is_empty() {
                            out.push((set, self.group.mul(&p.value, &q.value)?));
                        }
                    }
                }
                merge(out)
            }
            Node::Inverse(a) => merge(
                a.section_parts(axis, fixed)?
                    .into_iter()
                    .map(|p| Ok((p.set, self.group.inv(&p.value)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Node::PostCompose(a, m) => merge(
                a.section_parts(axis, fixed)?
                    .into_iter()
                    .map(|p| Ok((p.set, m.apply(&p.value)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    /// `f_x^{-1}(z)` or `(f^y)^{-1}(z)`; `z` must lie in the declared image.
    pub fn section_preimage(
        &self,
        axis: Axis,
        fixed: &CantorPoint,
        z: &GroupElement,
    ) -> Result<ClopenSet> {
        if self.declared_image().binary_search(z).is_err() {
            return Err(Error::Domain(format!(
                "{z} is not in the declared image of {self}"
            )));
        }
        Ok(self.section(axis, fixed)?.preimage(z))
    }

    /// Strip set for value `z` against the cylinder `v`.
    ///
    /// `Axis::X` gives `{x : {x} × v ⊆ f^{-1}(z)}`, `Axis::Y` gives
    /// `{y : v × {y} ⊆ f^{-1}(z)}`. Supported for functions that factor
    /// through a single table or diagonal leaf.
    pub fn strip(&self, axis: Axis, z: &GroupElement, v: &Cylinder) -> Result<ClosedSet> {
        let form = self.pointwise_form()?;
        let targets = form.preimage(z);
        match form.leaf {
            None => Ok(if targets.is_empty() {
                ClosedSet::empty()
            } else {
                ClopenSet::whole().into()
            }),
            Some(leaf) => leaf.leaf_strip(axis, &targets, v),
        }
    }

    /// Strip of a leaf for the value set `targets`.
    fn leaf_strip(&self, axis: Axis, targets: &[GroupElement], v: &Cylinder) -> Result<ClosedSet> {
        let hit = |g: &GroupElement| targets.contains(g);
        match &*self.node {
            Node::Table(t) => {
                let d = t.depth();
                // free-coordinate cells that meet v
                let cols: Vec<usize> = if v.depth() >= d {
                    vec![cell_index(&v.representative(), d)]
                } else {
                    let base = v.lex_index() << (d - v.depth());
                    (base..base + (1 << (d - v.depth()))).collect()
                };
                let rows = (0..1usize << d).filter(|&i| {
                    cols.iter().all(|&j| match axis {
                        Axis::X => hit(t.cell(i, j)),
                        Axis::Y => hit(t.cell(j, i)),
                    })
                });
                let cyls: Vec<Cylinder> = rows.map(|i| Cylinder::from_lex_index(d, i)).collect();
                Ok(ClopenSet::from_cylinders(&cyls).into())
            }
            Node::Diagonal(diag) => {
                let e_in = hit(&diag.identity);
                let vset = ClopenSet::from_cylinder(v);
                // v ⊆ (C if z ∈ S) ∪ (C^c if e ∈ S)
                let admits = |c: &Cylinder, z: &GroupElement| {
                    let cset = ClopenSet::from_cylinder(c);
                    let mut allowed = ClopenSet::empty();
                    if hit(z) {
                        allowed = allowed.union(&cset);
                    }
                    if e_in {
                        allowed = allowed.union(&cset.complement());
                    }
                    vset.is_subset(&allowed)
                };
                match &diag.schema {
                    DiagonalSchema::Cells(cells) => {
                        let mut out = ClopenSet::empty();
                        for (c, z) in cells.iter().zip(&diag.values) {
                            if admits(c, z) {
                                out = out.union(&ClopenSet::from_cylinder(c));
                            }
                        }
                        if e_in {
                            out = out.union(&ClopenSet::from_cylinders(cells).complement());
                        }
                        Ok(out.into())
                    }
                    DiagonalSchema::Ones => {
                        // beyond `tail` every cell is either inside or disjoint
                        // from v and carries the last value, so the answer is
                        // the same for all of them
                        let tail = diag.values.len().max(v.depth() + 1);
                        let mut out = ClopenSet::empty();
                        for n in 0..tail {
                            let c = ones_cell(n);
                            if admits(&c, diag.value(n)) {
                                out = out.union(&ClopenSet::from_cylinder(&c));
                            }
                        }
                        let mut points = Vec::new();
                        if admits(&ones_cell(tail), diag.value(tail)) {
                            out = out.union(&ClopenSet::from_cylinder(&Cylinder::new(vec![true; tail])));
                        } else if e_in {
                            points.push(CantorPoint::ones());
                        }
                        Ok(ClosedSet::new(out, points))
                    }
                }
            }
            Node::Constant(g) => Ok(if hit(g) {
                ClopenSet::whole().into()
            } else {
                ClosedSet::empty()
            }),
            _ => Err(Error::UnsupportedStructure(format!(
                "strip of composite {self}"
            ))),
        }
    }
}
