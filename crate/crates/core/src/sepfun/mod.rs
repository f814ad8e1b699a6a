//! Separately continuous functions `f: X × Y → G` as combinator trees.
//!
//! Leaves are constants, finite tables over depth-`D` rectangle cells, and
//! diagonal indicators (values on `U_n × U_n` for pairwise disjoint cylinders
//! `U_n`, identity elsewhere). Inner nodes are pointwise products, pointwise
//! inverses, and post-composition with a finite point map (a quantizer).
//!
//! Every function carries a finite declared image, computed structurally at
//! construction. Sections `f(x, ·)` and `f(·, y)` are computed exactly as
//! finite clopen partitions, which is the executable form of separate
//! continuity for finite-image functions.

mod probe;
mod section;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::cantor::{CantorPoint, Cylinder};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};

pub use probe::{
    image_on, in_subbasic, layerwise_dist, uniform_dist, Compact, GridDistance, Side,
    SubbasicCheck, SubbasicNbhd,
};
pub use section::{Section, SectionPart};

/// Joint enumeration of leaf values is used for the declared image while the
/// number of combinations stays below this.
const JOINT_IMAGE_CAP: usize = 1 << 14;
/// Hard cap on any declared image.
const IMAGE_CAP: usize = 1 << 16;
/// Largest table depth that may be materialized (`4^D` cells).
pub const TABLE_DEPTH_CAP: usize = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Fix `x`, vary `y`.
    X,
    /// Fix `y`, vary `x`.
    Y,
}

/// A finite map between group elements, used by post-composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMap {
    pub label: String,
    entries: BTreeMap<GroupElement, GroupElement>,
}

impl PointMap {
    pub fn new(
        label: impl Into<String>,
        entries: impl IntoIterator<Item = (GroupElement, GroupElement)>,
    ) -> Self {
        PointMap {
            label: label.into(),
            entries: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, z: &GroupElement) -> Option<&GroupElement> {
        self.entries.get(z)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &GroupElement)> {
        self.entries.iter()
    }

    fn apply(&self, z: &GroupElement) -> Result<GroupElement> {
        self.get(z).cloned().ok_or_else(|| {
            Error::Domain(format!("point map `{}` is undefined at {z}", self.label))
        })
    }
}

/// Values on the `2^D × 2^D` grid of depth-`D` rectangle cells, row-major
/// with the row indexed by the `x` cylinder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFunction {
    depth: usize,
    palette: Vec<GroupElement>,
    cells: Vec<u32>,
}

impl TableFunction {
    fn new(depth: usize, values: Vec<GroupElement>) -> Result<Self> {
        if depth > TABLE_DEPTH_CAP {
            return Err(Error::ResourceCap(format!(
                "table depth {depth} exceeds {TABLE_DEPTH_CAP}"
            )));
        }
        let side = 1usize << depth;
        if values.len() != side * side {
            return Err(Error::InvalidInput(format!(
                "table of depth {depth} needs {} cells, got {}",
                side * side,
                values.len()
            )));
        }
        let mut palette: Vec<GroupElement> = values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        palette.shrink_to_fit();
        let cells = values
            .iter()
            .map(|v| palette.binary_search(v).unwrap() as u32)
            .collect();
        Ok(TableFunction {
            depth,
            palette,
            cells,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cell(&self, xi: usize, yi: usize) -> &GroupElement {
        &self.palette[self.cells[(xi << self.depth) + yi] as usize]
    }

    pub fn values(&self) -> &[GroupElement] {
        &self.palette
    }
}

/// Index of the depth-`d` cylinder containing `p`.
pub(crate) fn cell_index(p: &CantorPoint, d: usize) -> usize {
    (0..d).fold(0usize, |acc, i| (acc << 1) | p.bit(i) as usize)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagonalSchema {
    /// `U_n = [1^n 0]` for every `n`; the cells accumulate at `1^ω`.
    Ones,
    /// An explicit finite family of pairwise disjoint cylinders.
    Cells(Vec<Cylinder>),
}

/// `f(x, y) = z_n` if both `x, y ∈ U_n`, identity otherwise.
///
/// For the `Ones` schema `z_n = values[min(n, len - 1)]`; for explicit cells
/// `values` is parallel to the cell list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalIndicator {
    schema: DiagonalSchema,
    values: Vec<GroupElement>,
    identity: GroupElement,
}

impl DiagonalIndicator {
    pub fn schema(&self) -> &DiagonalSchema {
        &self.schema
    }

    pub fn value(&self, n: usize) -> &GroupElement {
        &self.values[n.min(self.values.len() - 1)]
    }

    /// The cell containing `p`, its index, and its value.
    pub fn cell_of(&self, p: &CantorPoint) -> Option<(Cylinder, usize, &GroupElement)> {
        match &self.schema {
            DiagonalSchema::Ones => p.leading_ones().map(|n| (ones_cell(n), n, self.value(n))),
            DiagonalSchema::Cells(cells) => cells
                .iter()
                .position(|c| c.contains(p))
                .map(|i| (cells[i].clone(), i, &self.values[i])),
        }
    }
}

/// The cylinder `[1^n 0]`.
pub fn ones_cell(n: usize) -> Cylinder {
    let mut prefix = vec![true; n];
    prefix.push(false);
    Cylinder::new(prefix)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Node {
    Constant(GroupElement),
    Table(TableFunction),
    Diagonal(DiagonalIndicator),
    Product(SepFunction, SepFunction),
    Inverse(SepFunction),
    PostCompose(SepFunction, Arc<PointMap>),
}

/// A separately continuous function with exact evaluation.
#[derive(Clone)]
pub struct SepFunction {
    group: GroupSpec,
    node: Arc<Node>,
    image: Arc<Vec<GroupElement>>,
}

impl PartialEq for SepFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.node, &other.node)
            || (self.group == other.group && self.node == other.node)
    }
}

impl Eq for SepFunction {}

impl fmt::Debug for SepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Constant(g) => write!(f, "const {g}"),
            Node::Table(t) => write!(f, "table<{}>", t.depth),
            Node::Diagonal(d) => {
                let vals: Vec<String> = d.values.iter().map(|v| v.to_string()).collect();
                match &d.schema {
                    DiagonalSchema::Ones => write!(f, "diag ones {}", vals.join(",")),
                    DiagonalSchema::Cells(cs) => {
                        let cells: Vec<String> = cs
                            .iter()
                            .map(|c| crate::cantor::bits_to_string(c.prefix()))
                            .collect();
                        write!(f, "diag {{{}}} {}", cells.join(", "), vals.join(","))
                    }
                }
            }
            Node::Product(a, b) => write!(f, "prod({a}, {b})"),
            Node::Inverse(a) => write!(f, "inv({a})"),
            Node::PostCompose(a, m) => write!(f, "post({a}, {})", m.label),
        }
    }
}

impl SepFunction {
    fn from_node(group: GroupSpec, node: Node) -> Result<Self> {
        let mut f = SepFunction {
            group,
            node: Arc::new(node),
            image: Arc::new(Vec::new()),
        };
        f.image = Arc::new(f.compute_image()?);
        Ok(f)
    }

    fn check_member(group: &GroupSpec, e: &GroupElement) -> Result<()> {
        if group.contains(e) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{e} is not an element of group {}",
                group.name()
            )))
        }
    }

    pub fn constant(group: &GroupSpec, g: GroupElement) -> Result<Self> {
        Self::check_member(group, &g)?;
        Self::from_node(group.clone(), Node::Constant(g))
    }

    /// `values` lists the `4^depth` cells row by row (`x` cylinder major).
    pub fn table(group: &GroupSpec, depth: usize, values: Vec<GroupElement>) -> Result<Self> {
        for v in &values {
            Self::check_member(group, v)?;
        }
        Self::from_node(group.clone(), Node::Table(TableFunction::new(depth, values)?))
    }

    /// Builds a table from a cell function `(x cylinder index, y cylinder index)`.
    pub fn table_from_fn(
        group: &GroupSpec,
        depth: usize,
        mut cell: impl FnMut(usize, usize) -> Result<GroupElement>,
    ) -> Result<Self> {
        if depth > TABLE_DEPTH_CAP {
            return Err(Error::ResourceCap(format!(
                "table depth {depth} exceeds {TABLE_DEPTH_CAP}"
            )));
        }
        let side = 1usize << depth;
        let mut values = Vec::with_capacity(side * side);
        for xi in 0..side {
            for yi in 0..side {
                values.push(cell(xi, yi)?);
            }
        }
        Self::table(group, depth, values)
    }

    /// Diagonal indicator over `U_n = [1^n 0]`.
    pub fn diagonal_ones(group: &GroupSpec, values: Vec<GroupElement>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("diagonal indicator needs values".into()));
        }
        for v in &values {
            Self::check_member(group, v)?;
        }
        Self::from_node(
            group.clone(),
            Node::Diagonal(DiagonalIndicator {
                schema: DiagonalSchema::Ones,
                values,
                identity: group.identity(),
            }),
        )
    }

    /// Diagonal indicator over explicit cells; a single value is broadcast.
    pub fn diagonal_cells(
        group: &GroupSpec,
        cells: Vec<Cylinder>,
        mut values: Vec<GroupElement>,
    ) -> Result<Self> {
        if values.len() == 1 && cells.len() > 1 {
            values = vec![values[0].clone(); cells.len()];
        }
        if values.len() != cells.len() || cells.is_empty() {
            return Err(Error::InvalidInput(format!(
                "diagonal indicator with {} cells needs 1 or {} values, got {}",
                cells.len(),
                cells.len(),
                values.len()
            )));
        }
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                if !a.is_disjoint(b) {
                    return Err(Error::InvalidInput(format!(
                        "diagonal cells {a} and {b} overlap"
                    )));
                }
            }
        }
        for v in &values {
            Self::check_member(group, v)?;
        }
        Self::from_node(
            group.clone(),
            Node::Diagonal(DiagonalIndicator {
                schema: DiagonalSchema::Cells(cells),
                values,
                identity: group.identity(),
            }),
        )
    }

    pub fn product(a: &SepFunction, b: &SepFunction) -> Result<Self> {
        if a.group != b.group {
            return Err(Error::Domain(format!(
                "product of functions into {} and {}",
                a.group.name(),
                b.group.name()
            )));
        }
        Self::from_node(a.group.clone(), Node::Product(a.clone(), b.clone()))
    }

    pub fn inverse(a: &SepFunction) -> Result<Self> {
        Self::from_node(a.group.clone(), Node::Inverse(a.clone()))
    }

    /// `map ∘ a`; the map must be defined on the declared image of `a`.
    pub fn post_compose(a: &SepFunction, map: Arc<PointMap>) -> Result<Self> {
        for z in a.declared_image() {
            let v = map.apply(z)?;
            Self::check_member(&a.group, &v)?;
        }
        Self::from_node(a.group.clone(), Node::PostCompose(a.clone(), map))
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    /// Sorted finite set containing every value of the function.
    pub fn declared_image(&self) -> &[GroupElement] {
        &self.image
    }

    pub fn as_table(&self) -> Option<&TableFunction> {
        match &*self.node {
            Node::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_diagonal(&self) -> Option<&DiagonalIndicator> {
        match &*self.node {
            Node::Diagonal(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_constant(&self) -> Option<&GroupElement> {
        match &*self.node {
            Node::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, x: &CantorPoint, y: &CantorPoint) -> Result<GroupElement> {
        match &*self.node {
            Node::Constant(g) => Ok(g.clone()),
            Node::Table(t) => Ok(t.cell(cell_index(x, t.depth), cell_index(y, t.depth)).clone()),
            Node::Diagonal(d) => Ok(match (d.cell_of(x), d.cell_of(y)) {
                (Some((_, i, v)), Some((_, j, _))) if i == j => v.clone(),
                _ => d.identity.clone(),
            }),
            Node::Product(a, b) => self.group.mul(&a.eval(x, y)?, &b.eval(x, y)?),
            Node::Inverse(a) => self.group.inv(&a.eval(x, y)?),
            Node::PostCompose(a, m) => m.apply(&a.eval(x, y)?),
        }
    }

    /// Evaluates at the canonical representatives of two cylinders.
    pub fn eval_cell(&self, u: &Cylinder, v: &Cylinder) -> Result<GroupElement> {
        self.eval(&u.representative(), &v.representative())
    }

    /// Smallest depth `D` such that the function is constant on every
    /// depth-`D` rectangle cell, when structurally certified.
    pub fn local_depth(&self) -> Option<usize> {
        match &*self.node {
            Node::Constant(_) => Some(0),
            Node::Table(t) => Some(t.depth),
            Node::Diagonal(d) => match &d.schema {
                DiagonalSchema::Ones => None,
                DiagonalSchema::Cells(cs) => cs.iter().map(Cylinder::depth).max(),
            },
            Node::Product(a, b) => Some(a.local_depth()?.max(b.local_depth()?)),
            Node::Inverse(a) | Node::PostCompose(a, _) => a.local_depth(),
        }
    }

    /// Materializes the function as a table of the given depth; requires a
    /// certified local depth no larger than `depth`.
    pub fn tabulate(&self, depth: usize) -> Result<SepFunction> {
        match self.local_depth() {
            Some(d) if d <= depth => {}
            _ => {
                return Err(Error::UnsupportedStructure(format!(
                    "{self} is not locally constant at depth {depth}"
                )))
            }
        }
        if self.as_table().map(|t| t.depth) == Some(depth) {
            return Ok(self.clone());
        }
        let reps: Vec<CantorPoint> = crate::cantor::ProbeGrid::new(depth).representatives().to_vec();
        Self::table_from_fn(&self.group, depth, |xi, yi| self.eval(&reps[xi], &reps[yi]))
    }

    /// Pointwise product of locally constant factors, as a single table at
    /// their common depth.
    pub fn product_table(group: &GroupSpec, factors: &[SepFunction]) -> Result<SepFunction> {
        let mut depth = 0;
        for f in factors {
            if f.group != *group {
                return Err(Error::Domain("product table over mixed groups".into()));
            }
            depth = depth.max(f.local_depth().ok_or_else(|| {
                Error::UnsupportedStructure(format!("{f} is not locally constant"))
            })?);
        }
        let tables = factors
            .iter()
            .map(|f| f.tabulate(f.local_depth().unwrap()))
            .collect::<Result<Vec<_>>>()?;
        Self::table_from_fn(group, depth, |xi, yi| {
            let mut acc = group.identity();
            for t in &tables {
                let t = t.as_table().unwrap();
                let shift = depth - t.depth;
                acc = group.mul(&acc, t.cell(xi >> shift, yi >> shift))?;
            }
            Ok(acc)
        })
    }

    /// Distinct non-constant leaves, in first-visit order.
    fn leaves(&self) -> Vec<SepFunction> {
        fn walk(f: &SepFunction, out: &mut Vec<SepFunction>) {
            match &*f.node {
                Node::Constant(_) => {}
                Node::Table(_) | Node::Diagonal(_) => {
                    if !out.contains(f) {
                        out.push(f.clone());
                    }
                }
                Node::Product(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Inverse(a) | Node::PostCompose(a, _) => walk(a, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Value of the tree when each leaf `leaves[i]` takes the value `assign[i]`.
    fn eval_assigned(&self, leaves: &[SepFunction], assign: &[GroupElement]) -> Result<GroupElement> {
        match &*self.node {
            Node::Constant(g) => Ok(g.clone()),
            Node::Table(_) | Node::Diagonal(_) => {
                let i = leaves.iter().position(|l| l == self).expect("leaf collected");
                Ok(assign[i].clone())
            }
            Node::Product(a, b) => self.group.mul(
                &a.eval_assigned(leaves, assign)?,
                &b.eval_assigned(leaves, assign)?,
            ),
            Node::Inverse(a) => self.group.inv(&a.eval_assigned(leaves, assign)?),
            Node::PostCompose(a, m) => m.apply(&a.eval_assigned(leaves, assign)?),
        }
    }

    fn leaf_image(&self) -> Vec<GroupElement> {
        match &*self.node {
            Node::Constant(g) => vec![g.clone()],
            Node::Table(t) => t.palette.clone(),
            Node::Diagonal(d) => {
                let mut vals: BTreeSet<GroupElement> = d.values.iter().cloned().collect();
                let covers_all = match &d.schema {
                    DiagonalSchema::Ones => false,
                    DiagonalSchema::Cells(cs) => crate::clopen::ClopenSet::from_cylinders(cs).is_whole(),
                };
                if !covers_all {
                    vals.insert(d.identity.clone());
                }
                vals.into_iter().collect()
            }
            _ => unreachable!("not a leaf"),
        }
    }

    fn compute_image(&self) -> Result<Vec<GroupElement>> {
        if let Node::Constant(_) | Node::Table(_) | Node::Diagonal(_) = &*self.node {
            return Ok(self.leaf_image());
        }
        let leaves = self.leaves();
        let images: Vec<Vec<GroupElement>> = leaves.iter().map(|l| l.leaf_image()).collect();
        let combos = images
            .iter()
            .try_fold(1usize, |acc, im| acc.checked_mul(im.len()))
            .unwrap_or(usize::MAX);
        let mut out = BTreeSet::new();
        if combos <= JOINT_IMAGE_CAP {
            let mut idx = vec![0usize; leaves.len()];
            loop {
                let assign: Vec<GroupElement> =
                    idx.iter().zip(&images).map(|(&i, im)| im[i].clone()).collect();
                out.insert(self.eval_assigned(&leaves, &assign)?);
                // odometer increment
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        return Ok(out.into_iter().collect());
                    }
                    idx[pos] += 1;
                    if idx[pos] < images[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        }
        // superset from the children's images
        match &*self.node {
            Node::Product(a, b) => {
                for x in a.declared_image() {
                    for y in b.declared_image() {
                        out.insert(self.group.mul(x, y)?);
                        if out.len() > IMAGE_CAP {
                            return Err(Error::ResourceCap(format!(
                                "declared image of {self} exceeds {IMAGE_CAP} elements"
                            )));
                        }
                    }
                }
            }
            Node::Inverse(a) => {
                for x in a.declared_image() {
                    out.insert(self.group.inv(x)?);
                }
            }
            Node::PostCompose(a, m) => {
                for x in a.declared_image() {
                    out.insert(m.apply(x)?);
                }
            }
            _ => unreachable!(),
        }
        Ok(out.into_iter().collect())
    }

    /// If the function is `φ ∘ leaf` for a single non-constant leaf, returns
    /// the leaf together with `φ` tabulated on the leaf's image. Constant
    /// functions yield `None` as leaf and a one-entry map keyed by identity.
    pub fn pointwise_form(&self) -> Result<PointwiseForm> {
        let leaves = self.leaves();
        match leaves.len() {
            0 => {
                let v = self.eval_assigned(&[], &[])?;
                Ok(PointwiseForm {
                    leaf: None,
                    map: vec![(self.group.identity(), v)],
                })
            }
            1 => {
                let leaf = leaves[0].clone();
                let map = leaf
                    .leaf_image()
                    .into_iter()
                    .map(|z| {
                        let v = self.eval_assigned(&leaves, std::slice::from_ref(&z))?;
                        Ok((z, v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PointwiseForm {
                    leaf: Some(leaf),
                    map,
                })
            }
            n => Err(Error::UnsupportedStructure(format!(
                "{self} depends on {n} independent leaves"
            ))),
        }
    }
}

/// `f = φ ∘ leaf` with `φ` given on the leaf's image.
#[derive(Clone, Debug)]
pub struct PointwiseForm {
    pub leaf: Option<SepFunction>,
    pub map: Vec<(GroupElement, GroupElement)>,
}

impl PointwiseForm {
    /// Leaf values sent to `z`.
    pub fn preimage(&self, z: &GroupElement) -> Vec<GroupElement> {
        self.map
            .iter()
            .filter(|(_, v)| v == z)
            .map(|(k, _)| k.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests;
