//! Subbasic neighbourhoods of the separate-continuity topology and grid
//! distances between functions.

use std::collections::BTreeSet;

use super::{Axis, SepFunction};
use crate::cantor::{CantorPoint, ProbeGrid};
use crate::clopen::{ClopenSet, ClosedSet};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::group::GroupElement;

/// Largest grid depth for the all-pairs uniform distance.
const UNIFORM_GRID_CAP: usize = 12;

/// A compact subset of Cantor space: a single point or a closed set of the
/// form `clopen ∪ finite`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Compact {
    Point(CantorPoint),
    Set(ClosedSet),
}

impl Compact {
    pub fn grid_points(&self, d: usize) -> Vec<CantorPoint> {
        match self {
            Compact::Point(p) => vec![p.clone()],
            Compact::Set(s) => s.grid_points(d),
        }
    }

    /// A point of `self ∩ set`, if any.
    pub fn meet_witness(&self, set: &ClopenSet) -> Option<CantorPoint> {
        match self {
            Compact::Point(p) => set.contains_point(p).then(|| p.clone()),
            Compact::Set(s) => s
                .clopen_part()
                .intersect(set)
                .witness()
                .or_else(|| s.isolated_points().iter().find(|p| set.contains_point(p)).cloned()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Compact::Point(_) => 0,
            Compact::Set(s) => s.depth(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Compact::Set(s) if s.is_empty())
    }
}

impl std::fmt::Display for Compact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Compact::Point(p) => write!(f, "{{{p}}}"),
            Compact::Set(s) => write!(f, "{s}"),
        }
    }
}

/// `[K_X × K_Y, U] = {g : g(K_X × K_Y) ⊆ U}` with at least one of the
/// compacts a singleton and `U` a finite set of values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubbasicNbhd {
    pub kx: Compact,
    pub ky: Compact,
    pub allowed: Vec<GroupElement>,
}

impl SubbasicNbhd {
    pub fn new(kx: Compact, ky: Compact, allowed: Vec<GroupElement>) -> Result<Self> {
        if !matches!(kx, Compact::Point(_)) && !matches!(ky, Compact::Point(_)) {
            return Err(Error::InvalidInput(
                "subbasic neighbourhood needs a singleton on one side".into(),
            ));
        }
        let allowed: Vec<GroupElement> = allowed.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(SubbasicNbhd { kx, ky, allowed })
    }

    /// The fixed coordinate and the compact set swept along the other.
    pub fn fixed(&self) -> (Axis, &CantorPoint, &Compact) {
        match (&self.kx, &self.ky) {
            (Compact::Point(x), ky) => (Axis::X, x, ky),
            (kx, Compact::Point(y)) => (Axis::Y, y, kx),
            _ => unreachable!("checked at construction"),
        }
    }

    /// Grid points of `K_X × K_Y`.
    pub fn grid_points(&self, d: usize) -> Vec<(CantorPoint, CantorPoint)> {
        let xs = self.kx.grid_points(d);
        let ys = self.ky.grid_points(d);
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for x in &xs {
            for y in &ys {
                out.push((x.clone(), y.clone()));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubbasicCheck {
    pub member: bool,
    /// A point of `K_X × K_Y` mapped outside `U`.
    pub witness: Option<(CantorPoint, CantorPoint)>,
}

fn orient(axis: Axis, fixed: &CantorPoint, free: CantorPoint) -> (CantorPoint, CantorPoint) {
    match axis {
        Axis::X => (fixed.clone(), free),
        Axis::Y => (free, fixed.clone()),
    }
}

/// Exact membership of `f` in the neighbourhood, via the section through the
/// singleton side.
pub fn in_subbasic(f: &SepFunction, nbhd: &SubbasicNbhd) -> Result<SubbasicCheck> {
    let (axis, fixed, sweep) = nbhd.fixed();
    for part in f.section(axis, fixed)?.parts {
        if nbhd.allowed.contains(&part.value) {
            continue;
        }
        if let Some(w) = sweep.meet_witness(&part.set) {
            return Ok(SubbasicCheck {
                member: false,
                witness: Some(orient(axis, fixed, w)),
            });
        }
    }
    Ok(SubbasicCheck {
        member: true,
        witness: None,
    })
}

/// The exact finite set `f(K_X × K_Y)`.
pub fn image_on(f: &SepFunction, kx: &Compact, ky: &Compact) -> Result<Vec<GroupElement>> {
    let (axis, fixed, sweep) = match (kx, ky) {
        (Compact::Point(x), k) => (Axis::X, x, k),
        (k, Compact::Point(y)) => (Axis::Y, y, k),
        _ => {
            return Err(Error::InvalidInput(
                "image on a product needs a singleton factor".into(),
            ))
        }
    };
    Ok(f.section(axis, fixed)?
        .parts
        .into_iter()
        .filter(|p| sweep.meet_witness(&p.set).is_some())
        .map(|p| p.value)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `d(a, b)` with the left-invariant metric.
    Left,
    /// `d(a^-1, b^-1)`.
    Right,
}

/// A maximum over grid points: a lower bound on the supremum, and equal to it
/// when `exact` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridDistance {
    pub value: Dyadic,
    pub grid_depth: usize,
    pub exact: bool,
    pub witness: Option<(CantorPoint, CantorPoint)>,
}

fn side_dist(f: &SepFunction, side: Side, a: &GroupElement, b: &GroupElement) -> Result<Dyadic> {
    let g = f.group();
    match side {
        Side::Left => g.dist(a, b),
        Side::Right => g.dist(&g.inv(a)?, &g.inv(b)?),
    }
}

fn grid_max(
    f: &SepFunction,
    g: &SepFunction,
    side: Side,
    points: impl IntoIterator<Item = (CantorPoint, CantorPoint)>,
) -> Result<(Dyadic, Option<(CantorPoint, CantorPoint)>)> {
    if f.group() != g.group() {
        return Err(Error::Domain("distance between functions into different groups".into()));
    }
    let mut best = Dyadic::ZERO;
    let mut witness = None;
    for (x, y) in points {
        let d = side_dist(f, side, &f.eval(&x, &y)?, &g.eval(&x, &y)?)?;
        if witness.is_none() || d > best {
            best = d;
            witness = Some((x, y));
        }
    }
    Ok((best, witness))
}

/// `sup_{y ∈ K} d(f(x, y), g(x, y))` over grid points of `K` (or the
/// symmetric quantity for `Axis::Y`).
pub fn layerwise_dist(
    f: &SepFunction,
    g: &SepFunction,
    axis: Axis,
    fixed: &CantorPoint,
    k: &Compact,
    grid_depth: usize,
) -> Result<GridDistance> {
    let points = k.grid_points(grid_depth).into_iter().map(|p| orient(axis, fixed, p));
    let (value, witness) = grid_max(f, g, Side::Left, points)?;
    let exact = k.depth() <= grid_depth
        && f.section(axis, fixed)?.depth() <= grid_depth
        && g.section(axis, fixed)?.depth() <= grid_depth;
    Ok(GridDistance {
        value,
        grid_depth,
        exact,
        witness,
    })
}

/// `sup_{x, y} d(f(x, y), g(x, y))` over the full grid.
pub fn uniform_dist(
    f: &SepFunction,
    g: &SepFunction,
    side: Side,
    grid_depth: usize,
) -> Result<GridDistance> {
    if grid_depth > UNIFORM_GRID_CAP {
        return Err(Error::ResourceCap(format!(
            "uniform distance grid depth {grid_depth} exceeds {UNIFORM_GRID_CAP}"
        )));
    }
    let reps = ProbeGrid::new(grid_depth).representatives().to_vec();
    let points = reps
        .iter()
        .flat_map(|x| reps.iter().map(move |y| (x.clone(), y.clone())));
    let (value, witness) = grid_max(f, g, side, points)?;
    let exact = matches!((f.local_depth(), g.local_depth()), (Some(a), Some(b)) if a.max(b) <= grid_depth);
    Ok(GridDistance {
        value,
        grid_depth,
        exact,
        witness,
    })
}
