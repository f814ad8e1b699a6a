//! Jointly continuous approximation of separately continuous functions with a
//! finite image.
//!
//! For each value `z` and basis cylinder `V_k` the strips
//! `X(z,k) = {x : {x} × V_k ⊆ f^{-1}(z)}` and `Y(z,k)` are closed; the patch
//! `XY(z,n)` is the union of `X(z,k) × V_k` and `U_k × Y(z,k)` over `k ≤ n`.
//! Patches for distinct values are disjoint closed sets, so a locally
//! constant table can take the value `z` on each of them. The resulting
//! tables `g_n` converge to `f` in the separate-continuity topology, and
//! [`convergence_certificate`] computes the stage from which a given subbasic
//! neighbourhood is entered.

use crate::cantor::{basis_cylinder, CantorPoint, Cylinder};
use crate::clopen::{ClopenSet, ClosedSet};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::sepfun::{
    in_subbasic, Axis, Compact, SepFunction, SubbasicCheck, SubbasicNbhd, TABLE_DEPTH_CAP,
};

/// Depth limit for the refinement search separating patches.
pub const DEFAULT_DEPTH_CAP: usize = 16;

/// Strip sets for one value and one basis cylinder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripSets {
    pub z: GroupElement,
    pub k: u64,
    pub basis: Cylinder,
    pub x_strip: ClosedSet,
    pub y_strip: ClosedSet,
}

pub fn compute_strips(f: &SepFunction, z: &GroupElement, k: u64) -> Result<StripSets> {
    let basis = basis_cylinder(k);
    Ok(StripSets {
        z: z.clone(),
        k,
        x_strip: f.strip(Axis::X, z, &basis)?,
        y_strip: f.strip(Axis::Y, z, &basis)?,
        basis,
    })
}

impl StripSets {
    /// Checks `V_k ⊆ f_x^{-1}(z)` exactly for grid representatives `x` of
    /// the x-strip, and symmetrically for the y-strip.
    pub fn verify(&self, f: &SepFunction, grid_depth: usize) -> Result<bool> {
        let v = ClopenSet::from_cylinder(&self.basis);
        for (axis, strip) in [(Axis::X, &self.x_strip), (Axis::Y, &self.y_strip)] {
            for p in strip.grid_points(grid_depth) {
                if !v.is_subset(&f.section(axis, &p)?.preimage(&self.z)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rectangle {
    pub x: ClosedSet,
    pub y: ClosedSet,
}

impl Rectangle {
    pub fn meets(&self, other: &Rectangle) -> bool {
        self.x.meets(&other.x) && self.y.meets(&other.y)
    }

    pub fn meets_cell(&self, u: &Cylinder, v: &Cylinder) -> bool {
        self.x.meets_cylinder(u) && self.y.meets_cylinder(v)
    }

    pub fn contains(&self, x: &CantorPoint, y: &CantorPoint) -> bool {
        self.x.contains_point(x) && self.y.contains_point(y)
    }
}

/// The closed set `XY(z, n)` as a finite union of rectangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedPatch {
    pub z: GroupElement,
    pub n: usize,
    pub rects: Vec<Rectangle>,
}

impl ClosedPatch {
    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn meets(&self, other: &ClosedPatch) -> bool {
        self.rects
            .iter()
            .any(|a| other.rects.iter().any(|b| a.meets(b)))
    }

    pub fn meets_cell(&self, u: &Cylinder, v: &Cylinder) -> bool {
        self.rects.iter().any(|r| r.meets_cell(u, v))
    }

    pub fn contains(&self, x: &CantorPoint, y: &CantorPoint) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
    }

    /// Deepest cylinder in the rectangle descriptions.
    pub fn depth(&self) -> usize {
        self.rects
            .iter()
            .map(|r| r.x.depth().max(r.y.depth()))
            .max()
            .unwrap_or(0)
    }

    /// Every grid point of the patch evaluates to `z`.
    pub fn verify_soundness(&self, f: &SepFunction, grid_depth: usize) -> Result<bool> {
        for r in &self.rects {
            let ys = r.y.grid_points(grid_depth);
            for x in r.x.grid_points(grid_depth) {
                for y in &ys {
                    if f.eval(&x, y)? != self.z {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

fn patch_from_strips(z: &GroupElement, n: usize, strips: &[StripSets]) -> ClosedPatch {
    let mut rects = Vec::new();
    for s in strips.iter().take(n + 1) {
        let v: ClosedSet = ClopenSet::from_cylinder(&s.basis).into();
        if !s.x_strip.is_empty() {
            rects.push(Rectangle {
                x: s.x_strip.clone(),
                y: v.clone(),
            });
        }
        if !s.y_strip.is_empty() {
            rects.push(Rectangle {
                x: v,
                y: s.y_strip.clone(),
            });
        }
    }
    ClosedPatch {
        z: z.clone(),
        n,
        rects,
    }
}

pub fn build_patch(f: &SepFunction, z: &GroupElement, n: usize) -> Result<ClosedPatch> {
    let strips = (0..=n as u64)
        .map(|k| compute_strips(f, z, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(patch_from_strips(z, n, &strips))
}

/// `Z_n` = the first `n + 1` elements of the declared image in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageFiltration {
    order: Vec<GroupElement>,
}

impl ImageFiltration {
    pub fn new(image: &[GroupElement]) -> Self {
        let mut order = image.to_vec();
        order.sort();
        order.dedup();
        ImageFiltration { order }
    }

    pub fn level(&self, n: usize) -> &[GroupElement] {
        &self.order[..(n + 1).min(self.order.len())]
    }

    /// First `n` with `z ∈ Z_n`.
    pub fn entry_index(&self, z: &GroupElement) -> Option<usize> {
        self.order.iter().position(|e| e == z)
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.order
    }
}

/// One stage `g_n` with the patches it was built from.
#[derive(Clone, Debug)]
pub struct DiscreteStage {
    pub n: usize,
    pub patches: Vec<ClosedPatch>,
    pub table: SepFunction,
    pub depth: usize,
}

/// Smallest depth at which no cell below `(u, v)` meets two patches.
fn separation_depth(
    patches: &[&ClosedPatch],
    u: &Cylinder,
    v: &Cylinder,
    cap: usize,
) -> Result<usize> {
    let meeting: Vec<&ClosedPatch> = patches
        .iter()
        .copied()
        .filter(|p| p.meets_cell(u, v))
        .collect();
    if meeting.len() <= 1 {
        return Ok(u.depth());
    }
    if u.depth() >= cap {
        return Err(Error::RefinementExhausted(format!(
            "cell {u} × {v} meets patches for {} and {} at depth {cap}",
            meeting[0].z, meeting[1].z
        )));
    }
    let mut deepest = 0;
    for bu in [false, true] {
        for bv in [false, true] {
            let mut cu = u.prefix().to_vec();
            cu.push(bu);
            let mut cv = v.prefix().to_vec();
            cv.push(bv);
            deepest = deepest.max(separation_depth(
                &meeting,
                &Cylinder::new(cu),
                &Cylinder::new(cv),
                cap,
            )?);
        }
    }
    Ok(deepest)
}

fn check_disjoint(patches: &[ClosedPatch]) -> Result<()> {
    for (i, a) in patches.iter().enumerate() {
        for b in &patches[i + 1..] {
            if a.meets(b) {
                return Err(Error::Certificate(format!(
                    "patches for {} and {} intersect at stage {}",
                    a.z, b.z, a.n
                )));
            }
        }
    }
    Ok(())
}

fn stage_from_patches(
    f: &SepFunction,
    n: usize,
    patches: Vec<ClosedPatch>,
    depth_cap: usize,
) -> Result<DiscreteStage> {
    check_disjoint(&patches)?;
    let refs: Vec<&ClosedPatch> = patches.iter().filter(|p| !p.is_empty()).collect();
    let needed = separation_depth(&refs, &Cylinder::whole(), &Cylinder::whole(), depth_cap)?;
    let mut depth = refs.iter().map(|p| p.depth()).max().unwrap_or(0).max(1);
    while depth < needed {
        depth = (depth * 2).min(depth_cap);
    }
    let table = SepFunction::table_from_fn(f.group(), depth, |xi, yi| {
        let u = Cylinder::from_lex_index(depth, xi);
        let v = Cylinder::from_lex_index(depth, yi);
        match refs.iter().find(|p| p.meets_cell(&u, &v)) {
            Some(p) => Ok(p.z.clone()),
            None => f.eval_cell(&u, &v),
        }
    })?;
    Ok(DiscreteStage {
        n,
        patches,
        table,
        depth,
    })
}

/// Builds `g_n` from the patches of every `z ∈ Z_n`.
pub fn build_gn(
    f: &SepFunction,
    n: usize,
    filtration: &ImageFiltration,
    depth_cap: usize,
) -> Result<DiscreteStage> {
    let patches = filtration
        .level(n)
        .iter()
        .map(|z| build_patch(f, z, n))
        .collect::<Result<Vec<_>>>()?;
    stage_from_patches(f, n, patches, depth_cap)
}

/// The sequence `g_0, ..., g_{n_max}`.
#[derive(Clone, Debug)]
pub struct DiscreteApproximation {
    pub filtration: ImageFiltration,
    pub stages: Vec<DiscreteStage>,
}

impl DiscreteApproximation {
    pub fn n_max(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn table(&self, n: usize) -> &SepFunction {
        &self.stages[n].table
    }
}

/// Strips need a single table or diagonal leaf; products of several locally
/// constant leaves are collapsed into one table first.
fn strip_source(f: &SepFunction) -> Result<SepFunction> {
    match f.pointwise_form() {
        Ok(_) => Ok(f.clone()),
        Err(Error::UnsupportedStructure(msg)) => match f.local_depth() {
            Some(d) if d <= TABLE_DEPTH_CAP => f.tabulate(d),
            _ => Err(Error::UnsupportedStructure(msg)),
        },
        Err(e) => Err(e),
    }
}

pub fn approximate(f: &SepFunction, n_max: usize, depth_cap: usize) -> Result<DiscreteApproximation> {
    let filtration = ImageFiltration::new(f.declared_image());
    let source = strip_source(f)?;
    // strips do not depend on n, so compute each (z, k) once
    let strips: Vec<Vec<StripSets>> = filtration
        .elements()
        .iter()
        .map(|z| {
            (0..=n_max as u64)
                .map(|k| compute_strips(&source, z, k))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut stages = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let patches = filtration
            .level(n)
            .iter()
            .zip(&strips)
            .map(|(z, s)| patch_from_strips(z, n, s))
            .collect();
        stages.push(stage_from_patches(f, n, patches, depth_cap)?);
    }
    Ok(DiscreteApproximation { filtration, stages })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateRow {
    pub n: usize,
    pub check: SubbasicCheck,
}

/// Finite-index recipe for entering `[K_X × K_Y, W]` with `W = f(K_X × K_Y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceCertificate {
    pub image: Vec<GroupElement>,
    /// For each `z ∈ W`, basis indices whose cylinders cover the `z`-part of
    /// the swept compact and stay inside the section preimage of `z`.
    pub basis_sets: Vec<(GroupElement, Vec<u64>)>,
    pub m: usize,
    pub rows: Vec<CertificateRow>,
}

impl ConvergenceCertificate {
    /// Every checked stage from `m` on lies in the neighbourhood.
    pub fn holds(&self) -> bool {
        self.rows.iter().filter(|r| r.n >= self.m).all(|r| r.check.member)
    }

    /// `m` lies beyond the last computed stage, so nothing was checked.
    pub fn is_vacuous(&self) -> bool {
        self.rows.iter().all(|r| r.n < self.m)
    }
}

fn covering_indices(part: &ClopenSet, sweep: &Compact) -> Vec<u64> {
    let cell_of = |p: &CantorPoint| {
        part.cylinders()
            .into_iter()
            .find(|c| c.contains(p))
            .map(|c| c.basis_index())
    };
    let mut out: Vec<u64> = match sweep {
        Compact::Point(p) => cell_of(p).into_iter().collect(),
        Compact::Set(s) => {
            let mut v: Vec<u64> = part
                .intersect(s.clopen_part())
                .cylinders()
                .iter()
                .map(Cylinder::basis_index)
                .collect();
            v.extend(s.isolated_points().iter().filter_map(cell_of));
            v
        }
    };
    out.sort_unstable();
    out.dedup();
    out
}

pub fn convergence_certificate(
    f: &SepFunction,
    approx: &DiscreteApproximation,
    nbhd: &SubbasicNbhd,
) -> Result<ConvergenceCertificate> {
    let (axis, fixed, sweep) = nbhd.fixed();
    let mut image = Vec::new();
    let mut basis_sets = Vec::new();
    let mut m = 0usize;
    for part in f.section(axis, fixed)?.parts {
        if sweep.meet_witness(&part.set).is_none() {
            continue;
        }
        let idx = covering_indices(&part.set, sweep);
        let entry = approx.filtration.entry_index(&part.value).ok_or_else(|| {
            Error::Certificate(format!("{} missing from the filtration", part.value))
        })?;
        m = m.max(entry);
        if let Some(&last) = idx.last() {
            m = m.max(last as usize);
        }
        image.push(part.value.clone());
        basis_sets.push((part.value, idx));
    }
    let target = SubbasicNbhd::new(nbhd.kx.clone(), nbhd.ky.clone(), image.clone())?;
    let rows = approx
        .stages
        .iter()
        .map(|s| {
            Ok(CertificateRow {
                n: s.n,
                check: in_subbasic(&s.table, &target)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceCertificate {
        image,
        basis_sets,
        m,
        rows,
    })
}
