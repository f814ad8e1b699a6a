//! Uniform-type neighbourhoods of a function and two evidence harnesses.
//!
//! For an open identity ball `U = {u : |u| < ε}` the four balls around `f` are
//! `B_l = {g : g ∈ f·U}`, `B_r = {g : g ∈ U·f}`, `B_lr = B_l ∩ B_r` and
//! `B_rl = {g : g ∈ U·f·U}`, all pointwise. Membership is decided on a probe
//! grid.

use std::fmt;
use std::str::FromStr;

use crate::cantor::{CantorPoint, ProbeGrid};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::sepfun::{uniform_dist, Axis, SepFunction, Side, SubbasicNbhd};
use crate::zerodim::{run_zerodim, ZeroDimConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BallSide {
    L,
    R,
    LR,
    RL,
}

impl BallSide {
    pub const ALL: [BallSide; 4] = [BallSide::L, BallSide::R, BallSide::LR, BallSide::RL];
}

impl fmt::Display for BallSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BallSide::L => "l",
            BallSide::R => "r",
            BallSide::LR => "lr",
            BallSide::RL => "rl",
        })
    }
}

impl FromStr for BallSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "l" => Ok(BallSide::L),
            "r" => Ok(BallSide::R),
            "lr" => Ok(BallSide::LR),
            "rl" => Ok(BallSide::RL),
            other => Err(Error::Parse(format!("unknown ball side `{other}`"))),
        }
    }
}

/// Pointwise membership of `b` in the `side` ball of radius `eps` around `a`.
pub fn element_in_ball(group: &GroupSpec, side: BallSide, a: &GroupElement, b: &GroupElement, eps: Dyadic) -> Result<bool> {
    let left = || -> Result<bool> { Ok(group.norm(&group.left_quotient(a, b)?)? < eps) };
    let right = || -> Result<bool> { Ok(group.norm(&group.mul(b, &group.inv(a)?)?)? < eps) };
    match side {
        BallSide::L => left(),
        BallSide::R => right(),
        BallSide::LR => Ok(left()? && right()?),
        BallSide::RL => group.in_double_ball(a, b, eps),
    }
}

#[derive(Clone, Debug)]
pub struct BallQuery {
    pub center: SepFunction,
    pub candidate: SepFunction,
    pub side: BallSide,
    pub eps: Dyadic,
    pub grid_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallResult {
    pub member: bool,
    /// First grid point, in row-major grid order, where membership fails.
    pub witness: Option<(CantorPoint, CantorPoint)>,
}

pub fn ball_membership(q: &BallQuery) -> Result<BallResult> {
    if q.eps <= Dyadic::ZERO {
        return Err(Error::InvalidInput(format!("ball radius {} must be positive", q.eps)));
    }
    let group = q.center.group();
    if group != q.candidate.group() {
        return Err(Error::Domain("ball query across different groups".into()));
    }
    let reps = ProbeGrid::new(q.grid_depth).representatives().to_vec();
    for x in &reps {
        for y in &reps {
            let a = q.center.eval(x, y)?;
            let b = q.candidate.eval(x, y)?;
            if !element_in_ball(group, q.side, &a, &b, q.eps)? {
                return Ok(BallResult {
                    member: false,
                    witness: Some((x.clone(), y.clone())),
                });
            }
        }
    }
    Ok(BallResult {
        member: true,
        witness: None,
    })
}

/// One approximant in a closure probe, with its allowed distance to `f`.
#[derive(Clone, Debug)]
pub struct ClosureStage {
    pub stage: usize,
    pub approximant: SepFunction,
    pub eps: Dyadic,
}

/// Stages `r_k ∘ f` with `ε_k = 2^-k` for `k ≤ last`, taken from the
/// quantizer tower of a pipeline run.
pub fn quantizer_stages(f: &SepFunction, last: usize, config: &ZeroDimConfig) -> Result<Vec<ClosureStage>> {
    let mut cfg = config.clone();
    cfg.n_max = cfg.n_max.max(last);
    cfg.levels.clear();
    let run = run_zerodim(f, &[], &cfg)?;
    Ok((0..=last)
        .map(|k| ClosureStage {
            stage: k,
            approximant: run.factorization.approximants[k].clone(),
            eps: Dyadic::pow2_neg(k as u32),
        })
        .collect())
}

/// Multiplies one stage pointwise by a constant.
pub fn corrupt_stage(stages: &mut [ClosureStage], stage: usize, shift: GroupElement) -> Result<()> {
    let s = stages
        .iter_mut()
        .find(|s| s.stage == stage)
        .ok_or_else(|| Error::InvalidInput(format!("no closure stage {stage}")))?;
    let c = SepFunction::constant(s.approximant.group(), shift)?;
    s.approximant = SepFunction::product(&s.approximant, &c)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureRow {
    pub stage: usize,
    pub eps: Dyadic,
    pub dist_l: Dyadic,
    pub dist_r: Dyadic,
    /// Both uniform distances are at most `eps`.
    pub within: bool,
    /// Level `k + 2` used for the stage's own diagonal certificate.
    pub inner_level: usize,
    pub inner_pass: bool,
    /// Probe-grid sup of `d(f, composite)` for the stage's last diagonal term.
    pub composite_sup: Dyadic,
    pub composite_budget: Dyadic,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureReport {
    pub rows: Vec<ClosureRow>,
    pub failed_stage: Option<usize>,
}

/// Checks that each stage is within its schedule of `f` on both sides, is
/// itself certified as a diagonal limit at level `k + 2`, and that the
/// composite diagonal term is within `ε_k + 2^-k` of `f` on every probe.
pub fn closure_probe(
    f: &SepFunction,
    stages: &[ClosureStage],
    probes: &[SubbasicNbhd],
    config: &ZeroDimConfig,
) -> Result<ClosureReport> {
    let group = f.group();
    let mut rows = Vec::with_capacity(stages.len());
    for s in stages {
        let g = &s.approximant;
        let dist_l = uniform_dist(g, f, Side::Left, config.grid_depth)?.value;
        let dist_r = uniform_dist(g, f, Side::Right, config.grid_depth)?.value;
        let within = dist_l <= s.eps && dist_r <= s.eps;
        let inner_level = s.stage + 2;
        let mut cfg = config.clone();
        cfg.levels = vec![inner_level];
        let (inner_pass, composite_sup) = if inner_level > cfg.n_max {
            (false, Dyadic::ZERO)
        } else {
            let run = run_zerodim(g, probes, &cfg)?;
            let composite = run.tower.diagonal(cfg.n_max);
            let mut sup = Dyadic::ZERO;
            for nb in probes {
                for (x, y) in nb.grid_points(config.grid_depth) {
                    sup = sup.max(group.dist(&f.eval(&x, &y)?, &composite.eval(&x, &y)?)?);
                }
            }
            (run.passed(), sup)
        };
        let composite_budget = s.eps + Dyadic::pow2_neg(s.stage as u32);
        rows.push(ClosureRow {
            stage: s.stage,
            eps: s.eps,
            dist_l,
            dist_r,
            within,
            inner_level,
            inner_pass,
            pass: within && inner_pass && composite_sup < composite_budget,
            composite_sup,
            composite_budget,
        });
    }
    let failed_stage = rows.iter().find(|r| !r.pass).map(|r| r.stage);
    Ok(ClosureReport { rows, failed_stage })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem3Report {
    pub grid_depth: usize,
    /// Grid max of the raw difference `|f - g|`.
    pub sup_abs: Dyadic,
    /// Grid max of the bounded metric `min(|f - g|, 1/2)`.
    pub sup_metric: Dyadic,
    pub within: bool,
    pub witness: Option<(CantorPoint, CantorPoint)>,
    pub image_size: usize,
    /// The declared image of `g` is finite, hence zero-dimensional.
    pub image_certified: bool,
    /// Every grid section of `g` is an exact clopen partition.
    pub sections_certified: bool,
}

fn real_value(e: &GroupElement) -> Result<Dyadic> {
    match e {
        GroupElement::Real(v) => Ok(*v),
        other => Err(Error::Domain(format!("{other} is not a real value"))),
    }
}

/// Grid evidence for `sup |f - g| ≤ 1` with a separately continuous `g` of
/// finite image.
pub fn problem3_check(f: &SepFunction, g: &SepFunction, grid_depth: usize) -> Result<Problem3Report> {
    if *f.group() != GroupSpec::Real || *g.group() != GroupSpec::Real {
        return Err(Error::Domain("the bounded-difference check needs real-valued functions".into()));
    }
    let reps = ProbeGrid::new(grid_depth).representatives().to_vec();
    let mut sections_certified = true;
    for p in &reps {
        for axis in [Axis::X, Axis::Y] {
            let s = g.section(axis, p)?;
            sections_certified &= s.is_partition()
                && s.parts.iter().all(|part| g.declared_image().binary_search(&part.value).is_ok());
        }
    }
    if !sections_certified {
        return Err(Error::InvalidInput(format!(
            "{g} has no separate-continuity certificate on the grid"
        )));
    }
    let mut sup_abs = Dyadic::ZERO;
    let mut sup_metric = Dyadic::ZERO;
    let mut witness = None;
    for x in &reps {
        for y in &reps {
            let a = f.eval(x, y)?;
            let b = g.eval(x, y)?;
            let d = (real_value(&a)? - real_value(&b)?).abs();
            if witness.is_none() || d > sup_abs {
                sup_abs = d;
                witness = Some((x.clone(), y.clone()));
            }
            sup_metric = sup_metric.max(GroupSpec::Real.dist(&a, &b)?);
        }
    }
    let within = sup_abs <= Dyadic::ONE;
    Ok(Problem3Report {
        grid_depth,
        sup_abs,
        sup_metric,
        within,
        witness: if within { None } else { witness },
        image_size: g.declared_image().len(),
        image_certified: true,
        sections_certified,
    })
}
