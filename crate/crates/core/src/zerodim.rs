//! Approximation of separately continuous functions whose image is a finite
//! subset of a metric group.
//!
//! The image is covered by successively finer partitions `W_n` with cells of
//! diameter `≤ 2^-(n+1)`. Quantizers `r_n` pick one group element per cell
//! so that `r_n` stays within `2^-n` of the identity map and consecutive
//! quantizers differ by an element of `net(n)`. The factors
//! `g_n = (r_n∘f)^-1 · (r_{n+1}∘f)` then have images inside the nets, each is
//! approximated by [`crate::discrete`], and the diagonal products
//! `f_{n,n} = g_{0,n} ⋯ g_{n,n}` converge to `f` on compact layers.

use std::sync::Arc;

use crate::cantor::{CantorPoint, Cylinder, ProbeGrid};
use crate::discrete::{approximate, DiscreteApproximation, DEFAULT_DEPTH_CAP};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::net::{net_tower, SeparatedNet};
use crate::sepfun::{uniform_dist, PointMap, SepFunction, Side, SubbasicNbhd};

/// Note recorded in every report: which net feeds which induction step.
pub const REINDEXING_NOTE: &str =
    "increments at step n -> n+1 are drawn from net(n) (radius 2^-n, separation 2^-(n+2))";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroDimConfig {
    pub n_max: usize,
    pub grid_depth: usize,
    pub net_depth: usize,
    pub levels: Vec<usize>,
    pub depth_cap: usize,
}

impl ZeroDimConfig {
    pub fn new(n_max: usize, grid_depth: usize) -> Self {
        ZeroDimConfig {
            n_max,
            grid_depth,
            net_depth: n_max + 4,
            levels: vec![1, 2],
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }
}

/// Partition of the image sample at level `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageCover {
    pub level: usize,
    pub cells: Vec<Vec<GroupElement>>,
}

impl ImageCover {
    pub fn cell_of(&self, z: &GroupElement) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(z))
    }

    pub fn diameter_bound(&self) -> Dyadic {
        Dyadic::pow2_neg(self.level as u32 + 1)
    }
}

fn diameter(group: &GroupSpec, cell: &[GroupElement]) -> Result<Dyadic> {
    let mut d = Dyadic::ZERO;
    for (i, a) in cell.iter().enumerate() {
        for b in &cell[i + 1..] {
            d = d.max(group.dist(a, b)?);
        }
    }
    Ok(d)
}

fn cluster(group: &GroupSpec, sample: &[GroupElement], level: usize) -> Result<Vec<Vec<GroupElement>>> {
    if let GroupSpec::Dyadic = group {
        let mut cells: Vec<(Vec<bool>, Vec<GroupElement>)> = Vec::new();
        for z in sample {
            let GroupElement::Bits(p) = z else {
                return Err(Error::Domain(format!("{z} is not a dyadic element")));
            };
            let key = p.prefix(level + 1);
            match cells.iter_mut().find(|(k, _)| *k == key) {
                Some((_, c)) => c.push(z.clone()),
                None => cells.push((key, vec![z.clone()])),
            }
        }
        return Ok(cells.into_iter().map(|(_, c)| c).collect());
    }
    let bound = Dyadic::pow2_neg(level as u32 + 1);
    let mut cells: Vec<Vec<GroupElement>> = Vec::new();
    'next: for z in sample {
        for c in cells.iter_mut() {
            let mut close = true;
            for w in c.iter() {
                close &= group.dist(w, z)? <= bound;
            }
            if close {
                c.push(z.clone());
                continue 'next;
            }
        }
        cells.push(vec![z.clone()]);
    }
    Ok(cells)
}

/// Covers `W_0 ..= W_max_level` of a finite image sample.
pub fn build_covers(group: &GroupSpec, sample: &[GroupElement], max_level: usize) -> Result<Vec<ImageCover>> {
    let mut sample = sample.to_vec();
    sample.sort();
    sample.dedup();
    let mut covers = vec![ImageCover {
        level: 0,
        cells: vec![sample.clone()],
    }];
    for level in 1..=max_level {
        let clusters = cluster(group, &sample, level)?;
        let mut cells = Vec::new();
        for parent in &covers[level - 1].cells {
            for c in &clusters {
                let cell: Vec<GroupElement> = parent.iter().filter(|z| c.contains(z)).cloned().collect();
                if !cell.is_empty() {
                    cells.push(cell);
                }
            }
        }
        cells.sort();
        let cover = ImageCover { level, cells };
        for cell in &cover.cells {
            if diameter(group, cell)? > cover.diameter_bound() {
                return Err(Error::CoverConstruction(format!(
                    "cell of diameter {} at level {level}",
                    diameter(group, cell)?
                )));
            }
        }
        covers.push(cover);
    }
    Ok(covers)
}

/// Exact check that each cover partitions the sample, respects its diameter
/// bound, and refines its predecessor.
pub fn verify_covers(group: &GroupSpec, sample: &[GroupElement], covers: &[ImageCover]) -> Result<bool> {
    for (i, cover) in covers.iter().enumerate() {
        let mut all: Vec<&GroupElement> = cover.cells.iter().flatten().collect();
        let total = all.len();
        all.sort();
        all.dedup();
        if total != all.len() || all.len() != sample.len() || sample.iter().any(|z| !all.contains(&z)) {
            return Ok(false);
        }
        for cell in &cover.cells {
            if cell.is_empty() || diameter(group, cell)? > cover.diameter_bound() {
                return Ok(false);
            }
            if i > 0 {
                let prev = &covers[i - 1];
                let parent = prev.cell_of(&cell[0]);
                if cell.iter().any(|z| prev.cell_of(z) != parent) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `r_n`: one value per cell of `W_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quantizer {
    pub level: usize,
    pub cell_values: Vec<GroupElement>,
    pub map: Arc<PointMap>,
}

/// Quantizers `r_0 ..= r_{covers.len()-1}`; step `n → n+1` uses `nets[n]`.
pub fn build_quantizers(
    group: &GroupSpec,
    covers: &[ImageCover],
    nets: &[SeparatedNet],
) -> Result<Vec<Quantizer>> {
    let mut out: Vec<Quantizer> = Vec::with_capacity(covers.len());
    for cover in covers {
        let n = cover.level;
        let cell_values = if n == 0 {
            vec![group.identity(); cover.cells.len()]
        } else {
            let prev_cover = &covers[n - 1];
            let prev = &out[n - 1];
            let net = nets.get(n - 1).ok_or_else(|| {
                Error::InvalidInput(format!("no net for quantizer step {} -> {n}", n - 1))
            })?;
            let mut vals = Vec::with_capacity(cover.cells.len());
            for cell in &cover.cells {
                let z = &cell[0];
                let parent = prev_cover.cell_of(z).expect("covers refine");
                let g_w = &prev.cell_values[parent];
                let t = group.left_quotient(g_w, z)?;
                if group.norm(&t)? > Dyadic::pow2_neg(n as u32 - 1) {
                    return Err(Error::QuantizerCondition(format!(
                        "step {} -> {n}: |g_W^-1 z| = {} exceeds 2^-{}",
                        n - 1,
                        group.norm(&t)?,
                        n - 1
                    )));
                }
                let eps = net.nearest_within_separation(group, &t)?.ok_or_else(|| {
                    Error::NetMaximality(format!(
                        "no element of net({}) within {} of {t}; raise the enumeration depth",
                        n - 1,
                        net.separation
                    ))
                })?;
                vals.push(group.mul(g_w, &eps)?);
            }
            vals
        };
        let map = PointMap::new(
            format!("r{n}"),
            cover
                .cells
                .iter()
                .zip(&cell_values)
                .flat_map(|(cell, v)| cell.iter().map(move |z| (z.clone(), v.clone()))),
        );
        out.push(Quantizer {
            level: n,
            cell_values,
            map: Arc::new(map),
        });
    }
    Ok(out)
}

/// Exact status of the three quantizer conditions at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizerCheck {
    pub level: usize,
    /// `r_n` is constant on every cell of `W_n`.
    pub cond1: bool,
    /// `sup_z d(r_n(z), z)` over the sample.
    pub cond2_sup: Dyadic,
    pub cond2: bool,
    /// `r_n(z) ∈ r_{n-1}(z) · net(n-1)` for every sample point; true at level 0.
    pub cond3: bool,
}

impl QuantizerCheck {
    pub fn passed(&self) -> bool {
        self.cond1 && self.cond2 && self.cond3
    }
}

pub fn certify_quantizers(
    group: &GroupSpec,
    sample: &[GroupElement],
    covers: &[ImageCover],
    quantizers: &[Quantizer],
    nets: &[SeparatedNet],
) -> Result<Vec<QuantizerCheck>> {
    let mut out = Vec::with_capacity(quantizers.len());
    for (cover, q) in covers.iter().zip(quantizers) {
        let n = q.level;
        let lookup = |q: &Quantizer, z: &GroupElement| {
            q.map.get(z).cloned().ok_or_else(|| {
                Error::QuantizerCondition(format!("r{} undefined at {z}", q.level))
            })
        };
        let mut cond1 = true;
        for cell in &cover.cells {
            let first = lookup(q, &cell[0])?;
            for z in cell {
                cond1 &= lookup(q, z)? == first;
            }
        }
        let mut sup = Dyadic::ZERO;
        for z in sample {
            sup = sup.max(group.dist(&lookup(q, z)?, z)?);
        }
        let mut cond3 = true;
        if n > 0 {
            let net = &nets[n - 1];
            for z in sample {
                let step = group.left_quotient(&lookup(&quantizers[n - 1], z)?, &lookup(q, z)?)?;
                cond3 &= net.contains(&step);
            }
        }
        out.push(QuantizerCheck {
            level: n,
            cond1,
            cond2: sup <= Dyadic::pow2_neg(n as u32),
            cond2_sup: sup,
            cond3,
        });
    }
    Ok(out)
}

/// `f_n = r_n ∘ f` and `g_n = f_n^-1 · f_{n+1}`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub approximants: Vec<SepFunction>,
    pub factors: Vec<SepFunction>,
}

/// Builds the factors and checks their declared images against the nets.
pub fn factorize(f: &SepFunction, quantizers: &[Quantizer], nets: &[SeparatedNet]) -> Result<Factorization> {
    let approximants = quantizers
        .iter()
        .map(|q| SepFunction::post_compose(f, q.map.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut factors = Vec::with_capacity(approximants.len().saturating_sub(1));
    for (n, pair) in approximants.windows(2).enumerate() {
        let g = SepFunction::product(&SepFunction::inverse(&pair[0])?, &pair[1])?;
        if let Some(net) = nets.get(n) {
            if let Some(z) = g.declared_image().iter().find(|z| !net.contains(z)) {
                return Err(Error::QuantizerCondition(format!(
                    "factor g{n} takes the value {z} outside net({n})"
                )));
            }
        }
        factors.push(g);
    }
    Ok(Factorization {
        approximants,
        factors,
    })
}

/// Grid checks on the factorization at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorCheck {
    pub level: usize,
    /// `max_grid d(f_n, f)`.
    pub rate_sup: Dyadic,
    pub rate_ok: bool,
    /// Every grid value of `g_n` lies in `net(n)`.
    pub discrete_ok: bool,
    /// `g_0 ⋯ g_n = f_{n+1}` at every grid point.
    pub telescoping_ok: bool,
}

impl FactorCheck {
    pub fn passed(&self) -> bool {
        self.rate_ok && self.discrete_ok && self.telescoping_ok
    }
}

pub fn check_factors(
    f: &SepFunction,
    fact: &Factorization,
    nets: &[SeparatedNet],
    grid_depth: usize,
) -> Result<Vec<FactorCheck>> {
    let group = f.group();
    let reps = ProbeGrid::new(grid_depth).representatives().to_vec();
    let mut running: Vec<GroupElement> = vec![group.identity(); reps.len() * reps.len()];
    let mut out = Vec::with_capacity(fact.factors.len());
    for (n, g) in fact.factors.iter().enumerate() {
        let rate = uniform_dist(&fact.approximants[n], f, Side::Left, grid_depth)?;
        let mut discrete_ok = true;
        let mut telescoping_ok = true;
        for (i, x) in reps.iter().enumerate() {
            for (j, y) in reps.iter().enumerate() {
                let v = g.eval(x, y)?;
                discrete_ok &= nets[n].contains(&v);
                let slot = &mut running[i * reps.len() + j];
                *slot = group.mul(slot, &v)?;
                telescoping_ok &= *slot == fact.approximants[n + 1].eval(x, y)?;
            }
        }
        out.push(FactorCheck {
            level: n,
            rate_ok: rate.value <= Dyadic::pow2_neg(n as u32),
            rate_sup: rate.value,
            discrete_ok,
            telescoping_ok,
        });
    }
    Ok(out)
}

fn table_mul(a: &SepFunction, b: &SepFunction) -> Result<SepFunction> {
    SepFunction::product_table(a.group(), &[a.clone(), b.clone()])
}

/// Approximating tables `g_{n,m}` for each factor and the products
/// `f_{n,m} = g_{0,m} ⋯ g_{n,m}`.
#[derive(Clone, Debug)]
pub struct DiagonalTower {
    pub factor_approx: Vec<DiscreteApproximation>,
    /// `products[m][n] = f_{n,m}`.
    products: Vec<Vec<SepFunction>>,
}

impl DiagonalTower {
    pub fn n_max(&self) -> usize {
        self.products.len() - 1
    }

    pub fn product(&self, n: usize, m: usize) -> &SepFunction {
        &self.products[m][n]
    }

    pub fn diagonal(&self, n: usize) -> &SepFunction {
        &self.products[n][n]
    }

    /// `g_{from,m} ⋯ g_{to,m}` as a table.
    pub fn partial_product(&self, from: usize, to: usize, m: usize) -> Result<SepFunction> {
        let mut acc = self.factor_approx[from].table(m).clone();
        for k in from + 1..=to {
            acc = table_mul(&acc, self.factor_approx[k].table(m))?;
        }
        Ok(acc)
    }
}

pub fn assemble_diagonal(factors: &[SepFunction], n_max: usize, depth_cap: usize) -> Result<DiagonalTower> {
    let factor_approx = factors
        .iter()
        .take(n_max + 1)
        .map(|g| approximate(g, n_max, depth_cap))
        .collect::<Result<Vec<_>>>()?;
    let mut products = Vec::with_capacity(n_max + 1);
    for m in 0..=n_max {
        let mut row: Vec<SepFunction> = Vec::with_capacity(n_max + 1);
        for (n, approx) in factor_approx.iter().enumerate() {
            let next = match row.last() {
                None => approx.table(m).clone(),
                Some(prev) => table_mul(prev, approx.table(m))?,
            };
            debug_assert_eq!(row.len(), n);
            row.push(next);
        }
        products.push(row);
    }
    Ok(DiagonalTower {
        factor_approx,
        products,
    })
}

/// First cell where a tail product `g_{l+1,n} ⋯ g_{n,n}` leaves `B[2^-l]`,
/// checked on every cell of the table, hence at every point.
pub fn tail_containment(tower: &DiagonalTower, l: usize) -> Result<Option<(usize, Cylinder, Cylinder)>> {
    let radius = Dyadic::pow2_neg(l as u32);
    for n in l + 1..=tower.n_max() {
        let tail = tower.partial_product(l + 1, n, n)?;
        let group = tail.group().clone();
        let t = tail.as_table().expect("product of tables");
        let side = 1usize << t.depth();
        for xi in 0..side {
            for yi in 0..side {
                if group.norm(t.cell(xi, yi))? > radius {
                    return Ok(Some((
                        n,
                        Cylinder::from_lex_index(t.depth(), xi),
                        Cylinder::from_lex_index(t.depth(), yi),
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Budget certificate for one level `l` on one probe neighbourhood.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalReport {
    pub l: usize,
    pub probe: usize,
    /// Smallest `m ≥ l` from which `f_{l,n}` stays within `2^-l` of
    /// `f_{l+1} = g_0 ⋯ g_l` on the probe grid, if any `m ≤ n_max` works.
    pub m_l: Option<usize>,
    pub budget: Dyadic,
    /// `(n, max over probe grid of d(f, f_{n,n}))` for every `n ≤ n_max`.
    pub sups: Vec<(usize, Dyadic)>,
    pub witness: Option<(usize, CantorPoint, CantorPoint)>,
    pub pass: bool,
}

pub fn diagonal_report(
    f: &SepFunction,
    fact: &Factorization,
    tower: &DiagonalTower,
    l: usize,
    probe: usize,
    nbhd: &SubbasicNbhd,
    grid_depth: usize,
) -> Result<DiagonalReport> {
    let group = f.group();
    let n_max = tower.n_max();
    let points = nbhd.grid_points(grid_depth);
    let layer_ok = |n: usize| -> Result<bool> {
        let fl = tower.product(l, n);
        for (x, y) in &points {
            if group.dist(&fl.eval(x, y)?, &fact.approximants[l + 1].eval(x, y)?)? > Dyadic::pow2_neg(l as u32) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut m_l = None;
    if l <= n_max {
        // scan down from n_max to find the longest good suffix
        let mut start = n_max + 1;
        while start > l && layer_ok(start - 1)? {
            start -= 1;
        }
        if start <= n_max {
            m_l = Some(start);
        }
    }
    let budget = Dyadic::pow2(2 - l as i32);
    let mut sups = Vec::with_capacity(n_max + 1);
    let mut witness = None;
    for n in 0..=n_max {
        let diag = tower.diagonal(n);
        let mut sup = Dyadic::ZERO;
        let mut at = None;
        for (x, y) in &points {
            let d = group.dist(&f.eval(x, y)?, &diag.eval(x, y)?)?;
            if at.is_none() || d > sup {
                sup = d;
                at = Some((x.clone(), y.clone()));
            }
        }
        if m_l.is_some_and(|m| n >= m) && sup >= budget && witness.is_none() {
            let (x, y) = at.expect("probe grid is nonempty");
            witness = Some((n, x, y));
        }
        sups.push((n, sup));
    }
    Ok(DiagonalReport {
        l,
        probe,
        pass: m_l.is_some() && witness.is_none(),
        m_l,
        budget,
        sups,
        witness,
    })
}

/// Smallest `l` with `2^-l · 4 ≤ radius`.
pub fn minimal_level(radius: Dyadic) -> Result<usize> {
    if radius <= Dyadic::ZERO {
        return Err(Error::InvalidInput(format!("radius {radius} must be positive")));
    }
    let mut l = 0usize;
    while Dyadic::pow2(2 - l as i32) > radius {
        l += 1;
    }
    Ok(l)
}

/// Everything computed by one pipeline run.
#[derive(Clone, Debug)]
pub struct ZeroDimRun {
    pub config: ZeroDimConfig,
    pub sample: Vec<GroupElement>,
    /// The grid evaluation reaches every element of the declared image.
    pub grid_sample_complete: bool,
    pub nets: Vec<SeparatedNet>,
    pub covers: Vec<ImageCover>,
    pub covers_ok: bool,
    pub quantizers: Vec<Quantizer>,
    pub quantizer_checks: Vec<QuantizerCheck>,
    pub factorization: Factorization,
    pub factor_checks: Vec<FactorCheck>,
    pub tower: DiagonalTower,
    pub diagonal: Vec<DiagonalReport>,
    /// `(l, first violation)` of tail containment.
    pub tails: Vec<(usize, Option<(usize, Cylinder, Cylinder)>)>,
}

impl ZeroDimRun {
    pub fn passed(&self) -> bool {
        self.covers_ok
            && self.quantizer_checks.iter().all(QuantizerCheck::passed)
            && self.factor_checks.iter().all(FactorCheck::passed)
            && self.diagonal.iter().all(|d| d.pass)
            && self.tails.iter().all(|(_, t)| t.is_none())
    }
}

/// Grid image of `f`.
pub fn grid_image(f: &SepFunction, grid_depth: usize) -> Result<Vec<GroupElement>> {
    let reps = ProbeGrid::new(grid_depth).representatives().to_vec();
    let mut out = std::collections::BTreeSet::new();
    for x in &reps {
        for y in &reps {
            out.insert(f.eval(x, y)?);
        }
    }
    Ok(out.into_iter().collect())
}

pub fn run_zerodim(f: &SepFunction, probes: &[SubbasicNbhd], config: &ZeroDimConfig) -> Result<ZeroDimRun> {
    let group = f.group();
    let sample = f.declared_image().to_vec();
    let grid_sample_complete = grid_image(f, config.grid_depth)? == sample;
    let nets = net_tower(group, config.n_max as u32, config.net_depth)?;
    let covers = build_covers(group, &sample, config.n_max + 1)?;
    let covers_ok = verify_covers(group, &sample, &covers)?;
    let quantizers = build_quantizers(group, &covers, &nets)?;
    let quantizer_checks = certify_quantizers(group, &sample, &covers, &quantizers, &nets)?;
    let factorization = factorize(f, &quantizers, &nets)?;
    let factor_checks = check_factors(f, &factorization, &nets, config.grid_depth)?;
    let tower = assemble_diagonal(&factorization.factors, config.n_max, config.depth_cap)?;
    let mut diagonal = Vec::new();
    for &l in &config.levels {
        for (i, nb) in probes.iter().enumerate() {
            diagonal.push(diagonal_report(f, &factorization, &tower, l, i, nb, config.grid_depth)?);
        }
    }
    let tails = config
        .levels
        .iter()
        .map(|&l| Ok((l, tail_containment(&tower, l)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroDimRun {
        config: config.clone(),
        sample,
        grid_sample_complete,
        nets,
        covers,
        covers_ok,
        quantizers,
        quantizer_checks,
        factorization,
        factor_checks,
        tower,
        diagonal,
        tails,
    })
}
