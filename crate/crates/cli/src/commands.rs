//! Subcommand pipelines.

use std::time::Instant;

use serde::Serialize;
use sepcont_core::discrete::{approximate, convergence_certificate};
use sepcont_core::net::net_tower;
use sepcont_core::uniform::{
    ball_membership, closure_probe, corrupt_stage, problem3_check, quantizer_stages, BallQuery,
};
use sepcont_core::zerodim::{run_zerodim, ZeroDimConfig, REINDEXING_NOTE};
use sepcont_core::{Axis, CantorPoint, Dyadic};

use crate::config::ExperimentConfig;
use crate::exit::Failure;
use crate::report::{flag, ReportDir};

/// What a pipeline hands back to the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub timings: Vec<(String, f64)>,
}

struct Timer {
    start: Instant,
}

impl Timer {
    fn start() -> Self {
        Timer { start: Instant::now() }
    }

    fn lap(&mut self, out: &mut Outcome, stage: &str) {
        let now = Instant::now();
        out.timings
            .push((stage.to_string(), (now - self.start).as_secs_f64() * 1000.0));
        self.start = now;
    }
}

fn witness(w: &Option<(CantorPoint, CantorPoint)>) -> String {
    match w {
        Some((x, y)) => format!("{x};{y}"),
        None => String::new(),
    }
}

fn zerodim_config(cfg: &ExperimentConfig) -> ZeroDimConfig {
    let mut z = ZeroDimConfig::new(cfg.n_max, cfg.grid_depth);
    z.levels = cfg.levels.clone();
    z.net_depth = cfg.net_depth;
    z.depth_cap = cfg.depth_cap;
    z
}

pub fn nets(cfg: &ExperimentConfig, out: &mut ReportDir) -> Result<Outcome, Failure> {
    let mut res = Outcome::default();
    let mut t = Timer::start();
    let nets = net_tower(&cfg.group, cfg.n_max as u32, cfg.net_depth)?;
    t.lap(&mut res, "build");
    let mut rows = Vec::new();
    let mut elements = Vec::new();
    let mut all = true;
    for net in &nets {
        let chk = net.verify(&cfg.group)?;
        all &= chk.passed();
        rows.push(vec![
            net.scale.to_string(),
            net.radius.to_string(),
            net.separation.to_string(),
            net.enumeration_depth.to_string(),
            net.elements.len().to_string(),
            flag(chk.contained),
            flag(chk.separated),
            flag(chk.maximal),
        ]);
        for (i, e) in net.elements.iter().enumerate() {
            elements.push(vec![net.scale.to_string(), i.to_string(), e.to_string()]);
        }
    }
    t.lap(&mut res, "verify");
    out.csv(
        "nets.csv",
        &["k", "radius", "separation", "enumeration_depth", "size", "contained", "separated", "maximal"],
        &rows,
    )?;
    out.csv("net_elements.csv", &["k", "index", "element"], &elements)?;
    res.passed = all;
    res.summary.push(("nets".into(), nets.len().to_string()));
    Ok(res)
}

pub fn approx_discrete(cfg: &ExperimentConfig, out: &mut ReportDir) -> Result<Outcome, Failure> {
    let mut res = Outcome::default();
    let mut t = Timer::start();
    let f = &cfg.function;
    let approx = approximate(f, cfg.n_max, cfg.depth_cap)?;
    t.lap(&mut res, "stages");
    let stages: Vec<Vec<String>> = approx
        .stages
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                s.depth.to_string(),
                s.patches.iter().filter(|p| !p.is_empty()).count().to_string(),
            ]
        })
        .collect();
    out.csv("stages.csv", &["n", "table_depth", "nonempty_patches"], &stages)?;

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut all = true;
    for probe in &cfg.probes {
        let cert = convergence_certificate(f, &approx, &probe.nbhd)?;
        for r in &cert.rows {
            rows.push(vec![
                r.n.to_string(),
                probe.id.clone(),
                flag(r.check.member),
                witness(&r.check.witness),
            ]);
        }
        let (axis, _, _) = probe.nbhd.fixed();
        let image: Vec<String> = cert.image.iter().map(|z| z.to_string()).collect();
        let basis: Vec<String> = cert
            .basis_sets
            .iter()
            .map(|(z, idx)| {
                let idx: Vec<String> = idx.iter().map(u64::to_string).collect();
                format!("{z}:{}", idx.join(" "))
            })
            .collect();
        all &= cert.holds();
        summary.push(vec![
            probe.id.clone(),
            match axis {
                Axis::X => "x",
                Axis::Y => "y",
            }
            .to_string(),
            image.join(" "),
            basis.join("; "),
            cert.m.to_string(),
            flag(cert.holds()),
            flag(cert.is_vacuous()),
        ]);
    }
    t.lap(&mut res, "certificates");
    out.csv("certificates.csv", &["n", "probe_id", "in_nbhd", "witness"], &rows)?;
    out.csv(
        "certificate_summary.csv",
        &["probe_id", "fixed_axis", "image", "basis_sets", "m", "holds", "vacuous"],
        &summary,
    )?;
    res.passed = all;
    res.summary.push(("probes".into(), cfg.probes.len().to_string()));
    res.notes.push(
        "cells of g_n that meet no patch take the value of f at the cell representative".into(),
    );
    Ok(res)
}

pub fn approx_zerodim(cfg: &ExperimentConfig, out: &mut ReportDir) -> Result<Outcome, Failure> {
    let mut res = Outcome::default();
    let mut t = Timer::start();
    let f = &cfg.function;
    let probes: Vec<_> = cfg.probes.iter().map(|p| p.nbhd.clone()).collect();
    let run = run_zerodim(f, &probes, &zerodim_config(cfg))?;
    t.lap(&mut res, "pipeline");

    let mut qrows = Vec::new();
    for n in 0..=cfg.n_max {
        let q = &run.quantizer_checks[n];
        let fc = &run.factor_checks[n];
        let diag_sup = run
            .diagonal
            .iter()
            .filter_map(|d| d.sups.get(n).map(|(_, s)| *s))
            .max();
        // tightest level whose stage bound is reached on every probe
        let budget = cfg
            .levels
            .iter()
            .filter(|&&l| {
                run.diagonal
                    .iter()
                    .filter(|d| d.l == l)
                    .all(|d| d.m_l.is_some_and(|m| m <= n))
            })
            .map(|&l| Dyadic::pow2(2 - l as i32))
            .min();
        let diag_ok = match (diag_sup, budget) {
            (Some(s), Some(b)) => s < b,
            _ => true,
        };
        qrows.push(vec![
            n.to_string(),
            flag(q.cond1),
            q.cond2_sup.to_string(),
            flag(q.cond3),
            diag_sup.map(|s| s.to_string()).unwrap_or_default(),
            budget.map(|b| b.to_string()).unwrap_or_default(),
            flag(q.passed() && fc.passed() && diag_ok),
        ]);
    }
    out.csv(
        "quantizers.csv",
        &["n", "cond1", "cond2_sup", "cond3", "diag_dist_sup", "budget", "pass"],
        &qrows,
    )?;

    let frows: Vec<Vec<String>> = run
        .factor_checks
        .iter()
        .map(|c| {
            vec![
                c.level.to_string(),
                c.rate_sup.to_string(),
                flag(c.rate_ok),
                flag(c.discrete_ok),
                flag(c.telescoping_ok),
                run.factorization.factors[c.level].declared_image().len().to_string(),
            ]
        })
        .collect();
    out.csv(
        "factors.csv",
        &["n", "rate_sup", "rate_ok", "discrete_ok", "telescoping_ok", "image_size"],
        &frows,
    )?;

    let crows: Vec<Vec<String>> = run
        .covers
        .iter()
        .map(|c| vec![c.level.to_string(), c.cells.len().to_string()])
        .collect();
    out.csv("covers.csv", &["n", "cells"], &crows)?;

    let mut drows = Vec::new();
    for d in &run.diagonal {
        for (n, sup) in &d.sups {
            let in_range = d.m_l.is_some_and(|m| *n >= m);
            drows.push(vec![
                d.l.to_string(),
                cfg.probes[d.probe].id.clone(),
                d.m_l.map(|m| m.to_string()).unwrap_or_default(),
                n.to_string(),
                sup.to_string(),
                d.budget.to_string(),
                flag(in_range),
                flag(!in_range || *sup < d.budget),
            ]);
        }
    }
    out.csv(
        "diagonal.csv",
        &["l", "probe_id", "m_l", "n", "sup", "budget", "in_range", "within"],
        &drows,
    )?;

    let trows: Vec<Vec<String>> = run
        .tails
        .iter()
        .map(|(l, w)| match w {
            None => vec![l.to_string(), flag(true), String::new(), String::new(), String::new()],
            Some((n, u, v)) => vec![l.to_string(), flag(false), n.to_string(), u.to_string(), v.to_string()],
        })
        .collect();
    out.csv("tails.csv", &["l", "holds", "n", "x_cell", "y_cell"], &trows)?;
    t.lap(&mut res, "reports");

    res.passed = run.passed();
    res.summary.push(("levels".into(), (cfg.n_max + 1).to_string()));
    res.summary.push(("image_size".into(), run.sample.len().to_string()));
    res.summary
        .push(("grid_sample_complete".into(), run.grid_sample_complete.to_string()));
    res.notes.push(REINDEXING_NOTE.into());
    res.notes.push(
        "m(l) compares f_{l,n} with f_{l+1} = g_0 ... g_l, the function the factors telescope to".into(),
    );
    Ok(res)
}

#[derive(Serialize)]
struct BallRecord {
    probe_id: String,
    side: String,
    eps_num: String,
    eps_log2_den: u32,
    member: bool,
    witness_x: Option<String>,
    witness_y: Option<String>,
}

pub fn ball(cfg: &ExperimentConfig, out: &mut ReportDir) -> Result<Outcome, Failure> {
    let mut res = Outcome::default();
    let mut t = Timer::start();
    let mut records = Vec::new();
    let mut all = true;
    for b in &cfg.balls {
        let r = ball_membership(&BallQuery {
            center: cfg.function.clone(),
            candidate: b.candidate.clone(),
            side: b.side,
            eps: b.eps,
            grid_depth: cfg.grid_depth,
        })?;
        if let Some(expect) = b.expect {
            all &= expect == r.member;
        }
        records.push(BallRecord {
            probe_id: b.id.clone(),
            side: b.side.to_string(),
            eps_num: b.eps.numerator().to_string(),
            eps_log2_den: b.eps.log2_denominator(),
            member: r.member,
            witness_x: r.witness.as_ref().map(|(x, _)| x.to_string()),
            witness_y: r.witness.as_ref().map(|(_, y)| y.to_string()),
        });
    }
    t.lap(&mut res, "queries");
    out.jsonl("ball.jsonl", &records)?;
    res.passed = all;
    res.summary.push(("queries".into(), records.len().to_string()));
    Ok(res)
}

pub fn closure(cfg: &ExperimentConfig, out: &mut ReportDir) -> Result<Outcome, Failure> {
    let mut res = Outcome::default();
    let mut t = Timer::start();
    let spec = cfg
        .closure
        .as_ref()
        .ok_or_else(|| Failure::config("closure-probe needs a [closure] section"))?;
    if spec.last_stage + 2 > cfg.n_max {
        return Err(Failure::config(format!(
            "closure stages up to {} need n_max >= {}",
            spec.last_stage,
            spec.last_stage + 2
        )));
    }
    let zcfg = zerodim_config(cfg);
    let mut stages = quantizer_stages(&cfg.function, spec.last_stage, &zcfg)?;
    if let Some((k, shift)) = &spec.corrupt {
        corrupt_stage(&mut stages, *k, shift.clone())?;
    }
    t.lap(&mut res, "stages");
    let probes: Vec<_> = cfg.probes.iter().map(|p| p.nbhd.clone()).collect();
    let rep = closure_probe(&cfg.function, &stages, &probes, &zcfg)?;
    t.lap(&mut res, "probe");
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.stage.to_string(),
                r.eps.to_string(),
                r.dist_l.to_string(),
                r.dist_r.to_string(),
                flag(r.within),
                r.inner_level.to_string(),
                flag(r.inner_pass),
                r.composite_sup.to_string(),
                r.composite_budget.to_string(),
                flag(r.pass),
            ]
        })
        .collect();
    out.csv(
        "closure.csv",
        &[
            "stage",
            "eps",
            "dist_l",
            "dist_r",
            "within",
            "inner_level",
            "inner_pass",
            "composite_sup",
            "composite_budget",
            "pass",
        ],
        &rows,
    )?;
    res.passed = rep.failed_stage.is_none();
    res.summary.push((
        "failed_stage".into(),
        rep.failed_stage.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
    ));
    Ok(res)
}

pub fn problem3(cfg: &ExperimentConfig, out: &mut ReportDir) -> Result<Outcome, Failure> {
    let mut res = Outcome::default();
    let mut t = Timer::start();
    let g = cfg
        .problem3
        .as_ref()
        .ok_or_else(|| Failure::config("problem3 needs a [problem3] section"))?;
    let rep = problem3_check(&cfg.function, g, cfg.grid_depth)?;
    t.lap(&mut res, "check");
    let (wx, wy) = match &rep.witness {
        Some((x, y)) => (x.to_string(), y.to_string()),
        None => (String::new(), String::new()),
    };
    out.csv(
        "problem3.csv",
        &[
            "grid_depth",
            "sup_abs",
            "sup_metric",
            "within",
            "witness_x",
            "witness_y",
            "image_size",
            "image_certified",
            "sections_certified",
        ],
        &[vec![
            rep.grid_depth.to_string(),
            rep.sup_abs.to_string(),
            rep.sup_metric.to_string(),
            flag(rep.within),
            wx,
            wy,
            rep.image_size.to_string(),
            flag(rep.image_certified),
            flag(rep.sections_certified),
        ]],
    )?;
    res.passed = rep.within;
    res.notes
        .push("the bound is checked on raw differences; the bounded metric is reported alongside".into());
    Ok(res)
}
