//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use sepcont_core::discrete::approximate;
use sepcont_core::net::net_tower;
use sepcont_core::uniform::{ball_membership, BallQuery};
use sepcont_core::zerodim::{tail_containment, ZeroDimConfig};
use sepcont_core::{
    parse_function, run_zerodim, BallSide, CantorPoint, ClopenSet, Compact, Cylinder, Dyadic, GroupElement,
    GroupSpec, ProbeGrid, SepFunction, SubbasicNbhd,
};

type Check = Result<String, String>;

const DIAG: &str = "diag ones 1(0), 11(0), 101(0), 0(01)";

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pt(s: &str) -> CantorPoint {
    s.parse().unwrap()
}

fn cyl(bits: &str) -> Cylinder {
    Cylinder::new(bits.chars().map(|c| c == '1').collect())
}

fn set(cyls: &[&str]) -> Compact {
    Compact::Set(ClopenSet::from_cylinders(&cyls.iter().map(|c| cyl(c)).collect::<Vec<_>>()).into())
}

fn diag() -> SepFunction {
    parse_function(&GroupSpec::Dyadic, DIAG, None).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// The `[experiment]` keys the oracles need, read without the CLI's parser.
struct Shipped {
    name: String,
    group: GroupSpec,
    function: SepFunction,
    grid_depth: usize,
    n_max: usize,
}

fn shipped_examples() -> Result<Vec<Shipped>, String> {
    let dir = configs_dir();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(err)?;
        let mut in_exp = false;
        let mut kv = std::collections::HashMap::new();
        for line in text.lines().map(str::trim) {
            if line.starts_with('[') {
                in_exp = line == "[experiment]";
            } else if in_exp {
                if let Some((k, v)) = line.split_once('=') {
                    kv.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
        }
        let group = GroupSpec::from_name(&kv["group"]).map_err(err)?;
        let function = parse_function(&group, &kv["function"], Some(&dir)).map_err(err)?;
        out.push(Shipped {
            name: p.file_name().unwrap().to_string_lossy().into_owned(),
            group,
            function,
            grid_depth: kv["grid_depth"].parse().map_err(err)?,
            n_max: kv.get("n_max").map_or(Ok(3), |v| v.parse()).map_err(err)?,
        });
    }
    if out.len() < 3 {
        return Err(format!("only {} shipped examples found", out.len()));
    }
    Ok(out)
}

/// Quantizer conditions on the diagonal example.
fn criterion_1() -> Check {
    let f = diag();
    let g = f.group();
    let run = run_zerodim(&f, &[], &ZeroDimConfig::new(3, 6)).map_err(err)?;
    ensure(run.grid_sample_complete, || "grid sample misses part of the image".into())?;
    for n in 0..=3 {
        let q = &run.quantizer_checks[n];
        ensure(q.cond1 && q.cond3, || format!("level {n}: core flags cond1={} cond3={}", q.cond1, q.cond3))?;
        ensure(q.cond2_sup <= Dyadic::pow2_neg(n as u32), || format!("level {n}: cond2 sup {}", q.cond2_sup))?;

        let map = &run.quantizers[n].map;
        let cover = &run.covers[n];
        // (1) r_n is constant on each cover cell, and the cells refine
        for cell in &cover.cells {
            let vals: BTreeSet<_> = cell.iter().map(|z| map.get(z).cloned()).collect();
            ensure(vals.len() == 1 && !vals.contains(&None), || format!("level {n}: r_n not constant on a cell"))?;
            if n > 0 {
                let parents: BTreeSet<_> = cell.iter().map(|z| run.covers[n - 1].cell_of(z)).collect();
                ensure(parents.len() == 1, || format!("level {n}: a cell straddles two parent cells"))?;
            }
        }
        for z in &run.sample {
            let r = map.get(z).ok_or_else(|| format!("level {n}: r_n undefined at {z}"))?;
            // (2) close to the identity
            let d = g.dist(r, z).map_err(err)?;
            ensure(d <= Dyadic::pow2_neg(n as u32), || format!("level {n}: d(r_n({z}), {z}) = {d}"))?;
            // (3) increments lie in the net
            if n > 0 {
                let prev = run.quantizers[n - 1].map.get(z).unwrap();
                let step = g.left_quotient(prev, r).map_err(err)?;
                ensure(run.nets[n - 1].elements.contains(&step), || {
                    format!("level {n}: increment {step} at {z} outside net({})", n - 1)
                })?;
            }
        }
    }
    Ok(format!("levels 0..3, {} image samples", run.sample.len()))
}

/// `d(r_n ∘ f, f) ≤ 2^-n` on the grid of every shipped example.
fn criterion_2() -> Check {
    let mut checked = 0;
    for ex in shipped_examples()? {
        let run = run_zerodim(&ex.function, &[], &ZeroDimConfig::new(ex.n_max, ex.grid_depth)).map_err(err)?;
        let reps = ProbeGrid::new(ex.grid_depth).representatives().to_vec();
        for n in 0..=ex.n_max {
            let fn_ = &run.factorization.approximants[n];
            let mut sup = Dyadic::ZERO;
            for x in &reps {
                for y in &reps {
                    let z = ex.function.eval(x, y).map_err(err)?;
                    let a = fn_.eval(x, y).map_err(err)?;
                    ensure(Some(&a) == run.quantizers[n].map.get(&z), || {
                        format!("{}: f_{n} is not r_{n} after f at ({x}, {y})", ex.name)
                    })?;
                    sup = sup.max(ex.group.dist(&a, &z).map_err(err)?);
                }
            }
            ensure(sup <= Dyadic::pow2_neg(n as u32), || format!("{}: n={n} sup {sup}", ex.name))?;
            ensure(sup == run.factor_checks[n].rate_sup, || {
                format!("{}: n={n} core rate {} vs oracle {sup}", ex.name, run.factor_checks[n].rate_sup)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (example, n) pairs"))
}

/// Every grid value of `g_n` is an element of net(n).
fn criterion_3() -> Check {
    let mut values = 0usize;
    for ex in shipped_examples()? {
        let run = run_zerodim(&ex.function, &[], &ZeroDimConfig::new(ex.n_max, ex.grid_depth)).map_err(err)?;
        let reps = ProbeGrid::new(ex.grid_depth).representatives().to_vec();
        for (n, g) in run.factorization.factors.iter().enumerate().take(ex.n_max + 1) {
            let net = &run.nets[n].elements;
            for x in &reps {
                for y in &reps {
                    let v = g.eval(x, y).map_err(err)?;
                    ensure(net.contains(&v), || format!("{}: g_{n}({x}, {y}) = {v} not in net({n})", ex.name))?;
                    values += 1;
                }
            }
        }
    }
    Ok(format!("{values} grid values"))
}

fn diagonal_probes() -> Vec<SubbasicNbhd> {
    let p = |s: &str| Compact::Point(pt(s));
    let whole = || Compact::Set(ClopenSet::whole().into());
    vec![
        SubbasicNbhd::new(p("110(0)"), set(&["11"]), vec![]).unwrap(),
        SubbasicNbhd::new(p("(0)"), set(&["0"]), vec![]).unwrap(),
        SubbasicNbhd::new(p("10(0)"), whole(), vec![]).unwrap(),
        SubbasicNbhd::new(whole(), p("(1)"), vec![]).unwrap(),
        SubbasicNbhd::new(set(&["10"]), p("0(1)"), vec![]).unwrap(),
    ]
}

/// Diagonal budget for l = 1, 2 and tail containment.
fn criterion_4() -> Check {
    let f = diag();
    let g = f.group();
    let probes = diagonal_probes();
    let mut cfg = ZeroDimConfig::new(6, 6);
    cfg.levels = vec![1, 2];
    let run = run_zerodim(&f, &probes, &cfg).map_err(err)?;
    let mut ms = Vec::new();
    for rep in &run.diagonal {
        let m = rep.m_l.ok_or_else(|| format!("l={} probe {}: no stage m(l) up to n_max 6", rep.l, rep.probe))?;
        let budget = Dyadic::pow2(2 - rep.l as i32);
        for n in m..=6 {
            let diag_n = run.tower.diagonal(n);
            let mut sup = Dyadic::ZERO;
            for (x, y) in probes[rep.probe].grid_points(6) {
                sup = sup.max(g.dist(&f.eval(&x, &y).map_err(err)?, &diag_n.eval(&x, &y).map_err(err)?).map_err(err)?);
            }
            ensure(sup < budget, || format!("l={} probe {} n={n}: sup {sup} >= {budget}", rep.l, rep.probe))?;
            ensure(rep.sups[n].1 == sup, || format!("l={} n={n}: core sup {} vs oracle {sup}", rep.l, rep.sups[n].1))?;
        }
        ensure(rep.pass, || format!("l={} probe {}: core report fails", rep.l, rep.probe))?;
        ms.push(format!("{}:{}", rep.l, m));
    }
    // tails, pointwise on a grid fine enough for every table
    for l in [1usize, 2] {
        for n in l + 1..=6 {
            let tail = run.tower.partial_product(l + 1, n, n).map_err(err)?;
            let depth = tail.local_depth().unwrap_or(0);
            let reps = ProbeGrid::new(depth).representatives().to_vec();
            for x in &reps {
                for y in &reps {
                    let v = tail.eval(x, y).map_err(err)?;
                    ensure(g.norm(&v).map_err(err)? <= Dyadic::pow2_neg(l as u32), || {
                        format!("l={l} n={n}: tail {v} at ({x}, {y})")
                    })?;
                }
            }
        }
        ensure(tail_containment(&run.tower, l).map_err(err)?.is_none(), || format!("l={l}: core tail check fails"))?;
    }
    Ok(format!("{} probe reports, m(l) = [{}]", run.diagonal.len(), ms.join(" ")))
}

/// Certificates for the discrete approximation of the diagonal example.
fn criterion_5() -> Check {
    let f = diag();
    let p = |s: &str| Compact::Point(pt(s));
    let whole = || Compact::Set(ClopenSet::whole().into());
    let probes = [
        (p("(0)"), set(&["0"])),
        (p("(0)"), whole()),
        (p("(1)"), whole()),
        (p("10(0)"), whole()),
        (p("10(0)"), set(&["1"])),
        (whole(), p("(0)")),
        (set(&["0"]), p("(0)")),
        (whole(), p("(1)")),
        (whole(), p("10(0)")),
    ];
    let approx = approximate(&f, 12, 16).map_err(err)?;
    let mut ms = Vec::new();
    for (kx, ky) in probes {
        let nb = SubbasicNbhd::new(kx.clone(), ky.clone(), vec![]).map_err(err)?;
        let cert = sepcont_core::discrete::convergence_certificate(&f, &approx, &nb).map_err(err)?;
        ensure(cert.m <= 12, || format!("{kx} x {ky}: m = {}", cert.m))?;
        // W = f(K) from a fine grid
        let image: BTreeSet<GroupElement> = nb
            .grid_points(12)
            .iter()
            .map(|(x, y)| f.eval(x, y))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        ensure(image.iter().cloned().collect::<Vec<_>>() == cert.image, || {
            format!("{kx} x {ky}: certificate image differs from the grid image")
        })?;
        for n in cert.m..=12 {
            let g = approx.table(n);
            let depth = g.local_depth().unwrap_or(0);
            for (x, y) in nb.grid_points(depth) {
                let v = g.eval(&x, &y).map_err(err)?;
                ensure(image.contains(&v), || format!("{kx} x {ky}: g_{n}({x}, {y}) = {v} outside W"))?;
            }
        }
        ensure(cert.holds() && !cert.is_vacuous(), || format!("{kx} x {ky}: core certificate fails"))?;
        ms.push(cert.m.to_string());
    }
    Ok(format!("{} probes, m = [{}]", ms.len(), ms.join(" ")))
}

/// Table approximations recover two-valued depth-2 tables over C_3.
fn criterion_6() -> Check {
    let group = GroupSpec::cyclic(3).map_err(err)?;
    let reps = ProbeGrid::new(2).representatives().to_vec();
    let n = 8;
    for i in 0u32..512 {
        // stride through all 2^16 two-valued patterns, varying the low bits too
        let code = i * 128 + (i * 61) % 128;
        let hi = 1 + i % 2;
        let values: Vec<GroupElement> = (0..16)
            .map(|b| GroupElement::Index(if code >> b & 1 == 1 { hi } else { 0 }))
            .collect();
        let f = SepFunction::table(&group, 2, values).map_err(err)?;
        let approx = approximate(&f, n, 16).map_err(err)?;
        let g = approx.table(n);
        for x in &reps {
            for y in &reps {
                let (a, b) = (f.eval(x, y).map_err(err)?, g.eval(x, y).map_err(err)?);
                ensure(a == b, || format!("table {code:#06x}: g_{n}({x}, {y}) = {b}, f = {a}"))?;
            }
        }
    }
    Ok(format!("512 tables, g_{n} exact"))
}

/// Net verification in every group.
fn criterion_7() -> Check {
    let mut count = 0;
    for group in [GroupSpec::Dyadic, GroupSpec::cyclic(5).map_err(err)?, GroupSpec::Real] {
        let nets = net_tower(&group, 4, 8).map_err(err)?;
        for net in &nets {
            let chk = net.verify(&group).map_err(err)?;
            ensure(chk.passed(), || format!("{} k={}: {chk:?}", group.name(), net.scale))?;
            for (i, a) in net.elements.iter().enumerate() {
                ensure(group.norm(a).map_err(err)? <= net.radius, || format!("{a} outside the ball"))?;
                for b in &net.elements[i + 1..] {
                    ensure(group.dist(a, b).map_err(err)? >= net.separation, || format!("{a}, {b} too close"))?;
                }
            }
            count += 1;
        }
        if group == GroupSpec::Dyadic {
            ensure(nets[1].elements.len() == 8, || format!("dyadic k=1 has {} elements", nets[1].elements.len()))?;
        }
    }
    Ok(format!("{count} nets, dyadic k=1 has 8 elements"))
}

/// Ball algebra on a deterministic query suite.
fn criterion_8() -> Check {
    let suites: Vec<(GroupSpec, Vec<&str>)> = vec![
        (
            GroupSpec::Dyadic,
            vec![DIAG, "const e", "const 01(0)", "prod(diag ones [1(0), 11(0)], const 001(0))", "table 1 [e, 1(0), 01(0), 0001(0)]"],
        ),
        (GroupSpec::cyclic(4).map_err(err)?, vec!["const 0", "table 1 [0, 1, 2, 3]", "diag {0} 2"]),
        (GroupSpec::Real, vec!["const 0", "table 1 [0, 0.25, -0.5, 1/2^3]", "diag ones [0.5, 1/2^4]"]),
    ];
    let radii = [Dyadic::pow2_neg(3), Dyadic::pow2_neg(2), Dyadic::pow2_neg(1), Dyadic::ONE];
    let mut queries = 0usize;
    for (group, texts) in suites {
        let fs: Vec<SepFunction> = texts
            .iter()
            .map(|t| parse_function(&group, t, None))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for a in &fs {
            for b in &fs {
                let mut prev: Option<[bool; 4]> = None;
                for eps in radii {
                    let mut m = [false; 4];
                    for (k, side) in BallSide::ALL.into_iter().enumerate() {
                        let q = BallQuery {
                            center: a.clone(),
                            candidate: b.clone(),
                            side,
                            eps,
                            grid_depth: 3,
                        };
                        m[k] = ball_membership(&q).map_err(err)?.member;
                        queries += 1;
                    }
                    let [l, r, lr, rl] = m;
                    let ctx = || format!("{}: {a} vs {b} at {eps}", group.name());
                    ensure(lr == (l && r), || format!("{}: lr != l and r", ctx()))?;
                    ensure(!l || rl, || format!("{}: l without rl", ctx()))?;
                    ensure(!r || rl, || format!("{}: r without rl", ctx()))?;
                    if group.is_abelian() {
                        ensure(l == r, || format!("{}: l != r in an abelian group", ctx()))?;
                    }
                    if let Some(p) = prev {
                        ensure((0..4).all(|k| !p[k] || m[k]), || format!("{}: balls not nested", ctx()))?;
                    }
                    if std::ptr::eq(a, b) {
                        ensure(m.iter().all(|&x| x), || format!("{}: center outside its own ball", ctx()))?;
                    }
                    prev = Some(m);
                }
            }
        }
    }
    ensure(queries >= 100, || format!("only {queries} queries"))?;
    Ok(format!("{queries} queries"))
}

fn run_cli(out: &Path, sub: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_sepcont"))
        .arg("--config")
        .arg(configs_dir().join("diag-dyadic.cfg"))
        .arg("--out")
        .arg(out)
        .arg(sub)
        .status()
        .map_err(err)?;
    ensure(status.code() == Some(0), || format!("{sub} exited with {status}"))
}

/// Byte-identical reports across repeated runs.
fn criterion_9() -> Check {
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut files = 0;
    for sub in ["nets", "approx-discrete", "approx-zerodim", "ball", "closure-probe"] {
        let (a, b) = (tmp.path().join(format!("{sub}-a")), tmp.path().join(format!("{sub}-b")));
        run_cli(&a, sub)?;
        run_cli(&b, sub)?;
        let mut names: Vec<_> = std::fs::read_dir(&a).map_err(err)?.map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            let (x, y) = (std::fs::read(a.join(&name)).map_err(err)?, std::fs::read(b.join(&name)).map_err(err)?);
            if name == "manifest.json" {
                // timings differ; the listed checksums must not
                let parse = |v: &[u8]| -> Result<serde_json::Value, String> {
                    let j: serde_json::Value = serde_json::from_slice(v).map_err(err)?;
                    Ok(j["reports"].clone())
                };
                ensure(parse(&x)? == parse(&y)?, || format!("{sub}: manifest checksums differ"))?;
            } else {
                ensure(x == y, || format!("{sub}: {} differs", name.to_string_lossy()))?;
                files += 1;
            }
        }
    }
    Ok(format!("{files} report files identical"))
}

fn main() {
    let criteria: [(u32, fn() -> Check, Option<Duration>); 9] = [
        (1, criterion_1, Some(Duration::from_secs(5))),
        (2, criterion_2, Some(Duration::from_secs(5))),
        (3, criterion_3, Some(Duration::from_secs(5))),
        (4, criterion_4, Some(Duration::from_secs(60))),
        (5, criterion_5, Some(Duration::from_secs(10))),
        (6, criterion_6, Some(Duration::from_secs(60))),
        (7, criterion_7, Some(Duration::from_secs(1))),
        (8, criterion_8, Some(Duration::from_secs(5))),
        (9, criterion_9, None),
    ];
    let mut failed = 0;
    for (k, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(lim)) if elapsed > lim => Err(format!("took {:.2}s, limit {}s", elapsed.as_secs_f64(), lim.as_secs())),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("criterion {k}: PASS ({:.2}s) {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {k}: FAIL ({:.2}s) {why}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
