//! Experiment configuration: `[section]` headers with `key = value` lines.
//!
//! ```text
//! [experiment]
//! group = dyadic
//! function = diag ones 1(0), 11(0)
//! grid_depth = 6
//! n_max = 3
//! levels = 1, 2
//!
//! [probe.a]
//! kx = point 10(0)
//! ky = set {*}
//! ```

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sepcont_core::{
    parse_function, BallSide, CantorPoint, ClopenSet, ClosedSet, Compact, Dyadic, GroupElement,
    GroupSpec, SepFunction, SubbasicNbhd,
};

use crate::exit::Failure;

pub const DEFAULT_MAX_DEPTH: usize = 16;
pub const MAX_N: usize = 12;

/// Raw sections in file order.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub sections: Vec<(String, Vec<(String, String)>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut sections: Vec<(String, Vec<(String, String)>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if sections.iter().any(|(n, _)| *n == name) {
                    return Err(Failure::config(format!("line {}: duplicate section [{name}]", lineno + 1)));
                }
                sections.push((name, Vec::new()));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let section = sections
                .last_mut()
                .ok_or_else(|| Failure::config(format!("line {}: key outside a section", lineno + 1)))?;
            let key = key.trim().to_string();
            if section.1.iter().any(|(k, _)| *k == key) {
                return Err(Failure::config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            section.1.push((key, value.trim().to_string()));
        }
        Ok(RawConfig { sections })
    }

    pub fn section(&self, name: &str) -> Option<&[(String, String)]> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, kv)| kv.as_slice())
    }

    /// Sections named `<prefix>.<id>`, in file order.
    pub fn prefixed<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a [(String, String)])> + 'a {
        self.sections.iter().filter_map(move |(n, kv)| {
            n.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('.'))
                .map(|id| (id, kv.as_slice()))
        })
    }
}

fn get<'a>(kv: &'a [(String, String)], key: &str) -> Option<&'a str> {
    kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn require<'a>(kv: &'a [(String, String)], section: &str, key: &str) -> Result<&'a str, Failure> {
    get(kv, key).ok_or_else(|| Failure::config(format!("[{section}] is missing `{key}`")))
}

fn parse_num<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<T, Failure> {
    v.trim()
        .parse()
        .map_err(|_| Failure::config(format!("[{section}] {key}: `{v}` is not a number")))
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

#[derive(Clone, Debug)]
pub struct Probe {
    pub id: String,
    pub nbhd: SubbasicNbhd,
}

#[derive(Clone, Debug)]
pub struct BallSpec {
    pub id: String,
    pub candidate: SepFunction,
    pub side: BallSide,
    pub eps: Dyadic,
    /// Expected membership; a mismatch fails the run.
    pub expect: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct ClosureSpec {
    pub last_stage: usize,
    pub corrupt: Option<(usize, GroupElement)>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub group: GroupSpec,
    pub function_text: String,
    pub function: SepFunction,
    pub grid_depth: usize,
    pub n_max: usize,
    pub levels: Vec<usize>,
    pub net_depth: usize,
    pub depth_cap: usize,
    pub probes: Vec<Probe>,
    pub balls: Vec<BallSpec>,
    pub closure: Option<ClosureSpec>,
    pub problem3: Option<SepFunction>,
}

/// Settings that come from the command line or environment.
#[derive(Clone, Debug)]
pub struct Overrides {
    pub grid_depth: Option<usize>,
    pub seed: u64,
    pub max_depth: usize,
}

fn parse_compact(text: &str) -> Result<Compact, Failure> {
    let text = text.trim();
    if let Some(p) = text.strip_prefix("point") {
        let p: CantorPoint = p.trim().parse().map_err(Failure::from_core)?;
        return Ok(Compact::Point(p));
    }
    if let Some(body) = text.strip_prefix("set") {
        // `set {..} + p + q` adds isolated points
        let mut parts = body.split('+');
        let clopen: ClopenSet = parts.next().unwrap_or("").parse().map_err(Failure::from_core)?;
        let points = parts
            .map(|p| p.trim().parse::<CantorPoint>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(Failure::from_core)?;
        return Ok(Compact::Set(ClosedSet::new(clopen, points)));
    }
    Err(Failure::config(format!("compact set `{text}` must start with `point` or `set`")))
}

fn random_probe(rng: &mut ChaCha8Rng, grid_depth: usize) -> Result<SubbasicNbhd, Failure> {
    let len = rng.gen_range(0..=grid_depth.min(8));
    let prefix: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
    let tail = vec![rng.gen::<bool>()];
    let point = CantorPoint::new(prefix, tail).map_err(Failure::from_core)?;
    let depth = rng.gen_range(0..=grid_depth.min(3));
    let cyl: Vec<bool> = (0..depth).map(|_| rng.gen()).collect();
    let set = Compact::Set(ClopenSet::from_cylinder(&sepcont_core::Cylinder::new(cyl)).into());
    let (kx, ky) = if rng.gen() {
        (Compact::Point(point), set)
    } else {
        (set, Compact::Point(point))
    };
    SubbasicNbhd::new(kx, ky, vec![]).map_err(Failure::from_core)
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<(Self, String), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_text(&text, Some(&base), overrides)?, text))
    }

    pub fn from_text(text: &str, base: Option<&Path>, overrides: &Overrides) -> Result<Self, Failure> {
        let raw = RawConfig::parse(text)?;
        let exp = raw
            .section("experiment")
            .ok_or_else(|| Failure::config("missing [experiment] section"))?;
        let group = GroupSpec::from_name(require(exp, "experiment", "group")?).map_err(Failure::from_core)?;
        let function_text = require(exp, "experiment", "function")?.to_string();
        let function = parse_function(&group, &function_text, base).map_err(Failure::from_core)?;
        let grid_depth = match overrides.grid_depth {
            Some(d) => d,
            None => parse_num("experiment", "grid_depth", require(exp, "experiment", "grid_depth")?)?,
        };
        if grid_depth > overrides.max_depth {
            return Err(Failure::config(format!(
                "grid_depth {grid_depth} exceeds the depth cap {}",
                overrides.max_depth
            )));
        }
        let n_max: usize = parse_num("experiment", "n_max", get(exp, "n_max").unwrap_or("3"))?;
        if n_max > MAX_N {
            return Err(Failure::config(format!("n_max {n_max} exceeds {MAX_N}")));
        }
        let levels = split_list(get(exp, "levels").unwrap_or("1, 2"))
            .map(|v| parse_num("experiment", "levels", v))
            .collect::<Result<Vec<usize>, _>>()?;
        let net_depth = match get(exp, "net_depth") {
            Some(v) => parse_num("experiment", "net_depth", v)?,
            None => n_max + 4,
        };
        if let Some(d) = function.local_depth() {
            if d > grid_depth {
                return Err(Failure::config(format!(
                    "function `{function_text}` uses cylinders of depth {d} > grid_depth {grid_depth}"
                )));
            }
        }

        let mut probes = Vec::new();
        for (id, kv) in raw.prefixed("probe") {
            let section = format!("probe.{id}");
            let kx = parse_compact(require(kv, &section, "kx")?)?;
            let ky = parse_compact(require(kv, &section, "ky")?)?;
            for k in [&kx, &ky] {
                if k.depth() > grid_depth {
                    return Err(Failure::config(format!(
                        "[{section}] uses cylinders of depth {} > grid_depth {grid_depth}",
                        k.depth()
                    )));
                }
            }
            let allowed = split_list(get(kv, "u").unwrap_or(""))
                .map(|e| group.parse_element(e))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::from_core)?;
            let nbhd = SubbasicNbhd::new(kx, ky, allowed).map_err(Failure::from_core)?;
            probes.push(Probe { id: id.to_string(), nbhd });
        }
        let random: usize = parse_num("experiment", "random_probes", get(exp, "random_probes").unwrap_or("0"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(overrides.seed);
        for i in 0..random {
            probes.push(Probe {
                id: format!("rand{i}"),
                nbhd: random_probe(&mut rng, grid_depth)?,
            });
        }

        let mut balls = Vec::new();
        for (id, kv) in raw.prefixed("ball") {
            let section = format!("ball.{id}");
            let candidate =
                parse_function(&group, require(kv, &section, "candidate")?, base).map_err(Failure::from_core)?;
            let side: BallSide = require(kv, &section, "side")?.parse().map_err(Failure::from_core)?;
            let eps: Dyadic = require(kv, &section, "eps")?.parse().map_err(Failure::from_core)?;
            if eps <= Dyadic::ZERO {
                return Err(Failure::config(format!("[{section}] eps must be positive")));
            }
            let expect = match get(kv, "expect") {
                None => None,
                Some("member") => Some(true),
                Some("nonmember") => Some(false),
                Some(other) => {
                    return Err(Failure::config(format!(
                        "[{section}] expect must be `member` or `nonmember`, got `{other}`"
                    )))
                }
            };
            balls.push(BallSpec {
                id: id.to_string(),
                candidate,
                side,
                eps,
                expect,
            });
        }

        let closure = match raw.section("closure") {
            None => None,
            Some(kv) => {
                let last_stage = parse_num("closure", "stages", get(kv, "stages").unwrap_or("3"))?;
                let corrupt = match get(kv, "corrupt_stage") {
                    None => None,
                    Some(s) => {
                        let stage = parse_num("closure", "corrupt_stage", s)?;
                        let value = group
                            .parse_element(require(kv, "closure", "corrupt_value")?)
                            .map_err(Failure::from_core)?;
                        Some((stage, value))
                    }
                };
                Some(ClosureSpec { last_stage, corrupt })
            }
        };

        let problem3 = match raw.section("problem3") {
            None => None,
            Some(kv) => Some(
                parse_function(&group, require(kv, "problem3", "candidate")?, base).map_err(Failure::from_core)?,
            ),
        };

        Ok(ExperimentConfig {
            group,
            function_text,
            function,
            grid_depth,
            n_max,
            levels,
            net_depth,
            depth_cap: overrides.max_depth,
            probes,
            balls,
            closure,
            problem3,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn overrides() -> Overrides {
        Overrides {
            grid_depth: None,
            seed: 0,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    const BASIC: &str = "
[experiment]
group = dyadic
function = diag ones 1(0), 11(0)
grid_depth = 4
n_max = 3
levels = 1

[probe.b]
kx = point 10(0)
ky = set {0, 11}

[probe.a]
kx = set !{0}
ky = point (1)
u = e
";

    #[test]
    fn probes_keep_file_order() {
        let cfg = ExperimentConfig::from_text(BASIC, None, &overrides()).unwrap();
        let ids: Vec<&str> = cfg.probes.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
        assert_eq!(cfg.levels, vec![1]);
        assert_eq!(cfg.net_depth, 7);
    }

    #[test]
    fn limits_are_enforced() {
        let deep = BASIC.replace("grid_depth = 4", "grid_depth = 17");
        assert!(ExperimentConfig::from_text(&deep, None, &overrides()).is_err());
        let mut o = overrides();
        o.max_depth = 20;
        assert!(ExperimentConfig::from_text(&deep, None, &o).is_ok());
        let big_n = BASIC.replace("n_max = 3", "n_max = 13");
        assert!(ExperimentConfig::from_text(&big_n, None, &overrides()).is_err());
        let shallow = BASIC.replace("grid_depth = 4", "grid_depth = 1");
        assert!(ExperimentConfig::from_text(&shallow, None, &overrides()).is_err());
    }

    #[test]
    fn random_probes_follow_the_seed() {
        let text = BASIC.replace("levels = 1", "levels = 1\nrandom_probes = 5");
        let a = ExperimentConfig::from_text(&text, None, &overrides()).unwrap();
        let b = ExperimentConfig::from_text(&text, None, &overrides()).unwrap();
        assert_eq!(a.probes.len(), 7);
        for (p, q) in a.probes.iter().zip(&b.probes) {
            assert_eq!(p.nbhd, q.nbhd);
        }
    }

    #[test]
    fn malformed_lines_are_rejected() {
        for bad in ["group = dyadic", "[experiment]\ngroup dyadic", "[a]\nx = 1\n[a]\n"] {
            assert!(RawConfig::parse(bad).is_err(), "{bad}");
        }
    }
}
