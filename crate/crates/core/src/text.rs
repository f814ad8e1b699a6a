//! Text descriptions of functions.
//!
//! ```text
//! const <elt>
//! table <depth> <file.csv>        table <depth> [v, v, ...]
//! diag ones <values>              diag {00, 1} <values>
//! prod(f, g)    inv(f)    quant(f, n)
//! ```
//!
//! `<values>` is a comma-separated list, optionally in brackets; inside a
//! combinator a multi-value list must be bracketed. Element literals depend on
//! the group, e.g. `110(0)`, `2`, `-3/2^2`, and `e` is always the identity.
//! Table files hold `2^depth` lines of `2^depth` comma-separated literals,
//! one line per x-cylinder in lexicographic order.

use std::path::{Path, PathBuf};

use crate::cantor::{parse_bits, Cylinder};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::net::net_tower;
use crate::sepfun::SepFunction;
use crate::zerodim::{build_covers, build_quantizers};

/// Parses function descriptions relative to a base directory for table files.
pub struct FunctionParser<'a> {
    group: &'a GroupSpec,
    base: Option<PathBuf>,
}

struct Cursor<'s> {
    src: &'s str,
    pos: usize,
}

impl<'s> Cursor<'s> {
    fn rest(&self) -> &'s str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    /// Reads up to a top-level `,` or an unmatched `)`; parentheses opened
    /// inside the literal are kept.
    fn literal(&mut self) -> Result<&'s str> {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0usize;
        for (i, c) in self.rest().char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => {
                    self.pos = start + i;
                    break;
                }
                ')' => depth -= 1,
                ',' | ']' | '}' if depth == 0 => {
                    self.pos = start + i;
                    break;
                }
                _ => {}
            }
            self.pos = start + i + c.len_utf8();
        }
        let lit = self.src[start..self.pos].trim();
        if lit.is_empty() {
            return Err(self.error("expected a literal"));
        }
        Ok(lit)
    }

    fn word(&mut self) -> &'s str {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<usize> {
        let w = self.word();
        w.parse().map_err(|_| self.error(&format!("expected a number, got `{w}`")))
    }
}

impl<'a> FunctionParser<'a> {
    pub fn new(group: &'a GroupSpec, base: Option<&Path>) -> Self {
        FunctionParser {
            group,
            base: base.map(Path::to_path_buf),
        }
    }

    pub fn parse(&self, text: &str) -> Result<SepFunction> {
        let mut cur = Cursor { src: text, pos: 0 };
        let f = self.function(&mut cur, false)?;
        cur.skip_ws();
        if !cur.rest().is_empty() {
            return Err(cur.error("trailing input"));
        }
        Ok(f)
    }

    fn function(&self, cur: &mut Cursor<'_>, nested: bool) -> Result<SepFunction> {
        let head = cur.word();
        match head {
            "const" => SepFunction::constant(self.group, self.group.parse_element(cur.literal()?)?),
            "table" => {
                let depth = cur.number()?;
                let values = if cur.eat("[") {
                    let v = self.values_until(cur, "]")?;
                    cur.expect("]")?;
                    v
                } else {
                    let path = cur.literal()?;
                    self.read_table_file(path, depth)?
                };
                SepFunction::table(self.group, depth, values)
            }
            "diag" => {
                let cells = if cur.eat("{") {
                    let mut cells = Vec::new();
                    loop {
                        cells.push(Cylinder::new(parse_bits(cur.literal()?)?));
                        if !cur.eat(",") {
                            break;
                        }
                    }
                    cur.expect("}")?;
                    Some(cells)
                } else {
                    match cur.word() {
                        "ones" => None,
                        other => return Err(cur.error(&format!("unknown diagonal schema `{other}`"))),
                    }
                };
                let values = if cur.eat("[") {
                    let v = self.values_until(cur, "]")?;
                    cur.expect("]")?;
                    v
                } else if nested {
                    vec![self.group.parse_element(cur.literal()?)?]
                } else {
                    self.values_until(cur, "")?
                };
                match cells {
                    None => SepFunction::diagonal_ones(self.group, values),
                    Some(cells) => SepFunction::diagonal_cells(self.group, cells, values),
                }
            }
            "prod" => {
                cur.expect("(")?;
                let a = self.function(cur, true)?;
                cur.expect(",")?;
                let b = self.function(cur, true)?;
                cur.expect(")")?;
                SepFunction::product(&a, &b)
            }
            "inv" => {
                cur.expect("(")?;
                let a = self.function(cur, true)?;
                cur.expect(")")?;
                SepFunction::inverse(&a)
            }
            "quant" => {
                cur.expect("(")?;
                let a = self.function(cur, true)?;
                cur.expect(",")?;
                let n = cur.number()?;
                cur.expect(")")?;
                quantize(&a, n)
            }
            "" => Err(cur.error("expected a function")),
            other => Err(cur.error(&format!("unknown function `{other}`"))),
        }
    }

    /// Comma-separated literals up to `close` (or the end of input when
    /// `close` is empty).
    fn values_until(&self, cur: &mut Cursor<'_>, close: &str) -> Result<Vec<GroupElement>> {
        let mut out = Vec::new();
        loop {
            cur.skip_ws();
            if !close.is_empty() && cur.rest().starts_with(close) && out.is_empty() {
                return Err(cur.error("empty value list"));
            }
            out.push(self.group.parse_element(cur.literal()?)?);
            if !cur.eat(",") {
                return Ok(out);
            }
        }
    }

    fn read_table_file(&self, path: &str, depth: usize) -> Result<Vec<GroupElement>> {
        let full = match &self.base {
            Some(b) => b.join(path),
            None => PathBuf::from(path),
        };
        let text = std::fs::read_to_string(&full)
            .map_err(|e| Error::Parse(format!("cannot read table {}: {e}", full.display())))?;
        parse_table_csv(self.group, &text, depth)
    }
}

/// Table CSV: one line per x-cylinder; blank lines and `#` comments skipped.
pub fn parse_table_csv(group: &GroupSpec, text: &str, depth: usize) -> Result<Vec<GroupElement>> {
    let side = 1usize << depth;
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if rows.len() != side {
        return Err(Error::Parse(format!(
            "table of depth {depth} needs {side} rows, found {}",
            rows.len()
        )));
    }
    let mut out = Vec::with_capacity(side * side);
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != side {
            return Err(Error::Parse(format!(
                "table row {i} has {} cells, expected {side}",
                cells.len()
            )));
        }
        for c in cells {
            out.push(group.parse_element(c)?);
        }
    }
    Ok(out)
}

/// `r_n ∘ f` for the quantizer of level `n` built on the declared image of `f`.
pub fn quantize(f: &SepFunction, n: usize) -> Result<SepFunction> {
    let group = f.group();
    let covers = build_covers(group, f.declared_image(), n)?;
    let nets = net_tower(group, n.saturating_sub(1) as u32, n + 4)?;
    let qs = build_quantizers(group, &covers, &nets)?;
    SepFunction::post_compose(f, qs[n].map.clone())
}

pub fn parse_function(group: &GroupSpec, text: &str, base: Option<&Path>) -> Result<SepFunction> {
    FunctionParser::new(group, base).parse(text)
}
