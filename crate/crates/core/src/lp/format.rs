//! CPLEX-style LP text and free MPS export.
//!
//! Model metadata (name, parameters, elements) travels in `\` comment lines
//! so that a parsed file carries everything needed to interpret a witness.
//! Output is canonical: terms and bounds are sorted by variable name and
//! numbers use the shortest round-tripping decimal form.

use std::fmt::Write as _;

use super::{Constraint, Direction, Element, LpModel, Sense};
use crate::error::{Error, Result};

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn write_terms(out: &mut String, model: &LpModel, terms: &[(usize, f64)]) {
    let mut sorted: Vec<(&str, f64)> = terms.iter().map(|&(j, c)| (model.vars[j].name.as_str(), c)).collect();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    for (k, (name, c)) in sorted.into_iter().enumerate() {
        let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
        match (k, sign) {
            (0, "+") => {}
            (0, _) => out.push('-'),
            _ => {
                out.push(' ');
                out.push_str(sign);
                out.push(' ');
            }
        }
        if mag != 1.0 {
            out.push_str(&num(mag));
            out.push(' ');
        }
        out.push_str(name);
    }
}

fn row_name(c: &Constraint, i: usize) -> String {
    if c.name.is_empty() {
        format!("c{}", i + 1)
    } else {
        c.name.clone()
    }
}

pub fn export_lp(model: &LpModel) -> String {
    let mut out = String::new();
    if !model.name.is_empty() {
        let _ = writeln!(out, "\\ model {}", model.name);
    }
    for (k, v) in &model.params {
        let _ = writeln!(out, "\\ param {k} = {}", num(*v));
    }
    for e in &model.elements {
        let _ = writeln!(out, "\\ element {} {}", e.name, if e.multiset { "multiset" } else { "point" });
    }
    out.push_str(match model.direction {
        Direction::Maximize => "Maximize\n",
        Direction::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    if !model.objective.is_empty() {
        out.push(' ');
        write_terms(&mut out, model, &model.objective);
    }
    out.push('\n');
    if !model.constraints.is_empty() {
        out.push_str("Subject To\n");
        for (i, c) in model.constraints.iter().enumerate() {
            let _ = write!(out, " {}: ", row_name(c, i));
            if c.terms.is_empty() {
                out.push('0');
            } else {
                write_terms(&mut out, model, &c.terms);
            }
            let _ = writeln!(out, " {} {}", c.sense.symbol(), num(c.rhs));
        }
    }
    let mut used = vec![false; model.vars.len()];
    for &(j, _) in model.objective.iter().chain(model.constraints.iter().flat_map(|c| c.terms.iter())) {
        used[j] = true;
    }
    let mut order: Vec<usize> = (0..model.vars.len()).collect();
    order.sort_by(|&a, &b| model.vars[a].name.cmp(&model.vars[b].name));
    let mut bounds = Vec::new();
    for j in order {
        let v = &model.vars[j];
        let line = match (v.lower, v.upper) {
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => format!(" {} free", v.name),
            (l, u) if l == 0.0 && u == f64::INFINITY => {
                if used[j] {
                    continue;
                }
                format!(" {} >= 0", v.name)
            }
            (l, u) if u == f64::INFINITY => format!(" {} >= {}", v.name, num(l)),
            (l, u) if l == 0.0 => format!(" {} <= {}", v.name, num(u)),
            (l, u) => format!(" {} <= {} <= {}", num(l), v.name, num(u)),
        };
        bounds.push(line);
    }
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        for b in bounds {
            out.push_str(&b);
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

struct Parser {
    model: LpModel,
    line: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::LpParse { line: self.line, msg: msg.into() }
    }

    fn var(&mut self, name: &str) -> Result<usize> {
        if !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
            return Err(self.err(format!("bad variable name `{name}`")));
        }
        Ok(match self.model.var_index(name) {
            Some(j) => j,
            None => self.model.add_var(name, 0.0, f64::INFINITY),
        })
    }

    fn number(&self, tok: &str) -> Result<f64> {
        tok.parse::<f64>().map_err(|_| self.err(format!("bad number `{tok}`")))
    }

    fn expr(&mut self, text: &str) -> Result<Vec<(usize, f64)>> {
        let mut acc: Vec<(usize, f64)> = Vec::new();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        let mut expect_term = true;
        for tok in text.split_whitespace() {
            match tok {
                "+" | "-" => {
                    if coef.is_some() {
                        return Err(self.err("sign after coefficient"));
                    }
                    if tok == "-" {
                        sign = -sign;
                    }
                    expect_term = true;
                }
                _ if tok.parse::<f64>().is_ok() => {
                    if coef.is_some() {
                        return Err(self.err("two coefficients in a row"));
                    }
                    coef = Some(self.number(tok)?);
                }
                _ => {
                    if !expect_term {
                        return Err(self.err(format!("missing operator before `{tok}`")));
                    }
                    let (s, name) = match tok.strip_prefix('-') {
                        Some(rest) => (-1.0, rest),
                        None => (1.0, tok),
                    };
                    let j = self.var(name)?;
                    let c = s * sign * coef.take().unwrap_or(1.0);
                    match acc.iter_mut().find(|t| t.0 == j) {
                        Some(t) => t.1 += c,
                        None => acc.push((j, c)),
                    }
                    sign = 1.0;
                    expect_term = false;
                }
            }
        }
        if let Some(c) = coef {
            if c != 0.0 || !acc.is_empty() {
                return Err(self.err("dangling coefficient"));
            }
        }
        acc.retain(|t| t.1 != 0.0);
        acc.sort_by_key(|t| t.0);
        Ok(acc)
    }
}

#[derive(PartialEq)]
enum Section {
    Header,
    Objective,
    Constraints,
    Bounds,
    Done,
}

/// Parses text produced by [`export_lp`] (and the same single-line subset
/// of the format written by hand).
pub fn parse_lp(text: &str) -> Result<LpModel> {
    let mut p = Parser { model: LpModel::new("", Direction::Maximize), line: 0 };
    let mut section = Section::Header;
    let mut seen_objective = false;
    for (i, raw) in text.lines().enumerate() {
        p.line = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('\\') {
            let c = c.trim();
            if let Some(name) = c.strip_prefix("model ") {
                p.model.name = name.trim().to_string();
            } else if let Some(kv) = c.strip_prefix("param ") {
                let (k, v) = kv.split_once('=').ok_or_else(|| p.err("param without `=`"))?;
                let v = p.number(v.trim())?;
                p.model.params.push((k.trim().to_string(), v));
            } else if let Some(el) = c.strip_prefix("element ") {
                let mut it = el.split_whitespace();
                let (Some(name), Some(kind), None) = (it.next(), it.next(), it.next()) else {
                    return Err(p.err("element needs a name and a kind"));
                };
                let multiset = match kind {
                    "point" => false,
                    "multiset" => true,
                    _ => return Err(p.err(format!("unknown element kind `{kind}`"))),
                };
                p.model.elements.push(Element { name: name.to_string(), multiset });
            }
            continue;
        }
        let lower = line.to_ascii_lowercase();
        match lower.as_str() {
            "maximize" | "maximise" | "max" => {
                p.model.direction = Direction::Maximize;
                section = Section::Objective;
                continue;
            }
            "minimize" | "minimise" | "min" => {
                p.model.direction = Direction::Minimize;
                section = Section::Objective;
                continue;
            }
            "subject to" | "such that" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "end" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Header => return Err(p.err("expected Maximize or Minimize")),
            Section::Done => return Err(p.err("content after End")),
            Section::Objective => {
                if seen_objective {
                    return Err(p.err("objective spans several lines"));
                }
                let body = line.split_once(':').map_or(line, |(_, b)| b);
                p.model.objective = p.expr(body)?;
                seen_objective = true;
            }
            Section::Constraints => {
                let (name, body) = line.split_once(':').ok_or_else(|| p.err("constraint without a name"))?;
                let (sense, split) = [("<=", Sense::Le), (">=", Sense::Ge), ("=<", Sense::Le), ("=>", Sense::Ge), ("=", Sense::Eq)]
                    .iter()
                    .find_map(|&(op, s)| body.find(op).map(|k| (s, (k, op.len()))))
                    .ok_or_else(|| p.err("constraint without a comparison"))?;
                let lhs = &body[..split.0];
                let rhs = p.number(body[split.0 + split.1..].trim())?;
                let terms = p.expr(lhs)?;
                p.model.constraints.push(Constraint { name: name.trim().to_string(), terms, sense, rhs });
            }
            Section::Bounds => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match toks.as_slice() {
                    [v, f] if f.eq_ignore_ascii_case("free") => {
                        let j = p.var(v)?;
                        p.model.vars[j].lower = f64::NEG_INFINITY;
                        p.model.vars[j].upper = f64::INFINITY;
                    }
                    [v, ">=", x] => {
                        let x = p.number(x)?;
                        let j = p.var(v)?;
                        p.model.vars[j].lower = x;
                    }
                    [v, "<=", x] => {
                        let x = p.number(x)?;
                        let j = p.var(v)?;
                        p.model.vars[j].upper = x;
                    }
                    [l, "<=", v, "<=", u] => {
                        let (l, u) = (p.number(l)?, p.number(u)?);
                        let j = p.var(v)?;
                        p.model.vars[j].lower = l;
                        p.model.vars[j].upper = u;
                    }
                    _ => return Err(p.err(format!("unrecognized bound `{line}`"))),
                }
            }
        }
    }
    if section != Section::Done {
        return Err(p.err("missing End"));
    }
    Ok(p.model)
}

/// Free-format MPS. The optimization direction is not part of classic MPS;
/// readers must be told it separately.
pub fn export_mps(model: &LpModel) -> String {
    let mut out = String::new();
    let name = if model.name.is_empty() { "model" } else { model.name.as_str() };
    let _ = writeln!(out, "NAME {name}");
    out.push_str("ROWS\n N obj\n");
    let rows: Vec<String> = model.constraints.iter().enumerate().map(|(i, c)| row_name(c, i)).collect();
    for (c, r) in model.constraints.iter().zip(&rows) {
        let t = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {t} {r}");
    }
    let mut cols: Vec<Vec<(&str, f64)>> = vec![Vec::new(); model.vars.len()];
    for &(j, c) in &model.objective {
        cols[j].push(("obj", c));
    }
    for (c, r) in model.constraints.iter().zip(&rows) {
        for &(j, a) in &c.terms {
            cols[j].push((r.as_str(), a));
        }
    }
    out.push_str("COLUMNS\n");
    for (v, entries) in model.vars.iter().zip(&cols) {
        if entries.is_empty() {
            let _ = writeln!(out, " {} obj 0", v.name);
        }
        for (r, a) in entries {
            let _ = writeln!(out, " {} {r} {}", v.name, num(*a));
        }
    }
    out.push_str("RHS\n");
    for (c, r) in model.constraints.iter().zip(&rows) {
        if c.rhs != 0.0 {
            let _ = writeln!(out, " RHS {r} {}", num(c.rhs));
        }
    }
    let mut bounds = String::new();
    for v in &model.vars {
        if v.is_free() {
            let _ = writeln!(bounds, " FR BND {}", v.name);
            continue;
        }
        if v.lower != 0.0 {
            let _ = writeln!(bounds, " LO BND {} {}", v.name, num(v.lower));
        }
        if v.upper != f64::INFINITY {
            let _ = writeln!(bounds, " UP BND {} {}", v.name, num(v.upper));
        }
    }
    if !bounds.is_empty() {
        out.push_str("BOUNDS\n");
        out.push_str(&bounds);
    }
    out.push_str("ENDATA\n");
    out
}
