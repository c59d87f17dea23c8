//! Plain-text model files.
//!
//! ```text
//! # comments start with '#'
//! [alphabets]
//! S  = 0 1
//! Se = * 0 1
//! Sd = 0 1          # optional, defaults to a singleton
//! Ae = 0 1          # `A` is accepted as an alias
//! Ad = -            # optional, defaults to a singleton
//! X  = 0 1
//! Y  = 0 1
//!
//! [state]           # P(s) in S order
//! 0.5 0.5
//!
//! [channel]         # one line per (x, s), x outer; each line is P(y | x, s)
//! ...
//!
//! [probe]           # one line per (s, ae, ad), s outer; each line is
//! ...               # P(se, sd | s, ae, ad) with se outer
//!
//! [cost]            # |Ae|·|Ad| values, ae outer
//! 0 1
//!
//! [budget]
//! 1
//!
//! [input_constraint]  # optional: E[w(X)] <= bound
//! weights = 0 1
//! bound = 0.25
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{CostTable, InputConstraint, ProbingModel};
use crate::error::{Error, Result};
use crate::prob::Alphabet;
use crate::{CondKernel, ProbDist};

const ROW_TOL: f64 = 1e-9;
const SECTIONS: [&str; 7] = [
    "alphabets",
    "state",
    "channel",
    "probe",
    "cost",
    "budget",
    "input_constraint",
];

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(b, t)| (line[..b].chars().count() + 1, t))
        .collect()
}

struct Line<'a> {
    no: usize,
    toks: Vec<(usize, &'a str)>,
}

fn numbers(line: &Line<'_>, toks: &[(usize, &str)]) -> Result<Vec<f64>> {
    toks.iter()
        .map(|&(col, t)| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line.no, col, format!("expected a number, found `{t}`")))
        })
        .collect()
}

struct Doc<'a> {
    sections: BTreeMap<&'static str, (usize, Vec<Line<'a>>)>,
    last_line: usize,
}

impl<'a> Doc<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let mut sections: BTreeMap<&'static str, (usize, Vec<Line<'a>>)> = BTreeMap::new();
        let mut current: Option<&'static str> = None;
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let no = i + 1;
            last_line = no;
            let body = raw.split('#').next().unwrap_or("");
            let toks = tokens(body);
            let Some(&(col, first)) = toks.first() else {
                continue;
            };
            if let Some(name) = first.strip_prefix('[') {
                let name = name.strip_suffix(']').filter(|_| toks.len() == 1).ok_or_else(|| {
                    parse_err(no, col, "malformed section header")
                })?;
                let known = SECTIONS
                    .iter()
                    .find(|s| **s == name)
                    .ok_or_else(|| parse_err(no, col + 1, format!("unknown section `{name}`")))?;
                if sections.contains_key(known) {
                    return Err(parse_err(no, col + 1, format!("duplicate section `{name}`")));
                }
                sections.insert(known, (no, Vec::new()));
                current = Some(known);
                continue;
            }
            let sec = current.ok_or_else(|| parse_err(no, col, "content before any section"))?;
            sections.get_mut(sec).expect("section exists").1.push(Line { no, toks });
        }
        Ok(Doc {
            sections,
            last_line,
        })
    }

    fn section(&self, name: &str) -> Result<&(usize, Vec<Line<'a>>)> {
        self.sections
            .get(name)
            .ok_or_else(|| parse_err(self.last_line + 1, 1, format!("missing section [{name}]")))
    }

    /// All numbers of a section, concatenated.
    fn flat(&self, name: &str, expected: usize) -> Result<Vec<f64>> {
        let (header, lines) = self.section(name)?;
        let mut out = Vec::new();
        for line in lines {
            out.extend(numbers(line, &line.toks)?);
        }
        if out.len() != expected {
            let at = lines.last().map_or(*header, |l| l.no);
            return Err(parse_err(
                at,
                1,
                format!("[{name}] has {} values, expected {expected}", out.len()),
            ));
        }
        Ok(out)
    }

    /// One probability row per line, each checked to sum to one.
    fn rows(&self, name: &str, count: usize, width: usize) -> Result<Vec<Vec<f64>>> {
        let (header, lines) = self.section(name)?;
        if lines.len() != count {
            let at = lines.last().map_or(*header, |l| l.no);
            return Err(parse_err(
                at,
                1,
                format!("[{name}] has {} rows, expected {count}", lines.len()),
            ));
        }
        lines
            .iter()
            .map(|line| {
                let mut row = numbers(line, &line.toks)?;
                if row.len() != width {
                    let col = line.toks.get(width).map_or(1, |t| t.0);
                    return Err(parse_err(
                        line.no,
                        col,
                        format!("row has {} entries, expected {width}", row.len()),
                    ));
                }
                if let Some(pos) = row.iter().position(|&p| p < 0.0) {
                    return Err(parse_err(line.no, line.toks[pos].0, "negative probability"));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_TOL {
                    return Err(parse_err(
                        line.no,
                        line.toks[0].0,
                        format!("row sums to {sum}, off by more than {ROW_TOL}"),
                    ));
                }
                row.iter_mut().for_each(|p| *p /= sum);
                Ok(row)
            })
            .collect()
    }
}

fn parse_alphabets(doc: &Doc<'_>) -> Result<BTreeMap<String, Alphabet>> {
    let (_, lines) = doc.section("alphabets")?;
    let mut out = BTreeMap::new();
    for line in lines {
        let (col, name) = line.toks[0];
        if line.toks.get(1).map(|t| t.1) != Some("=") || line.toks.len() < 3 {
            return Err(parse_err(line.no, col, "expected `Name = symbol ...`"));
        }
        let canonical = match name {
            "A" => "Ae",
            "S" | "Se" | "Sd" | "Ae" | "Ad" | "X" | "Y" => name,
            _ => return Err(parse_err(line.no, col, format!("unknown alphabet `{name}`"))),
        };
        if out.contains_key(canonical) {
            return Err(parse_err(line.no, col, format!("alphabet `{canonical}` given twice")));
        }
        let symbols: Vec<&str> = line.toks[2..].iter().map(|t| t.1).collect();
        let alphabet = Alphabet::new(canonical, symbols)
            .map_err(|e| parse_err(line.no, line.toks[2].0, e.to_string()))?;
        out.insert(canonical.to_string(), alphabet);
    }
    Ok(out)
}

fn parse_constraint(doc: &Doc<'_>, nx: usize) -> Result<Option<InputConstraint>> {
    let Some((header, lines)) = doc.sections.get("input_constraint") else {
        return Ok(None);
    };
    let mut weights = None;
    let mut bound = None;
    for line in lines {
        let (col, key) = line.toks[0];
        if line.toks.get(1).map(|t| t.1) != Some("=") {
            return Err(parse_err(line.no, col, "expected `key = value`"));
        }
        let values = numbers(line, &line.toks[2..])?;
        match key {
            "weights" if values.len() == nx => weights = Some(values),
            "weights" => {
                return Err(parse_err(line.no, col, format!("expected {nx} weights")));
            }
            "bound" if values.len() == 1 => bound = Some(values[0]),
            "bound" => return Err(parse_err(line.no, col, "expected one bound")),
            _ => return Err(parse_err(line.no, col, format!("unknown key `{key}`"))),
        }
    }
    match (weights, bound) {
        (Some(weights), Some(bound)) => Ok(Some(InputConstraint { weights, bound })),
        _ => Err(parse_err(*header, 1, "input_constraint needs `weights` and `bound`")),
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<ProbingModel> {
    let doc = Doc::parse(text)?;
    let mut alphabets = parse_alphabets(&doc)?;
    let mut take = |name: &str, optional: bool| -> Result<Alphabet> {
        match alphabets.remove(name) {
            Some(a) => Ok(a),
            None if optional => Ok(Alphabet::singleton(name)),
            None => Err(parse_err(
                doc.section("alphabets")?.0,
                1,
                format!("alphabet `{name}` is required"),
            )),
        }
    };
    let s = take("S", false)?;
    let se = take("Se", false)?;
    let sd = take("Sd", true)?;
    let ae = take("Ae", false)?;
    let ad = take("Ad", true)?;
    let x = take("X", false)?;
    let y = take("Y", false)?;

    let state_rows = doc.rows("state", 1, s.size())?;
    let state = ProbDist::new(s.clone(), state_rows.concat())?;
    let channel = CondKernel::new(
        vec![x.clone(), s.clone()],
        y.clone(),
        doc.rows("channel", x.size() * s.size(), y.size())?,
    )?;
    let probe = CondKernel::new(
        vec![s.clone(), ae.clone(), ad.clone()],
        Alphabet::product("SeSd", &[&se, &sd]),
        doc.rows("probe", s.size() * ae.size() * ad.size(), se.size() * sd.size())?,
    )?;
    let cost_values = doc.flat("cost", ae.size() * ad.size())?;
    let cost = CostTable::new(ae.size(), ad.size(), cost_values).map_err(|e| {
        parse_err(doc.section("cost").map_or(0, |s| s.0), 1, e.to_string())
    })?;
    let budget = doc.flat("budget", 1)?[0];
    let input_constraint = parse_constraint(&doc, x.size())?;

    let model = ProbingModel {
        s,
        se,
        sd,
        ae,
        ad,
        x,
        y,
        state,
        channel,
        probe,
        cost,
        budget,
        input_constraint,
    };
    model.validate()?;
    Ok(model)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ProbingModel> {
    parse_model(&std::fs::read_to_string(path)?)
}

fn write_row(out: &mut String, row: &[f64]) {
    let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
}

/// Serializes a model in the format read by [`parse_model`].
pub fn write_model(m: &ProbingModel) -> String {
    let mut out = String::from("[alphabets]\n");
    for (name, a) in [
        ("S", &m.s),
        ("Se", &m.se),
        ("Sd", &m.sd),
        ("Ae", &m.ae),
        ("Ad", &m.ad),
        ("X", &m.x),
        ("Y", &m.y),
    ] {
        let _ = writeln!(out, "{name} = {}", a.symbols().join(" "));
    }
    out.push_str("\n[state]\n");
    write_row(&mut out, m.state.mass());
    out.push_str("\n[channel]\n");
    m.channel.rows().iter().for_each(|r| write_row(&mut out, r));
    out.push_str("\n[probe]\n");
    m.probe.rows().iter().for_each(|r| write_row(&mut out, r));
    out.push_str("\n[cost]\n");
    m.cost
        .values()
        .chunks(m.ad.size())
        .for_each(|r| write_row(&mut out, r));
    let _ = write!(out, "\n[budget]\n{}\n", m.budget);
    if let Some(c) = &m.input_constraint {
        out.push_str("\n[input_constraint]\nweights = ");
        write_row(&mut out, &c.weights);
        let _ = writeln!(out, "bound = {}", c.bound);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_example2, build_example3};

    #[test]
    fn round_trip() {
        for m in [build_example2().unwrap(), build_example3().unwrap()] {
            let text = write_model(&m);
            let back = parse_model(&text).unwrap();
            assert_eq!(back.channel.rows(), m.channel.rows());
            assert_eq!(back.probe.rows(), m.probe.rows());
            assert_eq!(back.cost, m.cost);
            assert_eq!(back.input_constraint, m.input_constraint);
            assert_eq!(back.se.symbols(), m.se.symbols());
        }
    }

    #[test]
    fn off_sum_row_reports_position() {
        let m = build_example3().unwrap();
        let text = write_model(&m).replacen("\n[channel]\n1 0", "\n[channel]\n  0.9 0", 1);
        let line = text.lines().position(|l| l == "  0.9 0").unwrap() + 1;
        match parse_model(&text) {
            Err(Error::Parse { line: l, column, .. }) => {
                assert_eq!((l, column), (line, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn small_rounding_is_accepted() {
        let m = build_example3().unwrap();
        let text = write_model(&m).replace("\n[state]\n0.5 0.5", "\n[state]\n0.5 0.5000000001");
        let back = parse_model(&text).unwrap();
        assert_eq!(back.state.mass().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn bad_tokens() {
        let m = build_example3().unwrap();
        let text = write_model(&m).replace("[budget]\n1", "[budget]\nlots");
        assert!(matches!(parse_model(&text), Err(Error::Parse { column: 1, .. })));
        assert!(matches!(
            parse_model("[nonsense]\n"),
            Err(Error::Parse { line: 1, column: 2, .. })
        ));
        assert!(matches!(parse_model("0.5\n"), Err(Error::Parse { line: 1, .. })));
    }
}
