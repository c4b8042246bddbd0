//! Line-oriented instance files.
//!
//! ```text
//! minknap 1
//! # comment
//! threshold 3/2
//! item x1 cost 1 profit 1
//! ```
//!
//! Rationals are written in lowest terms; `#` starts a comment anywhere on
//! a line.

use std::collections::HashSet;
use std::fmt::Write;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::rational::parse_rational;
use crate::model::{Rational, RawInstance};

pub const HEADER: &str = "minknap 1";

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits on whitespace, keeping one-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn rational_at(line: usize, (col, text): (usize, &str)) -> Result<Rational> {
    parse_rational(text).map_err(|(off, msg)| parse_error(line, col + off, msg))
}

pub fn parse_instance(text: &str) -> Result<RawInstance> {
    let mut header_seen = false;
    let mut threshold: Option<Rational> = None;
    let mut items = Vec::new();
    let mut labels = HashSet::new();
    let mut last_line = 0;
    for (k, raw_line) in text.lines().enumerate() {
        let lineno = k + 1;
        last_line = lineno;
        let line = raw_line.split('#').next().unwrap_or("");
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        if !header_seen {
            if toks.len() != 2 || toks[0].1 != "minknap" {
                return Err(parse_error(
                    lineno,
                    toks[0].0,
                    format!("expected header `{HEADER}`"),
                ));
            }
            if toks[1].1 != "1" {
                return Err(parse_error(
                    lineno,
                    toks[1].0,
                    format!("unsupported format version {}", toks[1].1),
                ));
            }
            header_seen = true;
            continue;
        }
        match toks[0].1 {
            "threshold" => {
                if toks.len() != 2 {
                    let col = toks.get(2).map_or(line.len() + 1, |t| t.0);
                    return Err(parse_error(lineno, col, "expected `threshold <rational>`"));
                }
                if threshold.is_some() {
                    return Err(parse_error(lineno, toks[0].0, "threshold given twice"));
                }
                threshold = Some(rational_at(lineno, toks[1])?);
            }
            "item" => {
                if toks.len() != 6 || toks[2].1 != "cost" || toks[4].1 != "profit" {
                    let col = if toks.len() > 2 && toks[2].1 != "cost" {
                        toks[2].0
                    } else if toks.len() > 4 && toks[4].1 != "profit" {
                        toks[4].0
                    } else {
                        toks.get(6).map_or(line.len() + 1, |t| t.0)
                    };
                    return Err(parse_error(
                        lineno,
                        col,
                        "expected `item <label> cost <rational> profit <rational>`",
                    ));
                }
                let label = toks[1].1.to_string();
                if !labels.insert(label.clone()) {
                    return Err(parse_error(
                        lineno,
                        toks[1].0,
                        format!("duplicate label {label}"),
                    ));
                }
                let cost = rational_at(lineno, toks[3])?;
                let profit = rational_at(lineno, toks[5])?;
                items.push((label, cost, profit));
            }
            other => {
                return Err(parse_error(
                    lineno,
                    toks[0].0,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }
    if !header_seen {
        return Err(parse_error(1, 1, format!("missing header `{HEADER}`")));
    }
    let threshold =
        threshold.ok_or_else(|| parse_error(last_line.max(1), 1, "missing threshold line"))?;
    let mut raw = RawInstance::new(threshold);
    for (label, cost, profit) in items {
        raw.push(label, cost, profit);
    }
    Ok(raw)
}

/// Writes the instance; labels must be nonempty and free of whitespace and
/// `#`.
pub fn serialize_instance(raw: &RawInstance) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "threshold {}", raw.threshold).unwrap();
    for item in &raw.items {
        if item.label.is_empty() || item.label.contains(|c: char| c.is_whitespace() || c == '#') {
            return Err(Error::MalformedModel(format!(
                "label {:?} cannot be written to an instance file",
                item.label
            )));
        }
        writeln!(
            out,
            "item {} cost {} profit {}",
            item.label, item.cost, item.profit
        )
        .unwrap();
    }
    Ok(out)
}

/// Parses `"a/b,c/d,..."` into rationals, reporting one-based columns.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    let mut col = 1;
    for part in text.split(',') {
        let trimmed = part.trim_start();
        let lead = part.len() - trimmed.len();
        let value = parse_rational(trimmed.trim_end())
            .map_err(|(off, msg)| parse_error(1, col + lead + off, msg))?;
        out.push(value);
        col += part.len() + 1;
    }
    Ok(out)
}

/// Parses `"w1,...,wn >= beta"`.
pub fn parse_inequality_spec(text: &str) -> Result<(Vec<Rational>, Rational)> {
    let Some(at) = text.find(">=") else {
        return Err(parse_error(1, text.len() + 1, "expected `>=`"));
    };
    let coeffs = parse_rational_list(text[..at].trim_end())?;
    let rest = &text[at + 2..];
    let trimmed = rest.trim_start();
    let col = at + 3 + (rest.len() - trimmed.len());
    let rhs =
        parse_rational(trimmed.trim_end()).map_err(|(off, msg)| parse_error(1, col + off, msg))?;
    if rhs.is_zero() {
        return Err(parse_error(1, col, "right-hand side must be positive"));
    }
    Ok((coeffs, rhs))
}
