//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 2
//! phase 0.0000000000000000e0
//! rx q0, 5.0000000000000000e-1
//! ry q1, param3
//! cnot q0, q1
//! ```
//!
//! `#` starts a comment. The two header lines come first (comments and blank
//! lines may precede them). Angles are printed with 17 significant digits so
//! that parsing a serialized circuit reproduces it exactly.

use std::fmt::Write;

use super::{Circuit, Gate, GateKind, Param};
use crate::error::{Error, Result};

pub fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "qubits {}", c.n_qubits()).unwrap();
    writeln!(out, "phase {:.16e}", c.global_phase()).unwrap();
    for g in c.gates() {
        out.push_str(g.kind().name());
        for (i, q) in g.qubits().iter().enumerate() {
            out.push_str(if i == 0 { " " } else { ", " });
            write!(out, "q{q}").unwrap();
        }
        match g.param() {
            Some(Param::Value(v)) => write!(out, ", {v:.16e}").unwrap(),
            Some(Param::Tag(t)) => write!(out, ", param{t}").unwrap(),
            None => {}
        }
        out.push('\n');
    }
    out
}

/// A token with its 1-based column.
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn trimmed(raw: &str, start: usize) -> Tok<'_> {
    let lead = raw.len() - raw.trim_start().len();
    Tok {
        text: raw.trim(),
        col: start + lead + 1,
    }
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.trim().is_empty());

    let (ln, line) = lines
        .next()
        .ok_or_else(|| Error::syntax(1, 1, "missing `qubits <n>` header"))?;
    let n_qubits = header_value(ln, line, "qubits")?
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::syntax(ln, 8, "qubit count must be a positive integer"))?;

    let (ln, line) = lines
        .next()
        .ok_or_else(|| Error::syntax(ln + 1, 1, "missing `phase <float>` header"))?;
    let phase_text = header_value(ln, line, "phase")?;
    let phase = parse_float(phase_text)
        .ok_or_else(|| Error::syntax(ln, 7, format!("malformed phase `{phase_text}`")))?;

    let mut c = Circuit::new(n_qubits)?;
    c.set_phase(phase)
        .map_err(|e| Error::syntax(ln, 7, e.to_string()))?;

    for (ln, line) in lines {
        let gate = parse_gate(ln, line, n_qubits)?;
        c.push(gate).map_err(|e| Error::syntax(ln, 1, e.to_string()))?;
    }
    Ok(c)
}

fn header_value<'a>(ln: usize, line: &'a str, key: &str) -> Result<&'a str> {
    let t = line.trim();
    let rest = t
        .strip_prefix(key)
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| Error::syntax(ln, 1, format!("expected `{key} <value>` header")))?;
    Ok(rest.trim())
}

fn parse_float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_gate(ln: usize, line: &str, n_qubits: usize) -> Result<Gate> {
    let lead = line.len() - line.trim_start().len();
    let body = line.trim_start();
    let name_end = body.find(char::is_whitespace).unwrap_or(body.len());
    let name = &body[..name_end];
    let kind = GateKind::from_name(name)
        .ok_or_else(|| Error::syntax(ln, lead + 1, format!("unknown gate `{name}`")))?;

    let args_start = lead + name_end;
    let args = &line[args_start..];
    let mut toks = Vec::new();
    let mut offset = args_start;
    for piece in args.split(',') {
        toks.push(trimmed(piece, offset));
        offset += piece.len() + 1;
    }
    if toks.len() == 1 && toks[0].text.is_empty() {
        toks.clear();
    }

    let want = kind.arity() + usize::from(kind.is_rotation());
    if toks.len() != want {
        let col = toks.last().map_or(args_start + 1, |t| t.col);
        return Err(Error::syntax(
            ln,
            col,
            format!("`{name}` expects {want} operand(s), found {}", toks.len()),
        ));
    }

    let mut qubits = Vec::with_capacity(2);
    for tok in &toks[..kind.arity()] {
        let idx = tok
            .text
            .strip_prefix('q')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| Error::syntax(ln, tok.col, format!("malformed qubit `{}`", tok.text)))?;
        if idx >= n_qubits {
            return Err(Error::syntax(
                ln,
                tok.col,
                format!("qubit q{idx} out of range for {n_qubits}-qubit circuit"),
            ));
        }
        qubits.push(idx);
    }

    let param = if kind.is_rotation() {
        let tok = &toks[kind.arity()];
        if let Some(slot) = tok.text.strip_prefix("param") {
            let t = slot.parse::<usize>().map_err(|_| {
                Error::syntax(ln, tok.col, format!("malformed parameter slot `{}`", tok.text))
            })?;
            Some(Param::Tag(t))
        } else {
            let v = parse_float(tok.text).ok_or_else(|| {
                Error::syntax(ln, tok.col, format!("malformed angle `{}`", tok.text))
            })?;
            Some(Param::Value(v))
        }
    } else {
        None
    };

    Gate::new(kind, &qubits, param).map_err(|e| Error::syntax(ln, lead + 1, e.to_string()))
}
