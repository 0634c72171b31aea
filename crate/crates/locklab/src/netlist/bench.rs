//! BENCH text format.
//!
//! ```text
//! # comment
//! INPUT(a)
//! INPUT(keyinput0)
//! OUTPUT(f)
//! n1 = AND(a, keyinput0)
//! f = NOT(n1)
//! ```
//!
//! Keywords and gate kinds are case-insensitive on input; the writer emits
//! uppercase. `BUFF` is accepted as an alias for `BUF`. Constants are
//! spelled `CONST0()` / `CONST1()`. Inputs whose name starts with the key
//! prefix (default `keyinput`) are key inputs.

use std::fmt::Write as _;

use thiserror::Error;

use super::{GateKind, Netlist, NetlistBuilder, NetlistError};

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Input names with this prefix are treated as key inputs.
    pub key_prefix: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { key_prefix: super::KEY_PREFIX.to_string() }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BenchParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: unknown gate kind {kind:?}")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: {source}")]
    Structure {
        line: usize,
        #[source]
        source: NetlistError,
    },
    #[error("{0}")]
    Netlist(#[from] NetlistError),
}

pub fn parse_bench(text: &str) -> Result<Netlist, BenchParseError> {
    parse_bench_with(text, &ParseOptions::default())
}

pub fn parse_bench_with(text: &str, opts: &ParseOptions) -> Result<Netlist, BenchParseError> {
    let mut b = NetlistBuilder::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let stmt = parse_line(content, line)?;
        match stmt {
            Stmt::Input(name) => {
                let res = if let Some(rest) = name.strip_prefix(opts.key_prefix.as_str()) {
                    let suffix = if !rest.is_empty() && rest.bytes().all(|c| c.is_ascii_digit()) {
                        rest.parse::<u64>().ok()
                    } else {
                        None
                    };
                    b.add_key_input(&name, suffix).map(|_| ())
                } else {
                    b.add_input(&name).map(|_| ())
                };
                res.map_err(|source| BenchParseError::Structure { line, source })?;
            }
            Stmt::Output(name) => {
                b.add_output(&name).map_err(|source| BenchParseError::Structure { line, source })?;
            }
            Stmt::Gate { output, kind, fanins } => {
                let kind = lookup_kind(&kind).ok_or(BenchParseError::UnknownKind { line, kind })?;
                let ids: Vec<_> = fanins.iter().map(|f| b.net(f)).collect();
                b.add_gate(&output, kind, &ids)
                    .map_err(|source| BenchParseError::Structure { line, source })?;
            }
        }
    }
    Ok(b.build()?)
}

enum Stmt {
    Input(String),
    Output(String),
    Gate { output: String, kind: String, fanins: Vec<String> },
}

// Grammar per line: `INPUT(name)`, `OUTPUT(name)`, or `name = KIND(args)`.
fn parse_line(content: &str, line: usize) -> Result<Stmt, BenchParseError> {
    let err = |col: usize, msg: &str| BenchParseError::Syntax { line, col, msg: msg.to_string() };

    if let Some(eq) = content.find('=') {
        let output = content[..eq].trim();
        if output.is_empty() {
            return Err(err(1, "missing net name before '='"));
        }
        check_name(output, line, 1)?;
        let rhs = content[eq + 1..].trim();
        let open = rhs
            .find('(')
            .ok_or_else(|| err(eq + 2, "expected KIND(fanin, ...) after '='"))?;
        let kind = rhs[..open].trim().to_string();
        if kind.is_empty() {
            return Err(err(eq + 2, "missing gate kind after '='"));
        }
        let close = rhs.rfind(')').ok_or_else(|| err(content.len(), "missing ')'"))?;
        if close < open || !rhs[close + 1..].trim().is_empty() {
            return Err(err(content.len(), "trailing text after ')'"));
        }
        let args = rhs[open + 1..close].trim();
        let fanins = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| {
                    let a = a.trim();
                    check_name(a, line, eq + 2)?;
                    Ok(a.to_string())
                })
                .collect::<Result<Vec<String>, BenchParseError>>()?
        };
        return Ok(Stmt::Gate { output: output.to_string(), kind, fanins });
    }

    let upper = content.to_ascii_uppercase();
    for (kw, is_input) in [("INPUT", true), ("OUTPUT", false)] {
        if upper.starts_with(kw) {
            let rest = content[kw.len()..].trim();
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err(kw.len() + 1, "expected (name)"))?
                .trim();
            check_name(inner, line, kw.len() + 2)?;
            return Ok(if is_input { Stmt::Input(inner.to_string()) } else { Stmt::Output(inner.to_string()) });
        }
    }
    Err(err(1, "expected INPUT(...), OUTPUT(...), or net = KIND(...)"))
}

fn check_name(name: &str, line: usize, col: usize) -> Result<(), BenchParseError> {
    let bad = name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '=' | '#'));
    if bad {
        Err(BenchParseError::Syntax { line, col, msg: format!("invalid net name {name:?}") })
    } else {
        Ok(())
    }
}

fn lookup_kind(s: &str) -> Option<GateKind> {
    let upper = s.to_ascii_uppercase();
    Some(match upper.as_str() {
        "AND" => GateKind::And,
        "OR" => GateKind::Or,
        "NAND" => GateKind::Nand,
        "NOR" => GateKind::Nor,
        "NOT" | "INV" => GateKind::Not,
        "BUF" | "BUFF" => GateKind::Buf,
        "XOR" => GateKind::Xor,
        "XNOR" => GateKind::Xnor,
        "MUX" => GateKind::Mux,
        "CONST0" => GateKind::Const0,
        "CONST1" => GateKind::Const1,
        _ => return None,
    })
}

/// Serializes in canonical order: primary inputs, key inputs, outputs, then
/// gates in stored (topological) order. LF line endings.
pub fn write_bench(n: &Netlist) -> String {
    let mut s = String::new();
    for &pi in n.inputs() {
        let _ = writeln!(s, "INPUT({})", n.name(pi));
    }
    for &k in n.key_inputs() {
        let _ = writeln!(s, "INPUT({})", n.name(k));
    }
    for &po in n.outputs() {
        let _ = writeln!(s, "OUTPUT({})", n.name(po));
    }
    for g in n.gates() {
        let args: Vec<&str> = g.fanins.iter().map(|&f| n.name(f)).collect();
        let _ = writeln!(s, "{} = {}({})", n.name(g.output), g.kind.name(), args.join(", "));
    }
    s
}
