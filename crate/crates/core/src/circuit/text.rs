//! Line-oriented circuit text format.
//!
//! ```text
//! inputs=2
//! 0: NAND x0 x1
//! 1: NAND g0 g0
//! out=g1
//! ```
//!
//! Blank lines and lines starting with `#` are ignored when parsing.

use std::fmt;
use std::str::FromStr;

use super::{Circuit, NodeRef};
use crate::error::{Error, Result};

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs={}", self.inputs)?;
        for (k, [a, b]) in self.gates.iter().enumerate() {
            writeln!(f, "{k}: NAND {a} {b}")?;
        }
        write!(f, "out={}", self.output)
    }
}

fn parse_node(tok: &str, line: usize) -> Result<NodeRef> {
    let err = || Error::Parse { line, msg: format!("bad node reference {tok:?}") };
    let (kind, num) = tok.split_at(tok.len().min(1));
    match kind {
        "x" => num.parse().map(NodeRef::Input).map_err(|_| err()),
        "g" => num.parse().map(NodeRef::Gate).map_err(|_| err()),
        _ => Err(err()),
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut inputs: Option<u8> = None;
        let mut gates = Vec::new();
        let mut output: Option<NodeRef> = None;

        for (idx, raw) in s.lines().enumerate() {
            let line = idx + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line, msg };
            if output.is_some() {
                return Err(perr("content after out= line".into()));
            }
            if let Some(v) = text.strip_prefix("inputs=") {
                if inputs.is_some() {
                    return Err(perr("duplicate inputs= header".into()));
                }
                inputs = Some(v.trim().parse().map_err(|_| perr(format!("bad input count {v:?}")))?);
            } else if let Some(v) = text.strip_prefix("out=") {
                output = Some(parse_node(v.trim(), line)?);
            } else {
                if inputs.is_none() {
                    return Err(perr("missing inputs= header".into()));
                }
                let (label, rest) =
                    text.split_once(':').ok_or_else(|| perr("expected `k: NAND a b`".into()))?;
                let k: usize =
                    label.trim().parse().map_err(|_| perr(format!("bad gate label {label:?}")))?;
                if k != gates.len() {
                    return Err(perr(format!("gate {k} out of order, expected {}", gates.len())));
                }
                let toks: Vec<&str> = rest.split_whitespace().collect();
                match toks.as_slice() {
                    ["NAND", a, b] => gates.push([parse_node(a, line)?, parse_node(b, line)?]),
                    _ => return Err(perr("expected `k: NAND a b`".into())),
                }
            }
        }

        let inputs = inputs.ok_or(Error::Parse { line: 0, msg: "missing inputs= header".into() })?;
        let output = output.ok_or(Error::Parse { line: 0, msg: "missing out= footer".into() })?;
        Circuit::new(inputs, gates, output)
    }
}
