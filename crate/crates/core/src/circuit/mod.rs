//! NAND circuits over `L` index inputs.
//!
//! A circuit is a list of fan-in-2 NAND gates in topological order plus a
//! designated output node. Gate `k` may read any input or any gate with a
//! smaller index, so acyclicity holds by construction. Dead gates are legal
//! and count toward the size.

mod canon;
mod construct;
mod text;

use std::fmt;

use crate::bits::{check_inputs, full_mask, input_word, string_len, BitString, Pattern};
use crate::error::{Error, Result};

pub use construct::{dnf_circuit, hardcode_bit, hardcode_overhead, CircuitBuilder, Hardcoded};

pub(crate) use canon::Canonizer;

/// An operand or output reference.
///
/// Inputs order before gates, which fixes the orientation of a canonical
/// operand pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Input(u8),
    Gate(u16),
}

impl NodeRef {
    /// Dense node number: inputs first, then gates.
    pub(crate) fn id(self, inputs: u8) -> u16 {
        match self {
            NodeRef::Input(j) => j as u16,
            NodeRef::Gate(k) => inputs as u16 + k,
        }
    }

    pub(crate) fn from_id(id: u16, inputs: u8) -> Self {
        if id < inputs as u16 {
            NodeRef::Input(id as u8)
        } else {
            NodeRef::Gate(id - inputs as u16)
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Input(j) => write!(f, "x{j}"),
            NodeRef::Gate(k) => write!(f, "g{k}"),
        }
    }
}

/// A structural problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    InputCount(u8),
    /// Operand names an input that does not exist.
    DanglingInput { gate: usize, operand: NodeRef },
    /// Operand names the gate itself or a later gate.
    ForwardReference { gate: usize, operand: NodeRef },
    OutputOutOfRange(NodeRef),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InputCount(l) => write!(f, "input count {l} unsupported"),
            Violation::DanglingInput { gate, operand } => {
                write!(f, "gate {gate}: dangling input reference {operand}")
            }
            Violation::ForwardReference { gate, operand } => {
                write!(f, "gate {gate}: self/forward reference {operand}")
            }
            Violation::OutputOutOfRange(r) => write!(f, "output out of range: {r}"),
        }
    }
}

/// Checks every structural invariant and reports all violations found.
pub fn validate(inputs: u8, gates: &[[NodeRef; 2]], output: NodeRef) -> Vec<Violation> {
    let mut out = Vec::new();
    if check_inputs(inputs).is_err() {
        out.push(Violation::InputCount(inputs));
    }
    for (k, pair) in gates.iter().enumerate() {
        for &operand in pair {
            match operand {
                NodeRef::Input(j) if j >= inputs => {
                    out.push(Violation::DanglingInput { gate: k, operand })
                }
                NodeRef::Gate(m) if m as usize >= k => {
                    out.push(Violation::ForwardReference { gate: k, operand })
                }
                _ => {}
            }
        }
    }
    let output_ok = match output {
        NodeRef::Input(j) => j < inputs,
        NodeRef::Gate(k) => (k as usize) < gates.len(),
    };
    if !output_ok {
        out.push(Violation::OutputOutOfRange(output));
    }
    out
}

/// A validated NAND circuit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Circuit {
    inputs: u8,
    gates: Vec<[NodeRef; 2]>,
    output: NodeRef,
}

impl Circuit {
    pub fn new(inputs: u8, gates: Vec<[NodeRef; 2]>, output: NodeRef) -> Result<Self> {
        let violations = validate(inputs, &gates, output);
        if !violations.is_empty() {
            return Err(Error::InvalidCircuit(violations));
        }
        Ok(Self { inputs, gates, output })
    }

    /// The size-0 circuit whose output is input `j`.
    pub fn projection(inputs: u8, j: u8) -> Result<Self> {
        Self::new(inputs, Vec::new(), NodeRef::Input(j))
    }

    /// Builds from dense node ids; only for ids already known to be valid.
    pub(crate) fn from_ids(inputs: u8, pairs: &[(u16, u16)], output: u16) -> Self {
        let gates = pairs
            .iter()
            .map(|&(a, b)| [NodeRef::from_id(a, inputs), NodeRef::from_id(b, inputs)])
            .collect();
        let c = Self { inputs, gates, output: NodeRef::from_id(output, inputs) };
        debug_assert!(validate(c.inputs, &c.gates, c.output).is_empty());
        c
    }

    pub fn inputs(&self) -> u8 {
        self.inputs
    }

    /// Number of gates; inputs are not counted.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[[NodeRef; 2]] {
        &self.gates
    }

    pub fn output(&self) -> NodeRef {
        self.output
    }

    /// Length of the computed string, `2^L`.
    pub fn string_len(&self) -> usize {
        string_len(self.inputs)
    }

    pub(crate) fn id_pairs(&self) -> Vec<(u16, u16)> {
        self.gates
            .iter()
            .map(|[a, b]| (a.id(self.inputs), b.id(self.inputs)))
            .collect()
    }

    /// Bit `i` of the computed string, by direct gate-by-gate evaluation.
    pub fn evaluate(&self, i: usize) -> Result<bool> {
        let len = self.string_len();
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        let mut values = Vec::with_capacity(self.gates.len());
        let read = |values: &[bool], r: NodeRef| match r {
            NodeRef::Input(j) => (i >> j) & 1 == 1,
            NodeRef::Gate(k) => values[k as usize],
        };
        for &[a, b] in &self.gates {
            let v = !(read(&values, a) && read(&values, b));
            values.push(v);
        }
        Ok(read(&values, self.output))
    }

    /// The full computed string, one machine word per node.
    pub fn compute_string(&self) -> BitString {
        BitString::from_word(self.inputs, self.truth_table())
    }

    pub(crate) fn truth_table(&self) -> u64 {
        let mask = full_mask(self.inputs);
        let mut words = Vec::with_capacity(self.gates.len());
        let read = |words: &[u64], r: NodeRef| match r {
            NodeRef::Input(j) => input_word(self.inputs, j),
            NodeRef::Gate(k) => words[k as usize],
        };
        for &[a, b] in &self.gates {
            let w = !(read(&words, a) & read(&words, b)) & mask;
            words.push(w);
        }
        read(&words, self.output)
    }

    /// Whether the computed string is a completion of `x`.
    pub fn matches(&self, x: &Pattern) -> Result<bool> {
        if x.inputs() != self.inputs {
            return Err(Error::ArityMismatch { circuit: self.inputs, pattern: x.inputs() });
        }
        Ok(x.admits(self.truth_table()))
    }

    /// Canonical representative of the isomorphism class.
    ///
    /// Isomorphisms fix the inputs, may relabel gates and treat operand
    /// pairs as unordered. The representative is the relabeling whose
    /// serialized gate list (then output) is lexicographically least.
    pub fn canonicalize(&self) -> Circuit {
        let mut canon = Canonizer::default();
        let mut code = Vec::new();
        canon.code(self.inputs, &self.id_pairs(), self.output.id(self.inputs), &mut code);
        let (pairs, out) = canon::split_code(&code);
        Self::from_ids(self.inputs, &pairs, out)
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize() == *self
    }
}
