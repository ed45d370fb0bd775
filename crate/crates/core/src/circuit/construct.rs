//! Constructive circuits: a gate builder, the NAND-basis DNF and single-bit
//! hardcoding.

use super::{Circuit, NodeRef};
use crate::bits::{BitString, MAX_INPUTS};
use crate::error::{Error, Result};

/// Appends gates to an existing gate list.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    inputs: u8,
    gates: Vec<[NodeRef; 2]>,
    negated_inputs: [Option<NodeRef>; MAX_INPUTS as usize],
}

impl CircuitBuilder {
    pub fn new(inputs: u8) -> Result<Self> {
        crate::bits::check_inputs(inputs)?;
        Ok(Self { inputs, gates: Vec::new(), negated_inputs: [None; MAX_INPUTS as usize] })
    }

    /// Continues building on top of the gates of `c`.
    pub fn extend(c: &Circuit) -> Self {
        Self {
            inputs: c.inputs,
            gates: c.gates.clone(),
            negated_inputs: [None; MAX_INPUTS as usize],
        }
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn nand(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let r = NodeRef::Gate(self.gates.len() as u16);
        self.gates.push([a, b]);
        r
    }

    pub fn not(&mut self, a: NodeRef) -> NodeRef {
        self.nand(a, a)
    }

    /// Negation of input `j`, built at most once per builder.
    fn not_input(&mut self, j: u8) -> NodeRef {
        if let Some(r) = self.negated_inputs[j as usize] {
            return r;
        }
        let r = self.not(NodeRef::Input(j));
        self.negated_inputs[j as usize] = Some(r);
        r
    }

    /// Constant 1 as `NAND(x0, NAND(x0, x0))`.
    pub fn one(&mut self) -> NodeRef {
        let nx = self.not_input(0);
        self.nand(NodeRef::Input(0), nx)
    }

    pub fn zero(&mut self) -> NodeRef {
        let one = self.one();
        self.not(one)
    }

    /// Node computing the negation of the index-equality test `idx == i`.
    ///
    /// Literal `j` is `x_j` when bit `j` of `i` is set and `NOT x_j`
    /// otherwise. The conjunction is folded as `q = NAND(l0, l1)`, then
    /// `q = NAND(NOT q, l_j)` for each further literal.
    pub fn index_mismatch(&mut self, i: usize) -> NodeRef {
        if self.inputs == 1 {
            // NOT (NOT x0) is x0 itself
            return if i & 1 == 1 { self.not_input(0) } else { NodeRef::Input(0) };
        }
        let literals: Vec<NodeRef> = (0..self.inputs)
            .map(|j| {
                if (i >> j) & 1 == 1 {
                    NodeRef::Input(j)
                } else {
                    self.not_input(j)
                }
            })
            .collect();
        let mut q = self.nand(literals[0], literals[1]);
        for &lit in &literals[2..] {
            let eq = self.not(q);
            q = self.nand(eq, lit);
        }
        q
    }

    pub fn finish(self, output: NodeRef) -> Result<Circuit> {
        Circuit::new(self.inputs, self.gates, output)
    }
}

/// A circuit computing exactly `s`, as a NAND-basis disjunction of the
/// minterms of the positions where `s` is 1.
///
/// The all-zero string gets the explicit constant-0 construction.
pub fn dnf_circuit(s: &BitString) -> Circuit {
    let mut b = CircuitBuilder::new(s.inputs()).expect("BitString carries a valid input count");
    let ones: Vec<usize> = (0..s.len()).filter(|&i| s.bit(i)).collect();
    let output = match ones.as_slice() {
        [] => b.zero(),
        [only] => {
            let q = b.index_mismatch(*only);
            b.not(q)
        }
        [first, rest @ ..] => {
            // OR of the terms = multi-input NAND of their negations
            let q0 = b.index_mismatch(*first);
            let q1 = b.index_mismatch(rest[0]);
            let mut acc = b.nand(q0, q1);
            for &i in &rest[1..] {
                let q = b.index_mismatch(i);
                let nacc = b.not(acc);
                acc = b.nand(nacc, q);
            }
            acc
        }
    };
    b.finish(output).expect("builder only references existing nodes")
}

/// Result of [`hardcode_bit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hardcoded {
    pub circuit: Circuit,
    /// Gates added on top of the original circuit.
    pub overhead: usize,
}

/// Forces position `i` of the computed string to `b`, keeping all other
/// positions. When the bit already equals `b` the circuit is returned as is.
pub fn hardcode_bit(c: &Circuit, i: usize, b: bool) -> Result<Hardcoded> {
    let len = c.string_len();
    if i >= len {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    if c.evaluate(i)? == b {
        return Ok(Hardcoded { circuit: c.clone(), overhead: 0 });
    }
    let circuit = hardcode_gadget(c, i, b);
    let overhead = circuit.size() - c.size();
    Ok(Hardcoded { circuit, overhead })
}

fn hardcode_gadget(c: &Circuit, i: usize, b: bool) -> Circuit {
    let mut builder = CircuitBuilder::extend(c);
    let mismatch = builder.index_mismatch(i);
    let out = if b {
        // out OR (idx == i)
        let nout = builder.not(c.output);
        builder.nand(nout, mismatch)
    } else {
        // out AND (idx != i)
        let t = builder.nand(c.output, mismatch);
        builder.not(t)
    };
    builder.finish(out).expect("builder only references existing nodes")
}

/// Worst-case gates added by [`hardcode_bit`] over all positions and target
/// bits at input count `L`.
///
/// Equals `3L - 1` for `L >= 2`: up to `L` input negations, `2L - 3` gates
/// for the equality fold and 2 to merge with the old output.
pub fn hardcode_overhead(inputs: u8) -> Result<usize> {
    crate::bits::check_inputs(inputs)?;
    let base = Circuit::projection(inputs, 0)?;
    let n = crate::bits::string_len(inputs);
    let worst = (0..n)
        .flat_map(|i| [false, true].map(|b| hardcode_gadget(&base, i, b).size()))
        .max()
        .unwrap_or(0);
    Ok(worst)
}
