//! Index complexity of strings and patterns, and the `X_g` partition.

use std::collections::HashMap;

use crate::bits::{check_inputs, BitString, Pattern};
use crate::circuit::Circuit;
use crate::enumeration::{enumerate_circuits, reachable_functions, FunctionTable};
use crate::error::{Error, Result};

/// Outcome of a bounded complexity query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComplexityResult {
    /// `value` is exact and `witness` is a circuit of that size matching the query.
    Exact { value: usize, witness: Circuit },
    /// No circuit of size at most `budget` matches.
    Exceeds { budget: usize },
}

impl ComplexityResult {
    pub fn value(&self) -> Option<usize> {
        match self {
            ComplexityResult::Exact { value, .. } => Some(*value),
            ComplexityResult::Exceeds { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&Circuit> {
        match self {
            ComplexityResult::Exact { witness, .. } => Some(witness),
            ComplexityResult::Exceeds { .. } => None,
        }
    }
}

/// Answers complexity queries for one input count from a shared table of
/// every function of size at most `budget`.
///
/// `I(x)` is the least size over the completions of `x`; the table is
/// sorted by `(size, word)`, so the first admitted entry is the answer and
/// its witness is the tie-break. Prefix patterns, which the predictor asks
/// for, are answered from a per-length index instead of a scan.
#[derive(Clone, Debug)]
pub struct ComplexityOracle {
    table: FunctionTable,
    /// For each prefix length `k`, the first entry for every `k`-bit prefix value.
    prefixes: Vec<HashMap<u64, u32>>,
}

impl ComplexityOracle {
    pub fn new(inputs: u8, budget: usize) -> Result<Self> {
        Ok(Self::from_table(reachable_functions(inputs, budget)?))
    }

    pub fn from_table(table: FunctionTable) -> Self {
        let n = crate::bits::string_len(table.inputs());
        let mut prefixes: Vec<HashMap<u64, u32>> = vec![HashMap::new(); n + 1];
        for (idx, e) in table.entries().iter().enumerate() {
            for (k, index) in prefixes.iter_mut().enumerate() {
                let key = e.word & prefix_mask(k);
                index.entry(key).or_insert(idx as u32);
            }
        }
        Self { table, prefixes }
    }

    pub fn inputs(&self) -> u8 {
        self.table.inputs()
    }

    pub fn budget(&self) -> usize {
        self.table.max_size()
    }

    pub fn table(&self) -> &FunctionTable {
        &self.table
    }

    fn check(&self, x: &Pattern) -> Result<()> {
        if x.inputs() != self.inputs() {
            return Err(Error::ArityMismatch { circuit: self.inputs(), pattern: x.inputs() });
        }
        Ok(())
    }

    fn first_match(&self, x: &Pattern) -> Option<&crate::enumeration::FunctionEntry> {
        let k = x.determined().trailing_ones() as usize;
        if x.determined() == prefix_mask(k) {
            let idx = *self.prefixes[k].get(&x.value())?;
            return Some(&self.table.entries()[idx as usize]);
        }
        self.table.first_match(x)
    }

    /// `I(x)` when at most the budget, else `None`.
    pub fn value(&self, x: &Pattern) -> Result<Option<usize>> {
        self.check(x)?;
        Ok(self.first_match(x).map(|e| e.size))
    }

    pub fn complexity(&self, x: &Pattern) -> Result<ComplexityResult> {
        self.check(x)?;
        Ok(match self.first_match(x) {
            Some(e) => ComplexityResult::Exact { value: e.size, witness: e.witness(self.inputs()) },
            None => ComplexityResult::Exceeds { budget: self.budget() },
        })
    }

    /// Exact `X_g` for every `g` up to the budget.
    pub fn partition(&self) -> Partition {
        let g_max = self.budget();
        let mut levels = vec![Vec::new(); g_max + 1];
        for (s, g) in self.table.iter() {
            levels[g].push(s);
        }
        let cumulative = levels
            .iter()
            .scan(0usize, |acc, x| {
                *acc += x.len();
                Some(*acc)
            })
            .collect();
        Partition { inputs: self.inputs(), levels, cumulative, complete: self.table.covers_all() }
    }
}

fn prefix_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// One-off query; builds a fresh oracle for `budget`.
pub fn index_complexity(x: &Pattern, budget: usize) -> Result<ComplexityResult> {
    ComplexityOracle::new(x.inputs(), budget)?.complexity(x)
}

/// The same query answered by streaming canonical circuit classes size by
/// size and stopping at the first match.
pub fn index_complexity_by_enumeration(
    x: &Pattern,
    budget: usize,
    enumeration_budget: usize,
) -> Result<ComplexityResult> {
    for size in 0..=budget {
        let classes = enumerate_circuits(x.inputs(), size, enumeration_budget)?;
        if classes.truncated() {
            return Err(Error::BudgetExceeded {
                inputs: x.inputs(),
                size,
                budget: enumeration_budget,
            });
        }
        let words = classes.truth_tables();
        if let Some(idx) = words.iter().position(|&w| x.admits(w)) {
            return Ok(ComplexityResult::Exact { value: size, witness: classes.get(idx) });
        }
    }
    Ok(ComplexityResult::Exceeds { budget })
}

/// Strings grouped by exact index complexity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub inputs: u8,
    /// `levels[g]` is `X_g`, in increasing word order.
    pub levels: Vec<Vec<BitString>>,
    /// `cumulative[g]` is `|L_g| = |X_0| + ... + |X_g|`.
    pub cumulative: Vec<usize>,
    /// Whether the levels cover all of `B^n`; otherwise sizes above `g_max` are missing.
    pub complete: bool,
}

impl Partition {
    pub fn g_max(&self) -> usize {
        self.levels.len() - 1
    }

    /// `|L_g|`, if `g` is covered.
    pub fn cumulative_at(&self, g: usize) -> Option<usize> {
        self.cumulative.get(g).copied()
    }
}

pub fn partition(inputs: u8, g_max: usize) -> Result<Partition> {
    check_inputs(inputs)?;
    Ok(ComplexityOracle::new(inputs, g_max)?.partition())
}

/// Writes the `L,pattern,I,witness,budget_exceeded` CSV.
pub fn write_complexity_csv<W: std::io::Write>(
    w: W,
    rows: &[(Pattern, ComplexityResult)],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["L", "pattern", "I", "witness", "budget_exceeded"])?;
    for (x, r) in rows {
        let (value, witness, exceeded) = match r {
            ComplexityResult::Exact { value, witness } => (value.to_string(), witness.to_string(), "0"),
            ComplexityResult::Exceeds { .. } => (String::new(), String::new(), "1"),
        };
        out.write_record([x.inputs().to_string(), x.to_string(), value, witness, exceeded.into()])?;
    }
    out.flush()?;
    Ok(())
}
