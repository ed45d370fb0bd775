//! Exact minimum circuit sizes for every function reachable within a size
//! bound.
//!
//! A minimum circuit has no dead gates and no two nodes computing the same
//! function, so it is a chain of distinct truth tables, each the NAND of two
//! earlier entries. The search walks chains depth-first, keyed by truth
//! table. A set of chain functions is only walked in its least valid order:
//! a function that could already have been built before position `p` must
//! sort above the function placed at `p`. The size of a function is the
//! length of the shortest chain containing it.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::bits::{check_inputs, full_mask, input_word, BitString, Pattern};
use crate::circuit::Circuit;
use crate::error::Result;

/// One reachable function with a minimum-size witness chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionEntry {
    pub word: u64,
    pub size: usize,
    /// Chain gates as dense node-id pairs.
    ops: Vec<(u16, u16)>,
    output: u16,
}

impl FunctionEntry {
    pub fn witness(&self, inputs: u8) -> Circuit {
        Circuit::from_ids(inputs, &self.ops, self.output)
    }
}

/// All functions of `L` inputs with index complexity at most `max_size`.
///
/// Entries are sorted by `(size, word)`.
#[derive(Clone, Debug)]
pub struct FunctionTable {
    inputs: u8,
    max_size: usize,
    entries: Vec<FunctionEntry>,
    by_word: HashMap<u64, usize>,
}

impl FunctionTable {
    pub fn inputs(&self) -> u8 {
        self.inputs
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn entries(&self) -> &[FunctionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether every function of `B^n` is present.
    pub fn covers_all(&self) -> bool {
        let n = crate::bits::string_len(self.inputs);
        n < 64 && self.entries.len() as u128 == 1u128 << n
    }

    pub fn entry(&self, s: &BitString) -> Option<&FunctionEntry> {
        if s.inputs() != self.inputs {
            return None;
        }
        self.by_word.get(&s.word()).map(|&i| &self.entries[i])
    }

    /// Exact index complexity of `s`, if at most `max_size`.
    pub fn size_of(&self, s: &BitString) -> Option<usize> {
        self.entry(s).map(|e| e.size)
    }

    /// The first entry, in `(size, word)` order, admitted by `x`.
    pub fn first_match(&self, x: &Pattern) -> Option<&FunctionEntry> {
        self.entries.iter().find(|e| x.admits(e.word))
    }

    /// Strings and their sizes, in `(size, word)` order.
    pub fn iter(&self) -> impl Iterator<Item = (BitString, usize)> + '_ {
        self.entries.iter().map(|e| (BitString::from_word(self.inputs, e.word), e.size))
    }
}

/// Per function: size, gate list and output node of the best witness.
type BestMap = HashMap<u64, (usize, Vec<(u16, u16)>, u16)>;

/// Builds the table of exact index complexities up to `max_size`.
///
/// Among equal-size witnesses the one with the lexicographically least gate
/// list is kept, independent of thread scheduling.
pub fn reachable_functions(inputs: u8, max_size: usize) -> Result<FunctionTable> {
    check_inputs(inputs)?;
    let l = inputs as usize;
    let mut best: BestMap = HashMap::new();
    for j in 0..inputs {
        best.entry(input_word(inputs, j)).or_insert((0, Vec::new(), j as u16));
    }

    if max_size > 0 {
        let root = Search::new(inputs, max_size);
        let firsts = root.candidates();
        let partials: Vec<Search> = firsts
            .into_par_iter()
            .map(|cand| {
                let mut s = Search::new(inputs, max_size);
                s.visit(cand);
                s
            })
            .collect();
        for s in partials {
            for (word, found) in s.best {
                merge(&mut best, word, found);
            }
        }
    }

    let mut entries: Vec<FunctionEntry> = best
        .into_iter()
        .map(|(word, (size, ops, output))| FunctionEntry { word, size, ops, output })
        .collect();
    entries.sort_by_key(|e| (e.size, e.word));
    let by_word = entries.iter().enumerate().map(|(i, e)| (e.word, i)).collect();
    debug_assert!(entries.len() >= l);
    Ok(FunctionTable { inputs, max_size, entries, by_word })
}

fn merge(
    best: &mut BestMap,
    word: u64,
    found: (usize, Vec<(u16, u16)>, u16),
) {
    match best.get(&word) {
        Some(cur) if (cur.0, &cur.1) <= (found.0, &found.1) => {}
        _ => {
            best.insert(word, found);
        }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    word: u64,
    a: u16,
    b: u16,
}

struct Search {
    inputs: usize,
    mask: u64,
    max_size: usize,
    funcs: Vec<u64>,
    ops: Vec<(u16, u16)>,
    best: BestMap,
}

impl Search {
    fn new(inputs: u8, max_size: usize) -> Self {
        let funcs = (0..inputs).map(|j| input_word(inputs, j)).collect();
        Self {
            inputs: inputs as usize,
            mask: full_mask(inputs),
            max_size,
            funcs,
            ops: Vec::with_capacity(max_size),
            best: HashMap::new(),
        }
    }

    /// Canonical extensions of the current chain.
    fn candidates(&self) -> Vec<Candidate> {
        let k = self.funcs.len();
        let pos = k - self.inputs;
        let mut raw: Vec<Candidate> = Vec::with_capacity(k * (k + 1) / 2);
        for b in 0..k {
            for a in 0..=b {
                let word = !(self.funcs[a] & self.funcs[b]) & self.mask;
                raw.push(Candidate { word, a: a as u16, b: b as u16 });
            }
        }
        // stable sort keeps the smallest `b` first for each word
        raw.sort_by_key(|c| c.word);
        raw.dedup_by_key(|c| c.word);
        raw.retain(|c| {
            if self.funcs.contains(&c.word) {
                return false;
            }
            let ready = (c.b as usize + 1).saturating_sub(self.inputs);
            self.funcs[self.inputs + ready..self.inputs + pos].iter().all(|&f| f < c.word)
        });
        raw
    }

    fn visit(&mut self, cand: Candidate) {
        self.ops.push((cand.a, cand.b));
        self.funcs.push(cand.word);
        let size = self.ops.len();
        let improves = match self.best.get(&cand.word) {
            None => true,
            Some((s, ops, _)) => (size, &self.ops) < (*s, ops),
        };
        if improves {
            let out = (self.funcs.len() - 1) as u16;
            self.best.insert(cand.word, (size, self.ops.clone(), out));
        }
        if size < self.max_size {
            for next in self.candidates() {
                self.visit(next);
            }
        }
        self.funcs.pop();
        self.ops.pop();
    }
}
