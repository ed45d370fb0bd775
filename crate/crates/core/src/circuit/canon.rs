//! Canonical labeling of circuits up to gate relabeling.
//!
//! A circuit's code is its gate list in some topological order, each gate
//! written as its sorted operand pair of dense node ids, followed by the
//! output id. The canonical code is the lexicographically least code over
//! all topological orders. At each position the least code must place one of
//! the available gates with the smallest mapped pair, so the search only
//! branches on ties, and skips a tie partner when swapping the two gates is
//! an automorphism of the whole circuit.

use std::cmp::Ordering;

const UNSET: u16 = u16::MAX;

/// Reusable scratch space for canonical labeling.
#[derive(Default)]
pub(crate) struct Canonizer {
    inputs: u16,
    pairs: Vec<(u16, u16)>,
    output: u16,
    new_id: Vec<u16>,
    placed: Vec<bool>,
    code: Vec<u16>,
    best: Vec<u16>,
    have_best: bool,
}

impl Canonizer {
    /// Writes the canonical code of the circuit into `out`.
    pub(crate) fn code(&mut self, inputs: u8, pairs: &[(u16, u16)], output: u16, out: &mut Vec<u16>) {
        let inputs = inputs as u16;
        let g = pairs.len();
        self.inputs = inputs;
        self.pairs.clear();
        self.pairs.extend(pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))));
        self.output = output;
        self.new_id.clear();
        self.new_id.extend(0..inputs);
        self.new_id.resize(inputs as usize + g, UNSET);
        self.placed.clear();
        self.placed.resize(g, false);
        self.code.clear();
        self.best.clear();
        self.have_best = false;
        self.search(0);
        out.clear();
        out.extend_from_slice(&self.best);
    }

    fn mapped(&self, gate: usize) -> Option<(u16, u16)> {
        let (a, b) = self.pairs[gate];
        let (a, b) = (self.new_id[a as usize], self.new_id[b as usize]);
        if a == UNSET || b == UNSET {
            None
        } else {
            Some((a.min(b), a.max(b)))
        }
    }

    /// Compares the current partial code with the same-length prefix of the best.
    fn prefix_cmp(&self) -> Ordering {
        if !self.have_best {
            return Ordering::Less;
        }
        self.code.as_slice().cmp(&self.best[..self.code.len()])
    }

    fn search(&mut self, depth: usize) {
        let g = self.pairs.len();
        if depth == g {
            let out = self.new_id[self.output as usize];
            self.code.push(out);
            if !self.have_best || self.code < self.best {
                self.best.clear();
                self.best.extend_from_slice(&self.code);
                self.have_best = true;
            }
            self.code.pop();
            return;
        }

        let mut min: Option<(u16, u16)> = None;
        let mut ties: Vec<usize> = Vec::new();
        for gate in 0..g {
            if self.placed[gate] {
                continue;
            }
            if let Some(p) = self.mapped(gate) {
                match min.map(|m| p.cmp(&m)) {
                    None | Some(Ordering::Less) => {
                        min = Some(p);
                        ties.clear();
                        ties.push(gate);
                    }
                    Some(Ordering::Equal) => ties.push(gate),
                    Some(Ordering::Greater) => {}
                }
            }
        }
        let (a, b) = min.expect("a topological order always has an available gate");

        self.code.push(a);
        self.code.push(b);
        if self.prefix_cmp() == Ordering::Greater {
            self.code.truncate(self.code.len() - 2);
            return;
        }
        let label = self.inputs + depth as u16;
        for (t, &gate) in ties.iter().enumerate() {
            if ties[..t].iter().any(|&u| self.swap_is_automorphism(u, gate)) {
                continue;
            }
            // a sibling branch may have improved the best code meanwhile
            if self.prefix_cmp() == Ordering::Greater {
                break;
            }
            self.placed[gate] = true;
            self.new_id[self.inputs as usize + gate] = label;
            self.search(depth + 1);
            self.new_id[self.inputs as usize + gate] = UNSET;
            self.placed[gate] = false;
        }
        self.code.truncate(self.code.len() - 2);
    }

    /// Whether exchanging gates `u` and `v` maps the circuit onto itself.
    fn swap_is_automorphism(&self, u: usize, v: usize) -> bool {
        let (nu, nv) = (self.inputs + u as u16, self.inputs + v as u16);
        if self.pairs[u] != self.pairs[v] || self.output == nu || self.output == nv {
            return false;
        }
        let swap = |x: u16| {
            if x == nu {
                nv
            } else if x == nv {
                nu
            } else {
                x
            }
        };
        self.pairs.iter().enumerate().all(|(w, &(a, b))| {
            if w == u || w == v {
                return true;
            }
            let (sa, sb) = (swap(a), swap(b));
            (sa.min(sb), sa.max(sb)) == (a, b)
        })
    }
}

pub(crate) fn split_code(code: &[u16]) -> (Vec<(u16, u16)>, u16) {
    let (body, out) = code.split_at(code.len() - 1);
    let pairs = body.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    (pairs, out[0])
}
