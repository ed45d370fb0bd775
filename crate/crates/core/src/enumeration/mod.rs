//! Exhaustive enumeration of circuit isomorphism classes by size.
//!
//! Gate lists are generated in topological order with operand pairs in
//! lexicographic order. A new gate whose operands were already available
//! before an earlier position `p` must not sort below the gate at `p`; every
//! canonical code satisfies this, so the rule prunes without losing classes.
//! Each surviving gate list is combined with every output choice,
//! canonicalized and deduplicated. The search is partitioned by the first
//! gate and the merged classes are sorted by canonical code, so the result
//! does not depend on the thread count.

mod reachable;

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;

use crate::bits::check_inputs;
use crate::circuit::{Canonizer, Circuit};
use crate::error::{Error, Result};

pub use reachable::{reachable_functions, FunctionEntry, FunctionTable};

/// Default cap on the number of classes enumerated for one `(L, g)`.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "CIRCUIT_PRIOR_BUDGET";

/// The enumeration budget from `CIRCUIT_PRIOR_BUDGET`, or the default.
pub fn budget_from_env() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Canonical representatives of every class of `L`-input circuits with
/// exactly `g` gates, sorted by canonical code.
#[derive(Clone, Debug)]
pub struct CircuitClasses {
    inputs: u8,
    size: usize,
    /// Flattened canonical codes, `2g + 1` node ids each.
    codes: Vec<u8>,
    truncated: bool,
}

impl CircuitClasses {
    pub fn inputs(&self) -> u8 {
        self.inputs
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Set when `C_g` has more classes than the budget; no classes are kept then.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn stride(&self) -> usize {
        2 * self.size + 1
    }

    pub fn len(&self) -> usize {
        self.codes.len() / self.stride()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn get(&self, idx: usize) -> Circuit {
        let code = &self.codes[idx * self.stride()..(idx + 1) * self.stride()];
        let pairs: Vec<(u16, u16)> =
            code[..2 * self.size].chunks_exact(2).map(|c| (c[0] as u16, c[1] as u16)).collect();
        Circuit::from_ids(self.inputs, &pairs, code[2 * self.size] as u16)
    }

    pub fn iter(&self) -> impl Iterator<Item = Circuit> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    /// Truth-table word of every class, in class order.
    pub fn truth_tables(&self) -> Vec<u64> {
        use crate::bits::{full_mask, input_word};
        let l = self.inputs as usize;
        let mask = full_mask(self.inputs);
        let mut words: Vec<u64> = (0..self.inputs).map(|j| input_word(self.inputs, j)).collect();
        self.codes
            .chunks_exact(self.stride())
            .map(|code| {
                words.truncate(l);
                for pair in code[..2 * self.size].chunks_exact(2) {
                    let w = !(words[pair[0] as usize] & words[pair[1] as usize]) & mask;
                    words.push(w);
                }
                words[code[2 * self.size] as usize]
            })
            .collect()
    }
}

/// Appendix product bounds `(lower, upper)` on the number of classes.
///
/// `upper = (g + L) * prod_{k<g} (k + L)^2` counts ordered construction
/// sequences; `lower = prod_{k<=g} (k + L)` counts depth-chain circuits.
/// The lower product equals `(g + L)! / (L - 1)!`; the closed form
/// `(g + L)! / L!` that sometimes accompanies it is smaller by a factor of
/// `L` and is available separately as [`lower_bound_closed_form`].
pub fn count_bounds(inputs: u8, size: usize) -> Result<(BigUint, BigUint)> {
    check_inputs(inputs)?;
    let l = inputs as u64;
    let g = size as u64;
    let lower: BigUint = (0..=g).map(|k| BigUint::from(k + l)).product();
    let upper = BigUint::from(g + l)
        * (0..g).map(|k| BigUint::from(k + l).pow(2)).product::<BigUint>();
    Ok((lower, upper))
}

/// `(g + L)! / L!`, kept only to document its disagreement with the product
/// form used by [`count_bounds`].
pub fn lower_bound_closed_form(inputs: u8, size: usize) -> BigUint {
    let l = inputs as u64;
    (l + 1..=l + size as u64).map(BigUint::from).product()
}

/// Enumerates one canonical circuit per isomorphism class with exactly
/// `size` gates, giving up once more than `budget` classes are found.
pub fn enumerate_circuits(inputs: u8, size: usize, budget: usize) -> Result<CircuitClasses> {
    check_inputs(inputs)?;
    let l = inputs as usize;
    if l + size > u8::MAX as usize {
        return Err(Error::InvalidArgument(format!("circuit size {size} too large to enumerate")));
    }
    let empty = CircuitClasses { inputs, size, codes: Vec::new(), truncated: true };
    let (lower, _) = count_bounds(inputs, size)?;
    if lower > BigUint::from(budget) {
        return Ok(empty);
    }

    let first_pairs: Vec<(u8, u8)> = if size == 0 {
        vec![(0, 0)]
    } else {
        (0..l as u8).flat_map(|b| (0..=b).map(move |a| (a, b))).collect()
    };
    let stop = AtomicBool::new(false);
    let parts: Vec<HashSet<Box<[u8]>>> = first_pairs
        .par_iter()
        .map(|&first| {
            let mut gen = Generator::new(inputs, size, budget, &stop);
            if size > 0 {
                gen.pairs.push(first);
            }
            gen.run();
            gen.found
        })
        .collect();
    if stop.load(Ordering::Relaxed) {
        return Ok(empty);
    }

    let mut all: HashSet<Box<[u8]>> = HashSet::new();
    for set in parts {
        all.extend(set);
        if all.len() > budget {
            return Ok(empty);
        }
    }
    let mut keys: Vec<Box<[u8]>> = all.into_iter().collect();
    keys.sort_unstable();
    Ok(CircuitClasses { inputs, size, codes: keys.concat(), truncated: false })
}

struct Generator<'a> {
    inputs: u8,
    size: usize,
    budget: usize,
    pairs: Vec<(u8, u8)>,
    canon: Canonizer,
    scratch: Vec<(u16, u16)>,
    code: Vec<u16>,
    found: HashSet<Box<[u8]>>,
    /// Shared across partitions; any one of them exceeding the budget ends all.
    stop: &'a AtomicBool,
}

impl<'a> Generator<'a> {
    fn new(inputs: u8, size: usize, budget: usize, stop: &'a AtomicBool) -> Self {
        Self {
            inputs,
            size,
            budget,
            pairs: Vec::with_capacity(size),
            canon: Canonizer::default(),
            scratch: Vec::with_capacity(size),
            code: Vec::new(),
            found: HashSet::new(),
            stop,
        }
    }

    fn run(&mut self) {
        if self.stop.load(Ordering::Relaxed) {
            return;
        }
        let l = self.inputs as usize;
        let k = self.pairs.len();
        if k == self.size {
            self.emit();
            return;
        }
        let nodes = (l + k) as u8;
        for b in 0..nodes {
            // positions at which a gate reading `b` was already available
            let ready = (b as usize + 1).saturating_sub(l);
            for a in 0..=b {
                if self.pairs[ready..k].iter().any(|&p| p > (a, b)) {
                    continue;
                }
                self.pairs.push((a, b));
                self.run();
                self.pairs.pop();
                if self.stop.load(Ordering::Relaxed) {
                    return;
                }
            }
        }
    }

    fn emit(&mut self) {
        self.scratch.clear();
        self.scratch.extend(self.pairs.iter().map(|&(a, b)| (a as u16, b as u16)));
        for out in 0..(self.inputs as usize + self.size) as u16 {
            self.canon.code(self.inputs, &self.scratch, out, &mut self.code);
            let key: Box<[u8]> = self.code.iter().map(|&x| x as u8).collect();
            self.found.insert(key);
        }
        if self.found.len() > self.budget {
            self.stop.store(true, Ordering::Relaxed);
        }
    }
}

/// One row of a [`CountsTable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountsRow {
    pub inputs: u8,
    pub size: usize,
    /// Exact `|C_g|`, or `None` when over the budget.
    pub exact: Option<u64>,
    pub lower: BigUint,
    pub upper: BigUint,
    pub truncated: bool,
}

impl CountsRow {
    /// `lower <= exact <= upper`; truncated rows are never within bounds.
    pub fn within_bounds(&self) -> bool {
        self.exact.is_some_and(|e| self.lower <= BigUint::from(e) && BigUint::from(e) <= self.upper)
    }
}

/// Exact class counts next to the Appendix bounds.
///
/// The lower-bound column is the product `prod_{k<=g} (k + L)`. The closed
/// form `(g + L)! / L!` printed beside that product differs from it by a
/// factor of `L`; it is not used here (see [`lower_bound_closed_form`]).
#[derive(Clone, Debug, Default)]
pub struct CountsTable {
    pub rows: Vec<CountsRow>,
}

impl CountsTable {
    pub fn truncated(&self) -> bool {
        self.rows.iter().any(|r| r.truncated)
    }

    /// Writes the `L,g,exact,lower,upper,truncated` CSV.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["L", "g", "exact", "lower", "upper", "truncated"])?;
        for r in &self.rows {
            out.write_record([
                r.inputs.to_string(),
                r.size.to_string(),
                r.exact.map(|e| e.to_string()).unwrap_or_default(),
                r.lower.to_string(),
                r.upper.to_string(),
                (r.truncated as u8).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `|C_g|` and its bounds for every `g <= g_max`. Rows after the first
/// truncated one are also marked truncated without being enumerated.
pub fn count_circuits(inputs: u8, g_max: usize, budget: usize) -> Result<CountsTable> {
    let catalog = Catalog::new(inputs, budget)?;
    catalog.counts(g_max)
}

/// Lazily enumerated, shared class lists for one input count.
pub struct Catalog {
    inputs: u8,
    budget: usize,
    levels: Mutex<HashMap<usize, Arc<CircuitClasses>>>,
}

impl Catalog {
    pub fn new(inputs: u8, budget: usize) -> Result<Self> {
        check_inputs(inputs)?;
        Ok(Self { inputs, budget, levels: Mutex::new(HashMap::new()) })
    }

    pub fn inputs(&self) -> u8 {
        self.inputs
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Classes of size `g`, enumerated on first use. Class counts grow
    /// with `g`, so sizes above a truncated one are not attempted.
    pub fn classes(&self, size: usize) -> Result<Arc<CircuitClasses>> {
        let mut levels = self.levels.lock().expect("catalog lock poisoned");
        if let Some(c) = levels.get(&size) {
            return Ok(Arc::clone(c));
        }
        if levels.iter().any(|(&g, c)| g < size && c.truncated()) {
            let empty = CircuitClasses { inputs: self.inputs, size, codes: Vec::new(), truncated: true };
            let empty = Arc::new(empty);
            levels.insert(size, Arc::clone(&empty));
            return Ok(empty);
        }
        let classes = Arc::new(enumerate_circuits(self.inputs, size, self.budget)?);
        levels.insert(size, Arc::clone(&classes));
        Ok(classes)
    }

    /// Classes of size `g`, or an error when the budget truncated them.
    pub fn exact_classes(&self, size: usize) -> Result<Arc<CircuitClasses>> {
        let classes = self.classes(size)?;
        if classes.truncated() {
            return Err(Error::BudgetExceeded { inputs: self.inputs, size, budget: self.budget });
        }
        Ok(classes)
    }

    /// Exact `|C_g|`, or `None` when the budget does not cover size `g`.
    pub fn count(&self, size: usize) -> Result<Option<u64>> {
        let classes = self.classes(size)?;
        Ok((!classes.truncated()).then(|| classes.len() as u64))
    }

    pub fn counts(&self, g_max: usize) -> Result<CountsTable> {
        let mut rows = Vec::with_capacity(g_max + 1);
        let mut stop = false;
        for size in 0..=g_max {
            let (lower, upper) = count_bounds(self.inputs, size)?;
            let exact = if stop { None } else { self.count(size)? };
            let truncated = exact.is_none();
            stop |= truncated;
            rows.push(CountsRow { inputs: self.inputs, size, exact, lower, upper, truncated });
        }
        Ok(CountsTable { rows })
    }

    /// Draws a circuit of size `g`; see [`sample_uniform_circuit`].
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<SampledCircuit> {
        let classes = self.classes(size)?;
        if !classes.truncated() {
            let idx = rng.gen_range(0..classes.len());
            return Ok(SampledCircuit { circuit: classes.get(idx), approximate: false });
        }
        Ok(SampledCircuit { circuit: sample_construction(self.inputs, size, rng), approximate: true })
    }
}

/// A sampled circuit. `approximate` marks construction-sequence samples,
/// which are not uniform over classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledCircuit {
    pub circuit: Circuit,
    pub approximate: bool,
}

/// Draws a class of `C_g` uniformly by unranking into the enumerated order.
///
/// When the budget does not cover `(L, g)` the circuit is instead built by
/// choosing each gate's two operands and then the output uniformly, which
/// favours classes with many construction orders; such samples are flagged
/// approximate.
pub fn sample_uniform_circuit(inputs: u8, size: usize, seed: u64, budget: usize) -> Result<SampledCircuit> {
    use rand::SeedableRng;
    let catalog = Catalog::new(inputs, budget)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    catalog.sample(size, &mut rng)
}

/// Construction-sequence sampler: ordered operands per gate, then output.
pub fn sample_construction<R: Rng + ?Sized>(inputs: u8, size: usize, rng: &mut R) -> Circuit {
    let l = inputs as u16;
    let pairs: Vec<(u16, u16)> = (0..size as u16)
        .map(|k| (rng.gen_range(0..l + k), rng.gen_range(0..l + k)))
        .collect();
    let out = rng.gen_range(0..l + size as u16);
    Circuit::from_ids(inputs, &pairs, out).canonicalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        let b = |l, g| {
            let (lo, hi) = count_bounds(l, g).unwrap();
            (lo.to_string(), hi.to_string())
        };
        assert_eq!(b(2, 0), ("2".into(), "2".into()));
        assert_eq!(b(2, 1), ("6".into(), "12".into()));
        assert_eq!(b(3, 2), ("60".into(), "720".into()));
    }

    #[test]
    fn closed_form_differs_from_product() {
        for (l, g) in [(2u8, 1usize), (3, 2), (4, 5)] {
            let (lower, _) = count_bounds(l, g).unwrap();
            assert_eq!(lower, lower_bound_closed_form(l, g) * BigUint::from(l));
        }
    }

    #[test]
    fn small_sizes() {
        let c0 = enumerate_circuits(2, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(c0.len(), 2);
        assert!(!c0.truncated());
        let c1 = enumerate_circuits(2, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(c1.len(), 9);
        assert!(c1.iter().all(|c| c.is_canonical() && c.size() == 1));
    }

    #[test]
    fn budget_truncates() {
        let c = enumerate_circuits(2, 3, 200).unwrap();
        assert!(c.truncated() && c.is_empty());
        // lower bound 120 already above budget: nothing is enumerated
        let c = enumerate_circuits(2, 3, 100).unwrap();
        assert!(c.truncated() && c.is_empty());
    }

    #[test]
    fn truth_tables_match_circuits() {
        let classes = enumerate_circuits(2, 2, DEFAULT_BUDGET).unwrap();
        let tts = classes.truth_tables();
        for (c, w) in classes.iter().zip(tts) {
            assert_eq!(c.compute_string().word(), w);
        }
    }

    #[test]
    fn approximate_sampling_when_over_budget() {
        let s = sample_uniform_circuit(3, 6, 7, 1000).unwrap();
        assert!(s.approximate);
        assert_eq!(s.circuit.size(), 6);
        let e = sample_uniform_circuit(2, 2, 7, 1000).unwrap();
        assert!(!e.approximate);
    }
}
