//! The minimum-index-complexity (MIP) sequential predictor.
//!
//! Given the bits `x_{<k}` seen so far, the predictor proposes every bit `b`
//! minimizing `I(x_{<k} b)`, where the extended prefix is padded with stars.
//! Ties give the two-element set `{0,1}`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::{string_len, BitString, Pattern};
use crate::circuit::hardcode_overhead;
use crate::complexity::{ComplexityOracle, Partition};
use crate::error::{Error, Result};

/// A nonempty subset of `{0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PredictionSet(u8);

impl PredictionSet {
    pub const ZERO: Self = Self(0b01);
    pub const ONE: Self = Self(0b10);
    pub const BOTH: Self = Self(0b11);

    pub fn single(bit: bool) -> Self {
        if bit {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn contains(self, bit: bool) -> bool {
        self.0 & (1 << bit as u8) != 0
    }

    pub fn is_tie(self) -> bool {
        self == Self::BOTH
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// The bits in the set, smallest first.
    pub fn bits(self) -> impl Iterator<Item = bool> {
        [false, true].into_iter().filter(move |&b| self.contains(b))
    }
}

impl fmt::Display for PredictionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match *self {
            Self::ZERO => "{0}",
            Self::ONE => "{1}",
            _ => "{0,1}",
        })
    }
}

/// A prediction together with the complexities it was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub set: PredictionSet,
    /// `I(x_{<k} 0)` and `I(x_{<k} 1)`; `None` above the oracle budget.
    pub complexities: [Option<usize>; 2],
    /// Both extensions exceeded the budget, so the set is `{0,1}` by default
    /// rather than by an exact comparison.
    pub capped: bool,
}

/// Predicts bit `k` from a pattern determined exactly on positions `0..k`.
pub fn mip_predict(oracle: &ComplexityOracle, prefix: &Pattern) -> Result<Prediction> {
    if prefix.inputs() != oracle.inputs() {
        return Err(Error::ArityMismatch { circuit: oracle.inputs(), pattern: prefix.inputs() });
    }
    let k = prefix.determined().count_ones() as usize;
    let n = string_len(prefix.inputs());
    let expected = if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
    if prefix.determined() != expected {
        return Err(Error::InvalidArgument(format!(
            "prefix {prefix} is not determined exactly on a leading run of positions"
        )));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!("prefix {prefix} has no bit left to predict")));
    }
    let i0 = oracle.value(&prefix.with_bit(k, false))?;
    let i1 = oracle.value(&prefix.with_bit(k, true))?;
    let (set, capped) = match (i0, i1) {
        (Some(a), Some(b)) if a < b => (PredictionSet::ZERO, false),
        (Some(a), Some(b)) if b < a => (PredictionSet::ONE, false),
        (Some(_), Some(_)) => (PredictionSet::BOTH, false),
        (Some(_), None) => (PredictionSet::ZERO, false),
        (None, Some(_)) => (PredictionSet::ONE, false),
        (None, None) => (PredictionSet::BOTH, true),
    };
    Ok(Prediction { set, complexities: [i0, i1], capped })
}

/// How a two-element prediction set is scored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieMode {
    /// A tie is recorded as uncertain and never as an error.
    #[default]
    Set,
    /// A tie is additionally resolved by a seeded coin; wrong picks are
    /// counted in a separate ledger.
    Coin { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Correct,
    Uncertain,
    Error,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Correct => "correct",
            Outcome::Uncertain => "uncertain",
            Outcome::Error => "error",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The predictor's behaviour at one index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub k: usize,
    pub prediction: PredictionSet,
    /// `N_k = I(x_{<=k})`, the complexity after bit `k` is revealed;
    /// `None` above the budget.
    pub n_k: Option<usize>,
    pub outcome: Outcome,
    /// The coin's pick on a tie in [`TieMode::Coin`].
    pub coin_pick: Option<bool>,
    /// The prediction came from budget-capped complexities.
    pub capped: bool,
}

/// A full prediction run over one string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceSummary {
    pub string: BitString,
    /// `I(x)`, or `None` above the budget.
    pub complexity: Option<usize>,
    pub errors: usize,
    pub uncertain: usize,
    /// Wrong coin picks on ties; always 0 in [`TieMode::Set`].
    pub coin_errors: usize,
    pub records: Vec<TraceRecord>,
    /// Some complexity along the trace exceeded the budget.
    pub budget_exceeded: bool,
}

impl TraceSummary {
    /// `N_k` for `k = -1, 0, ..., n-1`; the leading entry is `I(*) = 0`.
    pub fn n_sequence(&self) -> Vec<Option<usize>> {
        std::iter::once(Some(0)).chain(self.records.iter().map(|r| r.n_k)).collect()
    }

    pub fn inputs(&self) -> u8 {
        self.string.inputs()
    }
}

/// Runs the predictor over every index of `x` in order.
pub fn run_trace(oracle: &ComplexityOracle, x: &BitString, tie_mode: TieMode) -> Result<TraceSummary> {
    if x.inputs() != oracle.inputs() {
        return Err(Error::ArityMismatch { circuit: oracle.inputs(), pattern: x.inputs() });
    }
    let mut coin = match tie_mode {
        TieMode::Set => None,
        TieMode::Coin { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(x.word());
            Some(rng)
        }
    };
    let mut records = Vec::with_capacity(x.len());
    let mut prefix = Pattern::any(x.inputs())?;
    for k in 0..x.len() {
        let pred = mip_predict(oracle, &prefix)?;
        let truth = x.bit(k);
        prefix = prefix.with_bit(k, truth);
        let n_k = pred.complexities[truth as usize];
        let outcome = if !pred.set.contains(truth) {
            Outcome::Error
        } else if pred.set.is_tie() {
            Outcome::Uncertain
        } else {
            Outcome::Correct
        };
        let coin_pick = match (&mut coin, pred.set.is_tie()) {
            (Some(rng), true) => Some(rng.gen::<bool>()),
            _ => None,
        };
        records.push(TraceRecord { k, prediction: pred.set, n_k, outcome, coin_pick, capped: pred.capped });
    }
    let count = |o| records.iter().filter(|r| r.outcome == o).count();
    let errors = count(Outcome::Error);
    let uncertain = count(Outcome::Uncertain);
    let coin_errors = records
        .iter()
        .filter(|r| r.coin_pick.is_some_and(|b| b != x.bit(r.k)))
        .count();
    let complexity = records.last().and_then(|r| r.n_k);
    let budget_exceeded = records.iter().any(|r| r.n_k.is_none() || r.capped);
    Ok(TraceSummary { string: *x, complexity, errors, uncertain, coin_errors, records, budget_exceeded })
}

/// Traces many strings in parallel; results keep the input order.
pub fn run_traces(
    oracle: &ComplexityOracle,
    strings: &[BitString],
    tie_mode: TieMode,
) -> Result<Vec<TraceSummary>> {
    strings.par_iter().map(|x| run_trace(oracle, x, tie_mode)).collect()
}

/// The two-sided error bounds checked against one trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorBoundReport {
    pub string: BitString,
    pub complexity: usize,
    pub errors: usize,
    /// `errors <= I(x)`.
    pub upper_ok: bool,
    /// `ceil(I(x) / (2L))`.
    pub lower_2l: usize,
    pub lower_2l_ok: bool,
    /// `ceil(I(x) / c)` with `c` the measured cost of hardcoding one bit.
    pub lower_measured: usize,
    pub lower_measured_ok: bool,
}

impl ErrorBoundReport {
    /// The upper bound holds and at least one form of the lower bound holds.
    pub fn passed(&self) -> bool {
        self.upper_ok && (self.lower_2l_ok || self.lower_measured_ok)
    }
}

pub fn check_error_bounds(summary: &TraceSummary) -> Result<ErrorBoundReport> {
    let complexity = match (summary.budget_exceeded, summary.complexity) {
        (false, Some(c)) => c,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "trace of {} has budget-capped complexities",
                summary.string
            )))
        }
    };
    let l = summary.inputs() as usize;
    let lower_2l = complexity.div_ceil(2 * l);
    let lower_measured = complexity.div_ceil(hardcode_overhead(summary.inputs())?);
    let errors = summary.errors;
    Ok(ErrorBoundReport {
        string: summary.string,
        complexity,
        errors,
        upper_ok: errors <= complexity,
        lower_2l,
        lower_2l_ok: errors >= lower_2l,
        lower_measured,
        lower_measured_ok: errors >= lower_measured,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncertaintyReport {
    pub string: BitString,
    pub complexity: usize,
    pub uncertain: usize,
    /// `|L_{I(x)}|`.
    pub bound: usize,
}

impl UncertaintyReport {
    pub fn passed(&self) -> bool {
        self.uncertain <= self.bound
    }
}

pub fn check_uncertainty_bound(summary: &TraceSummary, partition: &Partition) -> Result<UncertaintyReport> {
    let complexity = summary.complexity.filter(|_| !summary.budget_exceeded).ok_or_else(|| {
        Error::InvalidArgument(format!("trace of {} has budget-capped complexities", summary.string))
    })?;
    if partition.inputs != summary.inputs() {
        return Err(Error::ArityMismatch { circuit: partition.inputs, pattern: summary.inputs() });
    }
    let bound = partition.cumulative_at(complexity).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "partition covers sizes up to {}, need {complexity}",
            partition.g_max()
        ))
    })?;
    Ok(UncertaintyReport { string: summary.string, complexity, uncertain: summary.uncertain, bound })
}

fn opt(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the `L,string,I,errors,uncertain,budget_flag` CSV.
pub fn write_trace_csv<W: std::io::Write>(w: W, traces: &[TraceSummary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["L", "string", "I", "errors", "uncertain", "budget_flag"])?;
    for t in traces {
        out.write_record([
            t.inputs().to_string(),
            t.string.to_string(),
            opt(t.complexity),
            t.errors.to_string(),
            t.uncertain.to_string(),
            (t.budget_exceeded as u8).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the per-index `string,k,pred_set,N_k,outcome` CSV.
pub fn write_trace_detail_csv<W: std::io::Write>(w: W, traces: &[TraceSummary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["string", "k", "pred_set", "N_k", "outcome"])?;
    for t in traces {
        let s = t.string.to_string();
        for r in &t.records {
            out.write_record([
                s.clone(),
                r.k.to_string(),
                r.prediction.to_string(),
                opt(r.n_k),
                r.outcome.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::partition;

    fn oracle() -> ComplexityOracle {
        ComplexityOracle::new(2, 6).unwrap()
    }

    fn prefix(s: &str) -> Pattern {
        Pattern::parse_padded(s, 2).unwrap()
    }

    #[test]
    fn predict_examples() {
        let o = oracle();
        assert_eq!(mip_predict(&o, &prefix("")).unwrap().set, PredictionSet::ZERO);
        assert_eq!(mip_predict(&o, &prefix("0")).unwrap().set, PredictionSet::BOTH);
        assert_eq!(mip_predict(&o, &prefix("01")).unwrap().set, PredictionSet::ZERO);
        assert_eq!(PredictionSet::BOTH.to_string(), "{0,1}");
    }

    #[test]
    fn predict_rejects_non_prefix() {
        let o = oracle();
        assert!(mip_predict(&o, &prefix("*1")).is_err());
        assert!(mip_predict(&o, &prefix("0110")).is_err());
    }

    #[test]
    fn trace_examples() {
        let o = oracle();
        let t = run_trace(&o, &"0101".parse().unwrap(), TieMode::Set).unwrap();
        assert_eq!((t.errors, t.complexity), (0, Some(0)));

        let t = run_trace(&o, &"0110".parse().unwrap(), TieMode::Set).unwrap();
        assert_eq!((t.errors, t.uncertain), (2, 1));
        let outcomes: Vec<Outcome> = t.records.iter().map(|r| r.outcome).collect();
        assert_eq!(outcomes, [Outcome::Correct, Outcome::Uncertain, Outcome::Error, Outcome::Error]);
        assert_eq!(t.n_sequence(), [Some(0), Some(0), Some(0), Some(3), Some(4)]);
        assert!(!t.budget_exceeded);
    }

    #[test]
    fn coin_mode_keeps_set_errors() {
        let o = oracle();
        for s in BitString::all(2) {
            let set = run_trace(&o, &s, TieMode::Set).unwrap();
            let a = run_trace(&o, &s, TieMode::Coin { seed: 9 }).unwrap();
            let b = run_trace(&o, &s, TieMode::Coin { seed: 9 }).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.errors, set.errors);
            assert!(a.coin_errors <= a.uncertain);
        }
    }

    #[test]
    fn capped_trace_is_flagged() {
        let o = ComplexityOracle::new(2, 3).unwrap();
        let t = run_trace(&o, &"0110".parse().unwrap(), TieMode::Set).unwrap();
        assert!(t.budget_exceeded);
        assert_eq!(t.complexity, None);
        assert!(check_error_bounds(&t).is_err());
    }

    #[test]
    fn bound_reports() {
        let o = oracle();
        let part = partition(2, 6).unwrap();
        let t = run_trace(&o, &"0110".parse().unwrap(), TieMode::Set).unwrap();
        let e = check_error_bounds(&t).unwrap();
        assert_eq!((e.lower_2l, e.errors, e.complexity), (1, 2, 4));
        assert!(e.passed());
        let u = check_uncertainty_bound(&t, &part).unwrap();
        assert_eq!(u.bound, 15);
        assert!(u.passed());

        let t = run_trace(&o, &"0101".parse().unwrap(), TieMode::Set).unwrap();
        let u = check_uncertainty_bound(&t, &part).unwrap();
        assert_eq!(u.bound, 2);
        assert!(u.passed() && check_error_bounds(&t).unwrap().passed());

        let small = partition(2, 2).unwrap();
        let t = run_trace(&o, &"0110".parse().unwrap(), TieMode::Set).unwrap();
        assert!(check_uncertainty_bound(&t, &small).is_err());
    }

    #[test]
    fn csv_output() {
        let o = oracle();
        let t = run_trace(&o, &"0110".parse().unwrap(), TieMode::Set).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, std::slice::from_ref(&t)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "L,string,I,errors,uncertain,budget_flag\n2,0110,4,2,1,0\n");
        let mut buf = Vec::new();
        write_trace_detail_csv(&mut buf, &[t]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("0110,1,\"{0,1}\",0,uncertain\n"), "{text}");
    }
}
