//! Verification drivers and trend studies.
//!
//! Every report here is a deterministic function of its configuration and
//! seed. Sampled runs give sample `i` its own ChaCha stream, so results do
//! not depend on how many worker threads draw them.

use std::path::Path;

use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{check_inputs, string_len, BitString};
use crate::complexity::ComplexityOracle;
use crate::enumeration::{Catalog, CountsRow};
use crate::error::{Error, Result};
use crate::predictor::{run_trace, run_traces, TieMode};
use crate::prior::{mu_exact, sample_string, NuFamily, Ratio, SizeSampler};

/// Complexity budget used when none is given: exhaustive at `L <= 2`,
/// the sampled ladder's 7 at `L = 3`, smaller above.
pub fn default_size_budget(inputs: u8) -> usize {
    match inputs {
        0..=3 => 7,
        4 => 6,
        _ => 5,
    }
}

/// Sizes above this are never drawn by the samplers here.
pub const DEFAULT_G_CAP: usize = 32;

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.12}")
}

fn ratio_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theorem1Row {
    pub n: usize,
    /// Truncated prior mass of strings with at most `n` errors.
    pub lhs: Ratio,
    /// `nu(0) + ... + nu(n) - tail`.
    pub rhs: Ratio,
}

impl Theorem1Row {
    pub fn passed(&self) -> bool {
        self.lhs >= self.rhs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theorem1Report {
    pub inputs: u8,
    pub g_max: usize,
    pub nu: NuFamily,
    pub tail: Ratio,
    pub rows: Vec<Theorem1Row>,
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(Theorem1Row::passed)
    }

    /// Writes `L,G_max,nu,N,lhs,rhs,pass,lhs_num,lhs_den,rhs_num,rhs_den`;
    /// the decimal columns are for plotting, the fractions are exact.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "L", "G_max", "nu", "N", "lhs", "rhs", "pass", "lhs_num", "lhs_den", "rhs_num", "rhs_den",
        ])?;
        for r in &self.rows {
            out.write_record([
                self.inputs.to_string(),
                self.g_max.to_string(),
                self.nu.to_string(),
                r.n.to_string(),
                fmt_f64(ratio_f64(&r.lhs)),
                fmt_f64(ratio_f64(&r.rhs)),
                (r.passed() as u8).to_string(),
                r.lhs.numer().to_string(),
                r.lhs.denom().to_string(),
                r.rhs.numer().to_string(),
                r.rhs.denom().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Checks the error-count bound exactly for every `N <= g_max`, using the
/// truncated prior and a full trace of every string.
///
/// Refuses when either the classes up to `g_max` or the complexities of
/// all strings are beyond the given budgets; there is no sampled fallback.
pub fn verify_theorem1(
    nu: &NuFamily,
    catalog: &Catalog,
    oracle: &ComplexityOracle,
    g_max: usize,
) -> Result<Theorem1Report> {
    let inputs = catalog.inputs();
    if oracle.inputs() != inputs {
        return Err(Error::ArityMismatch { circuit: oracle.inputs(), pattern: inputs });
    }
    if inputs > 4 {
        return Err(Error::Infeasible(format!("exact verification needs L <= 4, got {inputs}")));
    }
    if !oracle.table().covers_all() {
        return Err(Error::Infeasible(format!(
            "some strings at L={inputs} need more than {} gates; exact traces unavailable",
            oracle.budget()
        )));
    }
    let prior = mu_exact(nu, catalog, g_max)?;
    let strings: Vec<BitString> = BitString::all(inputs).collect();
    let traces = run_traces(oracle, &strings, TieMode::Set)?;
    let rows = (0..=g_max)
        .map(|n| {
            let lhs: Ratio = traces.iter().filter(|t| t.errors <= n).map(|t| prior.mass(&t.string)).sum();
            let rhs = nu.partial_sum(n) - &prior.tail;
            Theorem1Row { n, lhs, rhs }
        })
        .collect();
    Ok(Theorem1Report { inputs, g_max, nu: nu.clone(), tail: prior.tail, rows })
}

/// Configuration shared by the sampled studies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
    /// Largest size drawn; the size prior is conditioned on `g <= g_cap`.
    pub g_cap: usize,
}

/// What one sampled string contributed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Draw {
    /// `None` when the trace hit the complexity budget.
    errors: Option<usize>,
    uncertain: usize,
    approximate: bool,
}

fn draw_traces(
    nu: &NuFamily,
    catalog: &Catalog,
    oracle: &ComplexityOracle,
    config: &SamplingConfig,
) -> Result<Vec<Draw>> {
    if config.samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let sizes = SizeSampler::new(nu, config.g_cap)?;
    (0..config.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i);
            let s = sample_string(&sizes, catalog, &mut rng)?;
            let t = run_trace(oracle, &s.string, TieMode::Set)?;
            Ok(Draw {
                errors: (!t.budget_exceeded).then_some(t.errors),
                uncertain: t.uncertain,
                approximate: s.approximate,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledRow {
    pub n: usize,
    /// Draws with an exact trace and at most `n` errors.
    pub successes: usize,
    /// `successes / samples`; excluded draws count as failures.
    pub lhs: f64,
    /// `(nu(0) + ... + nu(n)) / (nu(0) + ... + nu(g_cap))`.
    pub rhs: f64,
    /// Binomial standard deviation at `p = rhs`.
    pub sigma: f64,
}

impl SampledRow {
    pub fn radius(&self) -> f64 {
        3.0 * self.sigma
    }

    pub fn passed(&self) -> bool {
        self.lhs >= self.rhs - self.radius()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledReport {
    pub inputs: u8,
    pub nu: NuFamily,
    pub config: SamplingConfig,
    pub budget: usize,
    /// Draws whose trace hit the complexity budget.
    pub excluded: usize,
    /// Draws whose circuit came from the construction-sequence sampler.
    pub approximate: usize,
    pub rows: Vec<SampledRow>,
}

impl SampledReport {
    pub fn exclusion_rate(&self) -> f64 {
        self.excluded as f64 / self.config.samples as f64
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(SampledRow::passed)
    }

    /// Writes one row per `N`, each carrying the run's sample count, seed,
    /// exclusion rate and confidence radius.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "L",
            "nu",
            "samples",
            "seed",
            "budget",
            "g_cap",
            "N",
            "successes",
            "lhs",
            "rhs",
            "sigma",
            "radius",
            "pass",
            "excluded",
            "exclusion_rate",
            "approximate",
        ])?;
        for r in &self.rows {
            out.write_record([
                self.inputs.to_string(),
                self.nu.to_string(),
                self.config.samples.to_string(),
                self.config.seed.to_string(),
                self.budget.to_string(),
                self.config.g_cap.to_string(),
                r.n.to_string(),
                r.successes.to_string(),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.sigma),
                fmt_f64(r.radius()),
                (r.passed() as u8).to_string(),
                self.excluded.to_string(),
                fmt_f64(self.exclusion_rate()),
                self.approximate.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Monte Carlo form of [`verify_theorem1`] for `L` in `{3, 4}`, over
/// `N = 0..=budget`.
///
/// Strings are drawn from the prior conditioned on `g <= g_cap`, which
/// rescales the bound by the conditioning mass. Traces that reach the
/// complexity budget are excluded from the success counts, which can only
/// lower the empirical side.
pub fn verify_theorem1_sampled(
    nu: &NuFamily,
    catalog: &Catalog,
    oracle: &ComplexityOracle,
    config: &SamplingConfig,
) -> Result<SampledReport> {
    let inputs = catalog.inputs();
    if !(3..=4).contains(&inputs) {
        return Err(Error::InvalidArgument(format!("sampled verification needs L in 3..=4, got {inputs}")));
    }
    if oracle.inputs() != inputs {
        return Err(Error::ArityMismatch { circuit: oracle.inputs(), pattern: inputs });
    }
    let draws = draw_traces(nu, catalog, oracle, config)?;
    let samples = config.samples as f64;
    let z = nu.partial_sum(config.g_cap);
    let rows = (0..=oracle.budget())
        .map(|n| {
            let successes = draws.iter().filter(|d| d.errors.is_some_and(|e| e <= n)).count();
            let rhs = ratio_f64(&(nu.partial_sum(n.min(config.g_cap)) / &z));
            let sigma = (rhs * (1.0 - rhs) / samples).sqrt();
            SampledRow { n, successes, lhs: successes as f64 / samples, rhs, sigma }
        })
        .collect();
    Ok(SampledReport {
        inputs,
        nu: nu.clone(),
        config: config.clone(),
        budget: oracle.budget(),
        excluded: draws.iter().filter(|d| d.errors.is_none()).count(),
        approximate: draws.iter().filter(|d| d.approximate).count(),
        rows,
    })
}

/// Mean per-bit outcome rates at one string length.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendRow {
    pub n: usize,
    pub samples: usize,
    pub budget: usize,
    pub excluded: usize,
    pub approximate: usize,
    pub error_fraction: f64,
    pub correct_fraction: f64,
    pub uncertain_fraction: f64,
}

/// Samples strings at each length in `n_list` (a subset of `{4, 8, 16}`)
/// and reports mean error, correct and uncertain fractions over the exact
/// traces. A finite-length trend only; it proves nothing about the limit.
///
/// `setup(L)` supplies the catalog and complexity oracle for each length.
pub fn trend_error_fraction(
    n_list: &[usize],
    nu: &NuFamily,
    config: &SamplingConfig,
    setup: impl Fn(u8) -> Result<(Catalog, ComplexityOracle)>,
) -> Result<Vec<TrendRow>> {
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let inputs = match n {
            4 => 2,
            8 => 3,
            16 => 4,
            _ => return Err(Error::InvalidArgument(format!("trend lengths must be 4, 8 or 16, got {n}"))),
        };
        let (catalog, oracle) = setup(inputs)?;
        let run = SamplingConfig { seed: config.seed.wrapping_add(i as u64), ..config.clone() };
        let draws = draw_traces(nu, &catalog, &oracle, &run)?;
        let kept: Vec<&Draw> = draws.iter().filter(|d| d.errors.is_some()).collect();
        let bits = (kept.len() * n).max(1) as f64;
        let errors: usize = kept.iter().filter_map(|d| d.errors).sum();
        let uncertain: usize = kept.iter().map(|d| d.uncertain).sum();
        let error_fraction = errors as f64 / bits;
        let uncertain_fraction = uncertain as f64 / bits;
        rows.push(TrendRow {
            n,
            samples: config.samples,
            budget: oracle.budget(),
            excluded: draws.len() - kept.len(),
            approximate: draws.iter().filter(|d| d.approximate).count(),
            error_fraction,
            correct_fraction: if kept.is_empty() { 0.0 } else { 1.0 - error_fraction - uncertain_fraction },
            uncertain_fraction,
        });
    }
    Ok(rows)
}

/// Writes `n,L,samples,seed,budget,excluded,approximate,error_fraction,correct_fraction,uncertain_fraction`.
pub fn write_trend_csv<W: std::io::Write>(w: W, rows: &[TrendRow], seed: u64) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "n",
        "L",
        "samples",
        "seed",
        "budget",
        "excluded",
        "approximate",
        "error_fraction",
        "correct_fraction",
        "uncertain_fraction",
    ])?;
    for r in rows {
        out.write_record([
            r.n.to_string(),
            (r.n.trailing_zeros()).to_string(),
            r.samples.to_string(),
            seed.to_string(),
            r.budget.to_string(),
            r.excluded.to_string(),
            r.approximate.to_string(),
            fmt_f64(r.error_fraction),
            fmt_f64(r.correct_fraction),
            fmt_f64(r.uncertain_fraction),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundStatus {
    Pass,
    Fail,
    Skipped,
}

impl BoundStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Pass => "pass",
            BoundStatus::Fail => "fail",
            BoundStatus::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingReport {
    pub rows: Vec<(CountsRow, BoundStatus)>,
}

impl CountingReport {
    /// No row failed; skipped rows are not failures.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|(_, s)| *s != BoundStatus::Fail)
    }

    /// Writes `L,g,exact,lower,upper,truncated,status`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["L", "g", "exact", "lower", "upper", "truncated", "status"])?;
        for (r, status) in &self.rows {
            out.write_record([
                r.inputs.to_string(),
                r.size.to_string(),
                r.exact.map(|e| e.to_string()).unwrap_or_default(),
                r.lower.to_string(),
                r.upper.to_string(),
                (r.truncated as u8).to_string(),
                status.as_str().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Compares exact class counts with the product bounds for each `L` in
/// `inputs` and every `g <= g_max`; sizes over the budget are skipped.
pub fn verify_counting_bounds(inputs: &[u8], g_max: usize, budget: usize) -> Result<CountingReport> {
    let mut rows = Vec::new();
    for &l in inputs {
        let table = Catalog::new(l, budget)?.counts(g_max)?;
        for r in table.rows {
            let status = match (r.truncated, r.within_bounds()) {
                (true, _) => BoundStatus::Skipped,
                (false, true) => BoundStatus::Pass,
                (false, false) => BoundStatus::Fail,
            };
            rows.push((r, status));
        }
    }
    Ok(CountingReport { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyRow {
    pub string: BitString,
    pub count: usize,
    /// `mu_trunc(s)` renormalized over sizes `<= g_max`.
    pub expected: f64,
    pub sigma: f64,
}

impl FrequencyRow {
    pub fn observed(&self, samples: usize) -> f64 {
        self.count as f64 / samples as f64
    }

    pub fn passed(&self, samples: usize) -> bool {
        (self.observed(samples) - self.expected).abs() <= 3.0 * self.sigma
    }
}

/// Draws `samples` strings from the prior conditioned on `g <= g_max` and
/// compares their frequencies with the exact truncated prior.
pub fn prior_frequencies(
    nu: &NuFamily,
    catalog: &Catalog,
    g_max: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<FrequencyRow>> {
    let inputs = catalog.inputs();
    check_inputs(inputs)?;
    if inputs > 4 {
        return Err(Error::Infeasible(format!("frequency table needs L <= 4, got {inputs}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let prior = mu_exact(nu, catalog, g_max)?;
    let total = prior.total_mass();
    if total.is_zero() {
        return Err(Error::Nu(format!("no mass at sizes <= {g_max}")));
    }
    let sizes = SizeSampler::new(nu, g_max)?;
    let drawn: Vec<u64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            sample_string(&sizes, catalog, &mut rng).map(|s| s.string.word())
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0usize; 1 << string_len(inputs)];
    for w in drawn {
        counts[w as usize] += 1;
    }
    Ok(BitString::all(inputs)
        .map(|s| {
            let expected = ratio_f64(&(prior.mass(&s) / &total));
            let sigma = (expected * (1.0 - expected) / samples as f64).sqrt();
            FrequencyRow { string: s, count: counts[s.word() as usize], expected, sigma }
        })
        .collect())
}

/// Run manifest written next to experiment artifacts.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config: serde_json::Value,
    pub seed: u64,
    pub versions: serde_json::Value,
    pub runtime_seconds: f64,
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn new(config: serde_json::Value, seed: u64, runtime_seconds: f64, artifacts: Vec<String>) -> Self {
        let versions = serde_json::json!({ env!("CARGO_PKG_NAME"): env!("CARGO_PKG_VERSION") });
        Self { config, seed, versions, runtime_seconds, artifacts }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::DEFAULT_BUDGET;
    use num_bigint::BigInt;
    use num_traits::One;

    #[test]
    fn theorem1_small() {
        let catalog = Catalog::new(2, DEFAULT_BUDGET).unwrap();
        let oracle = ComplexityOracle::new(2, 5).unwrap();
        let rep = verify_theorem1(&NuFamily::Geometric, &catalog, &oracle, 3).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert!(rep.passed());
        assert_eq!(rep.rows[0].rhs, Ratio::new(BigInt::one(), BigInt::from(2)) - &rep.tail);
        let last = rep.rows.last().unwrap();
        assert!(last.lhs >= Ratio::one() - &rep.tail);
    }

    #[test]
    fn theorem1_refuses_incomplete_oracle() {
        let catalog = Catalog::new(2, DEFAULT_BUDGET).unwrap();
        let oracle = ComplexityOracle::new(2, 3).unwrap();
        let err = verify_theorem1(&NuFamily::Geometric, &catalog, &oracle, 3).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn sampled_rejects_zero_samples() {
        let catalog = Catalog::new(3, 1000).unwrap();
        let oracle = ComplexityOracle::new(3, 3).unwrap();
        let config = SamplingConfig { samples: 0, seed: 1, g_cap: 8 };
        assert!(verify_theorem1_sampled(&NuFamily::Geometric, &catalog, &oracle, &config).is_err());
    }

    #[test]
    fn point_mass_trend_is_error_free() {
        let config = SamplingConfig { samples: 50, seed: 3, g_cap: 4 };
        let rows = trend_error_fraction(&[4, 8], &NuFamily::point_mass(0), &config, |l| {
            Ok((Catalog::new(l, 10_000)?, ComplexityOracle::new(l, 3)?))
        })
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error_fraction == 0.0 && r.excluded == 0));
        assert!(trend_error_fraction(&[5], &NuFamily::Geometric, &config, |l| {
            Ok((Catalog::new(l, 10)?, ComplexityOracle::new(l, 1)?))
        })
        .is_err());
    }

    #[test]
    fn counting_bounds_small() {
        let rep = verify_counting_bounds(&[2], 3, DEFAULT_BUDGET).unwrap();
        assert!(rep.passed());
        let g0 = &rep.rows[0].0;
        assert_eq!((g0.exact, g0.lower.clone(), g0.upper.clone()), (Some(2), 2u32.into(), 2u32.into()));
        let tight = verify_counting_bounds(&[2], 3, 20).unwrap();
        assert!(tight.passed());
        assert_eq!(tight.rows.last().unwrap().1, BoundStatus::Skipped);
    }
}
