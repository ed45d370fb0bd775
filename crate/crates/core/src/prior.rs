//! Size priors, the induced circuit measure and the truncated circuit prior.
//!
//! A size prior `nu` assigns mass to gate counts. Spreading `nu(g)` evenly
//! over the classes of `C_g` gives each circuit weight `f(g) = nu(g) / |C_g|`;
//! pushing that measure through string computation gives the circuit prior
//! `mu` on `B^n`. `mu` is an infinite sum, so [`mu_exact`] truncates at
//! `G_max` and carries the remaining size mass as an explicit tail.
//!
//! The default size prior is geometric, `nu(g) = 2^-(g+1)`, and the same
//! table is used at every input count.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::bits::BitString;
use crate::enumeration::Catalog;
use crate::error::{Error, Result};

pub type Ratio = BigRational;

/// A distribution (or sub-distribution) over circuit sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NuFamily {
    /// `nu(g) = 2^-(g+1)`.
    Geometric,
    /// Explicit weights; sizes not listed have weight 0.
    Table(BTreeMap<usize, Ratio>),
}

impl NuFamily {
    /// Validates an explicit table: weights nonnegative, total at most 1.
    pub fn table(weights: BTreeMap<usize, Ratio>) -> Result<Self> {
        if weights.values().any(|w| w.is_negative()) {
            return Err(Error::Nu("negative weight".into()));
        }
        let total: Ratio = weights.values().sum();
        if total > Ratio::one() {
            return Err(Error::Nu(format!("weights sum to {total}, more than 1")));
        }
        Ok(NuFamily::Table(weights))
    }

    pub fn point_mass(size: usize) -> Self {
        NuFamily::Table(BTreeMap::from([(size, Ratio::one())]))
    }

    pub fn weight(&self, size: usize) -> Ratio {
        match self {
            NuFamily::Geometric => Ratio::new(BigInt::one(), BigInt::one() << (size + 1)),
            NuFamily::Table(t) => t.get(&size).cloned().unwrap_or_else(Ratio::zero),
        }
    }

    /// `nu(0) + ... + nu(n)`.
    pub fn partial_sum(&self, n: usize) -> Ratio {
        match self {
            NuFamily::Geometric => {
                let den = BigInt::one() << (n + 1);
                Ratio::new(&den - BigInt::one(), den)
            }
            NuFamily::Table(t) => t.range(..=n).map(|(_, w)| w).sum(),
        }
    }

    /// `1 - (nu(0) + ... + nu(n))`: size mass beyond `n`, including any
    /// missing mass of a sub-probability table.
    pub fn tail(&self, n: usize) -> Ratio {
        Ratio::one() - self.partial_sum(n)
    }

    /// Parses `geometric`, `table:g:w,g:w,...` or bare `g:w,...`. Weights are
    /// integers, fractions `a/b` or decimals.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "geometric" {
            return Ok(NuFamily::Geometric);
        }
        let body = s.strip_prefix("table:").unwrap_or(s);
        let mut weights = BTreeMap::new();
        for item in body.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (g, w) = item
                .split_once(':')
                .ok_or_else(|| Error::Nu(format!("expected `g:weight`, got {item:?}")))?;
            let g: usize = g.trim().parse().map_err(|_| Error::Nu(format!("bad size {g:?}")))?;
            if weights.insert(g, parse_ratio(w.trim())?).is_some() {
                return Err(Error::Nu(format!("size {g} listed twice")));
            }
        }
        if weights.is_empty() {
            return Err(Error::Nu(format!("unrecognized size prior {s:?}")));
        }
        Self::table(weights)
    }
}

impl fmt::Display for NuFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NuFamily::Geometric => f.write_str("geometric"),
            NuFamily::Table(t) => {
                f.write_str("table:")?;
                let items: Vec<String> = t.iter().map(|(g, w)| format!("{g}:{w}")).collect();
                f.write_str(&items.join(","))
            }
        }
    }
}

/// Parses `a`, `a/b` or a decimal like `0.25` exactly.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let bad = || Error::Nu(format!("bad weight {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) || int.starts_with('-') {
            return Err(bad());
        }
        let int: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().map_err(|_| bad())? };
        let frac_num: BigInt = if frac.is_empty() { BigInt::zero() } else { frac.parse().map_err(|_| bad())? };
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Ratio::from_integer(int) + Ratio::new(frac_num, den));
    }
    Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?))
}

pub fn nu_partial_sum(nu: &NuFamily, n: usize) -> Ratio {
    nu.partial_sum(n)
}

/// Per-circuit weight `f(g) = nu(g) / |C_g|`, or `None` when `|C_g|` is
/// beyond the enumeration budget.
pub fn f_weight(nu: &NuFamily, catalog: &Catalog, size: usize) -> Result<Option<Ratio>> {
    Ok(catalog
        .count(size)?
        .map(|count| nu.weight(size) / Ratio::from_integer(BigInt::from(count))))
}

/// The circuit prior truncated to circuits of at most `g_max` gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorTable {
    pub inputs: u8,
    pub g_max: usize,
    pub nu: NuFamily,
    /// Strings with nonzero truncated mass.
    masses: BTreeMap<BitString, Ratio>,
    /// `1 - sum_{g <= g_max} nu(g)`.
    pub tail: Ratio,
}

impl PriorTable {
    pub fn mass(&self, s: &BitString) -> Ratio {
        self.masses.get(s).cloned().unwrap_or_else(Ratio::zero)
    }

    /// Strings with nonzero mass, in word order.
    pub fn support(&self) -> impl Iterator<Item = (&BitString, &Ratio)> {
        self.masses.iter()
    }

    pub fn total_mass(&self) -> Ratio {
        self.masses.values().sum()
    }

    /// Writes the `L,G_max,string,mu_num,mu_den` CSV with a trailing `TAIL` row.
    /// Every string of `B^n` is listed when `n <= 16`, else only the support.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["L", "G_max", "string", "mu_num", "mu_den"])?;
        let l = self.inputs.to_string();
        let g = self.g_max.to_string();
        let mut row = |name: String, m: &Ratio| {
            out.write_record([l.clone(), g.clone(), name, m.numer().to_string(), m.denom().to_string()])
        };
        if self.inputs <= 4 {
            for s in BitString::all(self.inputs) {
                row(s.to_string(), &self.mass(&s))?;
            }
        } else {
            for (s, m) in &self.masses {
                row(s.to_string(), m)?;
            }
        }
        row("TAIL".into(), &self.tail)?;
        out.flush()?;
        Ok(())
    }
}

/// `mu_trunc(s) = sum_{g <= g_max} nu(g) |{c in C_g : pi(c) = s}| / |C_g|`.
pub fn mu_exact(nu: &NuFamily, catalog: &Catalog, g_max: usize) -> Result<PriorTable> {
    let inputs = catalog.inputs();
    let mut masses: BTreeMap<BitString, Ratio> = BTreeMap::new();
    for size in 0..=g_max {
        let weight = nu.weight(size);
        if weight.is_zero() {
            continue;
        }
        let classes = catalog.exact_classes(size)?;
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for w in classes.truth_tables() {
            *counts.entry(w).or_default() += 1;
        }
        let total = BigInt::from(classes.len());
        for (word, count) in counts {
            let m = &weight * Ratio::new(BigInt::from(count), total.clone());
            *masses.entry(BitString::from_word(inputs, word)).or_insert_with(Ratio::zero) += m;
        }
    }
    Ok(PriorTable { inputs, g_max, nu: nu.clone(), masses, tail: nu.tail(g_max) })
}

/// A string drawn from the (size-capped) circuit prior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledString {
    pub string: BitString,
    /// Size of the sampled circuit.
    pub size: usize,
    /// Set when the circuit came from the construction-sequence sampler.
    pub approximate: bool,
}

/// Draws sizes from `nu` conditioned on `g <= g_cap`.
#[derive(Clone, Debug)]
pub struct SizeSampler {
    cumulative: Vec<f64>,
    conditioning_mass: Ratio,
}

impl SizeSampler {
    pub fn new(nu: &NuFamily, g_cap: usize) -> Result<Self> {
        let conditioning_mass = nu.partial_sum(g_cap);
        if conditioning_mass.is_zero() {
            return Err(Error::Nu(format!("no mass at sizes <= {g_cap}")));
        }
        let mut acc = Ratio::zero();
        let cumulative = (0..=g_cap)
            .map(|g| {
                acc += nu.weight(g);
                (&acc / &conditioning_mass).to_f64().unwrap_or(f64::NAN)
            })
            .collect();
        Ok(Self { cumulative, conditioning_mass })
    }

    /// `nu(0) + ... + nu(g_cap)`, the mass the samples are conditioned on.
    pub fn conditioning_mass(&self) -> &Ratio {
        &self.conditioning_mass
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or_else(|| self.cumulative.iter().rposition(|&c| c > 0.0).unwrap_or(0))
    }
}

/// Draws a size from `nu` conditioned on `g <= g_cap`, then a circuit of
/// that size from the catalog, and returns the string it computes.
pub fn sample_string<R: Rng + ?Sized>(
    sizes: &SizeSampler,
    catalog: &Catalog,
    rng: &mut R,
) -> Result<SampledString> {
    let size = sizes.sample(rng);
    let c = catalog.sample(size, rng)?;
    Ok(SampledString { string: c.circuit.compute_string(), size, approximate: c.approximate })
}

/// Seeded convenience form of [`sample_string`].
pub fn sample_string_seeded(
    nu: &NuFamily,
    catalog: &Catalog,
    seed: u64,
    g_cap: usize,
) -> Result<SampledString> {
    use rand::SeedableRng;
    let sizes = SizeSampler::new(nu, g_cap)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    sample_string(&sizes, catalog, &mut rng)
}

/// One row of a [`StabilityReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityRow {
    pub n: usize,
    pub g_n: usize,
    /// `nu_n(0) + ... + nu_n(g_n)`.
    pub partial_sum: Ratio,
    /// `g_n / n`.
    pub ratio: Ratio,
}

/// Finite-`n` diagnostics for stability of a family of size priors.
///
/// The flags describe trends over the listed `n` only and prove nothing
/// about the limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// `g_n / n` strictly decreases along the rows.
    pub sublinear_trend: bool,
    /// The partial sums never decrease and their deficit from 1 strictly
    /// decreases (or is already 0).
    pub stable_trend: bool,
    /// The same `nu` was used at every `n`.
    pub nu_constant: bool,
}

pub fn stability_report(
    nu_for_n: impl Fn(usize) -> NuFamily,
    g_for_n: impl Fn(usize) -> usize,
    n_list: &[usize],
) -> StabilityReport {
    let nus: Vec<NuFamily> = n_list.iter().map(|&n| nu_for_n(n)).collect();
    let rows: Vec<StabilityRow> = n_list
        .iter()
        .zip(&nus)
        .map(|(&n, nu)| {
            let g_n = g_for_n(n);
            StabilityRow {
                n,
                g_n,
                partial_sum: nu.partial_sum(g_n),
                ratio: Ratio::new(BigInt::from(g_n), BigInt::from(n.max(1))),
            }
        })
        .collect();
    let sublinear_trend = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let stable_trend = rows.windows(2).all(|w| {
        let (d0, d1) = (Ratio::one() - &w[0].partial_sum, Ratio::one() - &w[1].partial_sum);
        w[1].partial_sum >= w[0].partial_sum && (d1 < d0 || d1.is_zero())
    });
    let nu_constant = nus.windows(2).all(|w| w[0] == w[1]);
    StabilityReport { rows, sublinear_trend, stable_trend, nu_constant }
}

/// `ceil(sqrt(n))`, the default sublinear size sequence.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}
