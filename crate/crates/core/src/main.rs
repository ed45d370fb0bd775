use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use circuit_prior::complexity::{write_complexity_csv, ComplexityOracle, ComplexityResult};
use circuit_prior::enumeration::{budget_from_env, enumerate_circuits, Catalog};
use circuit_prior::experiments::{
    default_size_budget, trend_error_fraction, verify_counting_bounds, verify_theorem1,
    verify_theorem1_sampled, with_workers, write_trend_csv, Manifest, SamplingConfig, DEFAULT_G_CAP,
};
use circuit_prior::predictor::{
    check_error_bounds, check_uncertainty_bound, mip_predict, run_trace, write_trace_csv,
    write_trace_detail_csv, TieMode, TraceSummary,
};
use circuit_prior::prior::{mu_exact, SizeSampler};
use circuit_prior::{BitString, Error, Pattern};

const EXIT_USAGE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "circuit-prior", version, about = "NAND circuit enumeration, index complexity and the MIP predictor")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Number of circuit inputs; strings have length 2^L.
    #[arg(long = "inputs", short = 'L', global = true, default_value_t = 2)]
    inputs: u8,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest circuit size searched for complexities [default: 7 for L <= 3, 6 for L = 4, else 5].
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Size prior: `geometric` or `table:g:w,g:w,...`.
    #[arg(long, global = true, default_value = "geometric")]
    nu: String,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count circuit classes per size, or list the classes of one size.
    Enumerate {
        #[arg(long, default_value_t = 4)]
        gmax: usize,
        /// List every class of this size instead of counting.
        #[arg(long)]
        size: Option<usize>,
    },
    /// Check class counts against the product bounds.
    Bounds {
        #[arg(long, default_value_t = 4)]
        gmax: usize,
    },
    /// Index complexity of a pattern over {0,1,*}, right-padded with `*`.
    Complexity {
        #[arg(long, required_unless_present = "all")]
        pattern: Option<String>,
        /// Every string of length 2^L.
        #[arg(long, conflicts_with = "pattern")]
        all: bool,
    },
    /// The truncated circuit prior.
    Prior {
        #[arg(long, default_value_t = 6)]
        gmax: usize,
    },
    /// Draw strings from the prior.
    Sample {
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Largest size drawn.
        #[arg(long, default_value_t = DEFAULT_G_CAP)]
        gcap: usize,
    },
    /// The predictor's set for the bit after a prefix.
    Predict {
        #[arg(long, default_value = "")]
        prefix: String,
    },
    /// Run the predictor over strings.
    Trace {
        #[arg(long, required_unless_present = "all")]
        string: Option<String>,
        #[arg(long, conflicts_with = "string")]
        all: bool,
        /// Also write the per-index detail CSV here.
        #[arg(long)]
        detail: Option<PathBuf>,
        /// Resolve ties with a seeded coin (uses --seed).
        #[arg(long)]
        coin: bool,
    },
    /// Run a verification and exit 3 if it fails.
    Verify {
        /// Theorem to verify; only `1` exists.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=1))]
        theorem: Option<u8>,
        /// Other checks.
        #[arg(long, value_enum, conflicts_with = "theorem")]
        check: Option<Check>,
        #[arg(long, default_value_t = 6)]
        gmax: usize,
        /// Monte Carlo verification with this many samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_G_CAP)]
        gcap: usize,
    },
    /// Mean error fraction of the predictor at several lengths.
    Trend {
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_G_CAP)]
        gcap: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    /// Error count between I(x)/(2L) and I(x) for every string.
    Errors,
    /// Uncertain count at most |L_{I(x)}| for every string.
    Uncertainty,
    /// Class counts within the product bounds.
    Counting,
}

/// A command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } | Error::Infeasible(_) => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

macro_rules! via_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

via_error!(std::io::Error, csv::Error, serde_json::Error);

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let workers = cli.global.workers;
    let result = with_workers(workers, || run(&cli)).map_err(Failure::from).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

struct Ctx<'a> {
    g: &'a Global,
    nu: circuit_prior::prior::NuFamily,
}

impl Ctx<'_> {
    fn budget(&self) -> usize {
        self.g.budget.unwrap_or_else(|| default_size_budget(self.g.inputs))
    }

    fn oracle(&self) -> Result<ComplexityOracle, Failure> {
        Ok(ComplexityOracle::new(self.g.inputs, self.budget())?)
    }

    fn catalog(&self) -> Result<Catalog, Failure> {
        Ok(Catalog::new(self.g.inputs, budget_from_env())?)
    }

    fn pattern(&self, s: &str) -> Result<Pattern, Failure> {
        Ok(Pattern::parse_padded(s, self.g.inputs)?)
    }

    fn string(&self, s: &str) -> Result<BitString, Failure> {
        let x: BitString = s.parse()?;
        if x.inputs() != self.g.inputs {
            return Err(Error::InvalidArgument(format!(
                "string {s} has length {}, expected {}",
                x.len(),
                1usize << self.g.inputs
            ))
            .into());
        }
        Ok(x)
    }

    /// Writes a CSV table produced by `write`, converted to JSON if asked.
    fn emit_table(&self, write: impl FnOnce(&mut Vec<u8>) -> circuit_prior::Result<()>) -> Outcome {
        let mut buf = Vec::new();
        write(&mut buf)?;
        if self.g.format == Some(Format::Json) {
            buf = csv_to_json(&buf)?;
        }
        self.emit(&buf)
    }

    fn emit(&self, bytes: &[u8]) -> Outcome {
        match &self.g.out {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }

    fn artifacts(&self, extra: &[&Path]) -> Vec<String> {
        self.g
            .out
            .iter()
            .map(PathBuf::as_path)
            .chain(extra.iter().copied())
            .map(|p| p.display().to_string())
            .collect()
    }

    /// Writes `<out>.manifest.json` beside the main artifact, if any.
    fn manifest(&self, command: &str, config: serde_json::Value, started: Instant, extra: &[&Path]) -> Outcome {
        let Some(out) = &self.g.out else { return Ok(()) };
        let mut path = out.clone().into_os_string();
        path.push(".manifest.json");
        let config = json!({
            "command": command,
            "inputs": self.g.inputs,
            "budget": self.budget(),
            "nu": self.nu.to_string(),
            "enumeration_budget": budget_from_env(),
            "details": config,
        });
        let m = Manifest::new(config, self.g.seed, started.elapsed().as_secs_f64(), self.artifacts(extra));
        m.write(Path::new(&path))?;
        Ok(())
    }
}

fn csv_to_json(bytes: &[u8]) -> circuit_prior::Result<Vec<u8>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let headers = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let obj: serde_json::Map<String, serde_json::Value> =
            headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), json!(v))).collect();
        rows.push(serde_json::Value::Object(obj));
    }
    let mut out = serde_json::to_vec_pretty(&rows)?;
    out.push(b'\n');
    Ok(out)
}

fn verification(passed: bool, what: &str) -> Outcome {
    if passed {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY, message: format!("{what} verification failed") })
    }
}

fn all_strings(inputs: u8) -> Result<Vec<BitString>, Failure> {
    if inputs > 4 {
        return Err(Error::Infeasible(format!("listing all strings needs L <= 4, got {inputs}")).into());
    }
    Ok(BitString::all(inputs).collect())
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let nu = circuit_prior::prior::NuFamily::parse(&g.nu)?;
    circuit_prior::bits::check_inputs(g.inputs)?;
    let ctx = Ctx { g, nu };
    let started = Instant::now();
    match &cli.command {
        Command::Enumerate { gmax, size: None } => {
            let table = ctx.catalog()?.counts(*gmax)?;
            ctx.emit_table(|w| table.write_csv(w))
        }
        Command::Enumerate { size: Some(size), .. } => {
            let classes = enumerate_circuits(g.inputs, *size, budget_from_env())?;
            if classes.truncated() {
                return Err(Error::BudgetExceeded { inputs: g.inputs, size: *size, budget: budget_from_env() }.into());
            }
            ctx.emit_table(|w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["index", "string", "circuit"])?;
                for (i, c) in classes.iter().enumerate() {
                    out.write_record([i.to_string(), c.compute_string().to_string(), c.to_string()])?;
                }
                out.flush()?;
                Ok(())
            })
        }
        Command::Bounds { gmax } => {
            let report = verify_counting_bounds(&[g.inputs], *gmax, budget_from_env())?;
            ctx.emit_table(|w| report.write_csv(w))?;
            ctx.manifest("bounds", json!({ "gmax": gmax }), started, &[])?;
            verification(report.passed(), "counting bound")
        }
        Command::Complexity { pattern, all } => {
            let oracle = ctx.oracle()?;
            if *all {
                let rows = all_strings(g.inputs)?
                    .into_iter()
                    .map(|s| {
                        let x = s.to_pattern();
                        oracle.complexity(&x).map(|r| (x, r))
                    })
                    .collect::<circuit_prior::Result<Vec<_>>>()?;
                return ctx.emit_table(|w| write_complexity_csv(w, &rows));
            }
            let x = ctx.pattern(pattern.as_deref().unwrap_or_default())?;
            let result = oracle.complexity(&x)?;
            if g.format.is_some() {
                ctx.emit_table(|w| write_complexity_csv(w, &[(x, result.clone())]))?;
            } else if let ComplexityResult::Exact { value, witness } = &result {
                ctx.emit(format!("I={value}\n{witness}\n").as_bytes())?;
            }
            match result {
                ComplexityResult::Exact { .. } => Ok(()),
                ComplexityResult::Exceeds { budget } => {
                    Err(Failure { code: EXIT_BUDGET, message: format!("I({x}) > {budget}: budget exceeded") })
                }
            }
        }
        Command::Prior { gmax } => {
            let table = mu_exact(&ctx.nu, &ctx.catalog()?, *gmax)?;
            ctx.emit_table(|w| table.write_csv(w))
        }
        Command::Sample { count, gcap } => {
            use rand::SeedableRng;
            let catalog = ctx.catalog()?;
            let sizes = SizeSampler::new(&ctx.nu, *gcap)?;
            let mut draws = Vec::with_capacity(*count);
            for i in 0..*count as u64 {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(g.seed);
                rng.set_stream(i);
                draws.push(circuit_prior::prior::sample_string(&sizes, &catalog, &mut rng)?);
            }
            ctx.emit_table(|w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["index", "string", "size", "approximate"])?;
                for (i, d) in draws.iter().enumerate() {
                    out.write_record([
                        i.to_string(),
                        d.string.to_string(),
                        d.size.to_string(),
                        (d.approximate as u8).to_string(),
                    ])?;
                }
                out.flush()?;
                Ok(())
            })
        }
        Command::Predict { prefix } => {
            let x = ctx.pattern(prefix)?;
            let pred = mip_predict(&ctx.oracle()?, &x)?;
            match g.format {
                None => ctx.emit(format!("{}\n", pred.set).as_bytes()),
                Some(_) => ctx.emit_table(|w| {
                    let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
                    let mut out = csv::Writer::from_writer(w);
                    out.write_record(["L", "prefix", "pred_set", "I0", "I1", "budget_flag"])?;
                    out.write_record([
                        g.inputs.to_string(),
                        prefix.clone(),
                        pred.set.to_string(),
                        opt(pred.complexities[0]),
                        opt(pred.complexities[1]),
                        (pred.capped as u8).to_string(),
                    ])?;
                    out.flush()?;
                    Ok(())
                }),
            }
        }
        Command::Trace { string, all, detail, coin } => {
            let oracle = ctx.oracle()?;
            let strings = match string {
                Some(s) => vec![ctx.string(s)?],
                None if *all => all_strings(g.inputs)?,
                None => unreachable!("clap requires --string or --all"),
            };
            let tie = if *coin { TieMode::Coin { seed: g.seed } } else { TieMode::Set };
            let traces = circuit_prior::predictor::run_traces(&oracle, &strings, tie)?;
            if let Some(path) = detail {
                let file = std::fs::File::create(path)?;
                write_trace_detail_csv(file, &traces)?;
            }
            ctx.emit_table(|w| write_trace_csv(w, &traces))
        }
        Command::Verify { theorem, check, gmax, samples, gcap } => match (theorem, check) {
            (Some(_), _) => verify_theorem(&ctx, *gmax, *samples, *gcap, started),
            (None, Some(check)) => verify_check(&ctx, *check, *gmax, started),
            (None, None) => Err(Failure {
                code: EXIT_USAGE,
                message: "verify needs --theorem 1 or --check <errors|uncertainty|counting>".into(),
            }),
        },
        Command::Trend { n, samples, gcap } => {
            let config = SamplingConfig { samples: *samples, seed: g.seed, g_cap: *gcap };
            let budget = g.budget;
            let rows = trend_error_fraction(n, &ctx.nu, &config, |l| {
                let oracle = ComplexityOracle::new(l, budget.unwrap_or_else(|| default_size_budget(l)))?;
                Ok((Catalog::new(l, budget_from_env())?, oracle))
            })?;
            ctx.emit_table(|w| write_trend_csv(w, &rows, g.seed))?;
            ctx.manifest("trend", json!({ "n": n, "samples": samples, "g_cap": gcap }), started, &[])
        }
    }
}

fn verify_theorem(ctx: &Ctx, gmax: usize, samples: Option<usize>, gcap: usize, started: Instant) -> Outcome {
    let g = ctx.g;
    let catalog = ctx.catalog()?;
    let oracle = ctx.oracle()?;
    match samples {
        None => {
            let report = verify_theorem1(&ctx.nu, &catalog, &oracle, gmax)?;
            ctx.emit_table(|w| report.write_csv(w))?;
            ctx.manifest("verify-theorem1", json!({ "gmax": gmax }), started, &[])?;
            verification(report.passed(), "theorem 1")
        }
        Some(samples) => {
            let config = SamplingConfig { samples, seed: g.seed, g_cap: gcap };
            let report = verify_theorem1_sampled(&ctx.nu, &catalog, &oracle, &config)?;
            ctx.emit_table(|w| report.write_csv(w))?;
            ctx.manifest("verify-theorem1-sampled", serde_json::to_value(&config)?, started, &[])?;
            verification(report.passed(), "sampled theorem 1")
        }
    }
}

fn verify_check(ctx: &Ctx, check: Check, gmax: usize, started: Instant) -> Outcome {
    let g = ctx.g;
    if check == Check::Counting {
        let report = verify_counting_bounds(&[g.inputs], gmax, budget_from_env())?;
        ctx.emit_table(|w| report.write_csv(w))?;
        ctx.manifest("verify-counting", json!({ "gmax": gmax }), started, &[])?;
        return verification(report.passed(), "counting bound");
    }
    let oracle = ctx.oracle()?;
    let strings = all_strings(g.inputs)?;
    let traces: Vec<TraceSummary> = strings
        .iter()
        .map(|s| run_trace(&oracle, s, TieMode::Set))
        .collect::<circuit_prior::Result<_>>()?;
    let mut passed = true;
    let mut buf = Vec::new();
    {
        let mut out = csv::Writer::from_writer(&mut buf);
        match check {
            Check::Errors => {
                out.write_record([
                    "string", "I", "errors", "upper_ok", "lower_2l", "lower_2l_ok", "lower_measured",
                    "lower_measured_ok", "pass",
                ])?;
                for t in &traces {
                    let r = check_error_bounds(t)?;
                    passed &= r.passed();
                    out.write_record([
                        r.string.to_string(),
                        r.complexity.to_string(),
                        r.errors.to_string(),
                        (r.upper_ok as u8).to_string(),
                        r.lower_2l.to_string(),
                        (r.lower_2l_ok as u8).to_string(),
                        r.lower_measured.to_string(),
                        (r.lower_measured_ok as u8).to_string(),
                        (r.passed() as u8).to_string(),
                    ])
                    ?;
                }
            }
            Check::Uncertainty => {
                let partition = oracle.partition();
                out.write_record(["string", "I", "uncertain", "bound", "pass"])?;
                for t in &traces {
                    let r = check_uncertainty_bound(t, &partition)?;
                    passed &= r.passed();
                    out.write_record([
                        r.string.to_string(),
                        r.complexity.to_string(),
                        r.uncertain.to_string(),
                        r.bound.to_string(),
                        (r.passed() as u8).to_string(),
                    ])
                    ?;
                }
            }
            Check::Counting => unreachable!(),
        }
        out.flush()?;
    }
    ctx.emit_table(|w| {
        w.extend_from_slice(&buf);
        Ok(())
    })?;
    let name = format!("verify-{check:?}").to_lowercase();
    ctx.manifest(&name, json!({}), started, &[])?;
    verification(passed, &name)
}
