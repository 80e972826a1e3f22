//! `wbt` — evaluate and verify the weighted prime-sum machinery.
//!
//! Every subcommand prints one machine-readable JSON document to stdout (or
//! `--out PATH`) and a human summary to stderr. Exit codes: 0 all verdicts
//! true, 1 some check failed or was inconclusive, 2 usage error, 3 resource
//! budget exceeded.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wbt_core::arith::ArithTable;
use wbt_core::campaign::{self, CampaignConfig};
use wbt_core::constants;
use wbt_core::primes::{self, CorpusCase};
use wbt_core::sieve::{self, SieveParams};
use wbt_core::weights::{Decimal, Shape};
use wbt_core::{BoundReport, ConstantsReport, Error};

#[derive(Parser)]
#[command(
    name = "wbt",
    version,
    about = "Weighted Brun-Titchmarsh verification toolkit"
)]
struct Cli {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Desk-scale defaults (the default).
    #[arg(long, global = true, conflicts_with = "full")]
    quick: bool,

    /// Full-scale defaults; sweeps run to 2e9 and constants use deep cutoffs.
    #[arg(long, global = true)]
    full: bool,

    /// Worker threads (default: all cores). Results are identical for any
    /// thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomized corpus generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Resume a sweep from the last record of this checkpoint file.
    #[arg(long, global = true)]
    resume: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate μ, φ, σ, ω over [lo, hi] and print a summary.
    Tabulate {
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        /// Entries per sieve segment.
        #[arg(long)]
        segment_length: Option<usize>,
        /// Also write the binary table dump (see README for the format).
        #[arg(long)]
        bin: Option<PathBuf>,
    },
    /// The sieve sums S_k(z) and H_k(z), optionally with the minimizing
    /// weights' identity checks.
    SieveSums {
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long)]
        z: u64,
        /// Also compute the weights and verify their two identities.
        #[arg(long)]
        with_weights: bool,
    },
    /// Evaluate and check every explicit constant.
    Constants {
        /// All groups (the default when no group flag is given).
        #[arg(long)]
        all: bool,
        #[arg(long)]
        zeta: bool,
        #[arg(long)]
        products: bool,
        #[arg(long)]
        const_a: bool,
        #[arg(long)]
        elementary: bool,
    },
    /// Verify |Q(z) − (6/π²)z| ≤ 0.68√z for every integer z ≤ z_max.
    VerifyQ {
        #[arg(long, default_value_t = 1_000_000)]
        z_max: u64,
    },
    /// Verify |H₁(z) − (15/π²)z| ≤ 47√z for every integer z ≤ z_max.
    VerifyH {
        #[arg(long, default_value_t = 1_000_000)]
        z_max: u64,
    },
    /// Evaluate S₁ against log z + B at sample points (judged for z ≥ 1e9).
    VerifyS {
        /// Comma-separated z samples (defaults depend on --quick/--full).
        #[arg(long, value_delimiter = ',')]
        samples: Option<Vec<u64>>,
        /// Prime cutoff for the constant B (default 1e6 quick, 1e8 full).
        #[arg(long)]
        prime_cutoff: Option<u64>,
    },
    /// The sweep: test-inequality for z in [z_min, z_max), Y in {4z², 4(z+1)²}.
    VerifyTest {
        #[arg(long)]
        z_min: Option<u64>,
        #[arg(long)]
        z_max: Option<u64>,
        /// Checkpoint spacing in z (rounded up to whole blocks).
        #[arg(long)]
        stride: Option<u64>,
        /// Append checkpoint JSON lines to this file.
        #[arg(long)]
        checkpoints: Option<PathBuf>,
        /// Recompute state from scratch at every checkpoint and compare.
        #[arg(long)]
        validate: bool,
    },
    /// Both progression bounds for one weight on [x, x+y].
    Theorem4 {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        l: u64,
    },
    /// The progression-free bound for one weight on [x, x+y].
    Theorem5 {
        #[command(flatten)]
        weight: WeightArgs,
    },
    /// Check the theorem bounds over a corpus of cases.
    Corpus(CorpusArgs),
}

/// A weight function: either a builtin shape sampled over [x, x+y], or a
/// `t value`-per-line text file.
#[derive(Args)]
struct WeightArgs {
    #[arg(long, requires = "x", requires = "y")]
    shape: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    resolution: Option<u32>,
    /// Custom piecewise-linear weight, one `t value` pair per line.
    #[arg(long, conflicts_with_all = ["shape", "x", "y", "resolution"])]
    weight_file: Option<PathBuf>,
}

impl WeightArgs {
    fn load(&self) -> Result<(wbt_core::WeightFunction, (u64, u64), serde_json::Value), Error> {
        if let Some(path) = &self.weight_file {
            let f = wbt_core::WeightFunction::parse(&std::fs::read_to_string(path)?)?
                .scale(self.scale)?;
            let span = primes::domain_span(&f);
            let params = serde_json::json!({
                "weight_file": path.display().to_string(),
                "scale": self.scale,
            });
            return Ok((f, span, params));
        }
        match (&self.shape, &self.x, &self.y) {
            (Some(shape), Some(x), Some(y)) => {
                let case = build_case(shape, x, y, 1, 0, self.scale, self.resolution)?;
                let f = case.weight()?;
                let span = case.span()?;
                let params = serde_json::json!({
                    "shape": case.shape.as_str(),
                    "x": case.x.to_f64(),
                    "y": case.y.to_f64(),
                    "scale": case.scale,
                    "resolution": case.resolution,
                });
                Ok((f, span, params))
            }
            _ => Err(Error::Precondition(
                "provide either --shape with --x/--y, or --weight-file".into(),
            )),
        }
    }
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus file (`shape kmod lres x y scale resolution` per line);
    /// defaults to the builtin grid.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Append this many seeded random cases.
    #[arg(long, default_value_t = 0)]
    random_cases: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("wbt: could not configure {threads} worker threads");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("wbt: error: {e}");
            let code = match e {
                Error::Resource(_) => 3,
                Error::Precondition(_) | Error::Domain(_) | Error::Parse(_) => 2,
                Error::Range(_) => 2,
                Error::Io(_) => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    match &cli.command {
        Command::Tabulate {
            lo,
            hi,
            segment_length,
            bin,
        } => {
            let table = match segment_length {
                Some(len) => ArithTable::tabulate_with(
                    *lo,
                    *hi,
                    *len,
                    wbt_core::arith::DEFAULT_TABLE_BUDGET,
                )?,
                None => ArithTable::tabulate(*lo, *hi)?,
            };
            if let Some(path) = bin {
                let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                table.write_binary(&mut w)?;
                w.flush()?;
            }
            let summary = table.summary();
            eprintln!(
                "tabulated [{}, {}]: {} primes, {} squarefree",
                summary.lo, summary.hi, summary.primes, summary.squarefree
            );
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "tabulate", "summary": summary }),
            )?;
            Ok(true)
        }

        Command::SieveSums { k, z, with_weights } => {
            let table = ArithTable::tabulate(1, *z)?;
            let params = SieveParams::new(*k, 1, *z)?;
            let s = sieve::s_sum(&params, &table)?;
            let h = sieve::h_sum(&params, &table)?;
            let mut payload = serde_json::json!({
                "schema": 1,
                "command": "sieve-sums",
                "k": k,
                "z": z,
                "S": s,
                "H": h,
            });
            eprintln!("S_{k}({z}) = {s:.12}, H_{k}({z}) = {h:.12}");
            let mut ok = true;
            if *with_weights {
                let w = sieve::selberg_weights(&params, &table)?;
                let qf = w.quadratic_form();
                let abs = w.abs_sum();
                let qf_ok = (qf - 1.0 / s).abs() <= 1e-10 / s;
                let abs_ok = (abs - h / s).abs() <= 1e-10 * (h / s);
                ok = qf_ok && abs_ok && w.max_abs() <= 1.0 + 1e-12;
                payload["weights"] = serde_json::json!({
                    "support": w.len(),
                    "quadratic_form": qf,
                    "quadratic_form_expected": 1.0 / s,
                    "abs_sum": abs,
                    "abs_sum_expected": h / s,
                    "max_abs": w.max_abs(),
                    "identities_hold": ok,
                });
                eprintln!("weights: support {}, identities hold: {}", w.len(), ok);
            }
            emit(cli, payload)?;
            Ok(ok)
        }

        Command::Constants {
            all,
            zeta,
            products,
            const_a,
            elementary,
        } => {
            let none_selected = !(*zeta || *products || *const_a || *elementary);
            let everything = *all || none_selected;
            let mut reports: Vec<ConstantsReport> = Vec::new();
            if everything || *zeta {
                reports.extend(constants::zeta_constants());
            }
            if everything || *products {
                reports.extend(constants::lemma6_constants()?);
                reports.extend(constants::lemma7_constants()?);
            }
            if everything || *const_a {
                reports.extend(constants::constant_a()?);
            }
            if everything || *elementary {
                reports.extend(constants::elementary_inequalities());
            }
            let ok = reports.iter().all(|r| r.verdict);
            for r in &reports {
                summarize_constant(r);
            }
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "constants", "reports": reports }),
            )?;
            Ok(ok)
        }

        Command::VerifyQ { z_max } => {
            let report = wbt_core::arith::squarefree_error_sweep(*z_max)?;
            summarize_bound(&report);
            let ok = report.passed();
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "verify-q", "report": report }),
            )?;
            Ok(ok)
        }

        Command::VerifyH { z_max } => {
            let report = constants::h_asymptotic_sweep(*z_max)?;
            summarize_bound(&report);
            let ok = report.passed();
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "verify-h", "report": report }),
            )?;
            Ok(ok)
        }

        Command::VerifyS {
            samples,
            prime_cutoff,
        } => {
            let cutoff = prime_cutoff.unwrap_or(if cli.full { 100_000_000 } else { 1_000_000 });
            let default_samples: Vec<u64> = if cli.full {
                vec![
                    1_000,
                    10_000,
                    100_000,
                    1_000_000,
                    10_000_000,
                    100_000_000,
                    1_000_000_000,
                ]
            } else {
                vec![1_000, 10_000, 100_000, 1_000_000]
            };
            let samples = samples.clone().unwrap_or(default_samples);
            let result = constants::s_asymptotic(&samples, cutoff)?;
            eprintln!(
                "B = {:.9} (tail ≤ {:.3e}); floor constant {:.4} ≥ 1.32: {}",
                result.b,
                result.b_tail,
                result.floor_constant.computed,
                result.floor_constant.verdict
            );
            for r in &result.residuals {
                eprintln!(
                    "  z={}: S₁={:.9}, residual {:+.3e}{}",
                    r.z,
                    r.s1,
                    r.residual,
                    if r.checked {
                        " (judged)"
                    } else {
                        " (informational)"
                    }
                );
            }
            let ok = result.verdict;
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "verify-s", "result": result }),
            )?;
            Ok(ok)
        }

        Command::VerifyTest {
            z_min,
            z_max,
            stride,
            checkpoints,
            validate,
        } => {
            let base = if cli.full {
                CampaignConfig::full()
            } else {
                CampaignConfig::quick()
            };
            let cfg = CampaignConfig {
                z_min: z_min.unwrap_or(base.z_min),
                z_max: z_max.unwrap_or(base.z_max),
                checkpoint_stride: stride.unwrap_or(base.checkpoint_stride),
                checkpoint_path: checkpoints.clone(),
                resume_from: cli.resume.clone(),
                validate_checkpoints: *validate,
            };
            let report = campaign::run_campaign(&cfg)?;
            eprintln!(
                "sweep z in [{}, {}): {} checks, {} passed, {} failed, {} inconclusive; min margin {:?} at z={:?}; verdict {}",
                report.z_min,
                report.z_max,
                report.checks,
                report.passed,
                report.failed,
                report.inconclusive,
                report.min_margin,
                report.argmin_z,
                report.verdict
            );
            let ok = report.verdict;
            emit(
                cli,
                serde_json::to_value(&report).expect("report serializes"),
            )?;
            Ok(ok)
        }

        Command::Theorem4 { weight, k, l } => {
            let (f, span, mut params) = weight.load()?;
            params["k"] = serde_json::json!(k);
            params["l"] = serde_json::json!(l);
            let reports: Vec<BoundReport> = primes::theorem_reports(&f, span, *k, *l, params)?
                .into_iter()
                .filter(|r| r.label.starts_with("theorem4"))
                .collect();
            let ok = reports.iter().all(|r| !r.counts_against_verdict());
            for r in &reports {
                summarize_bound(r);
            }
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "theorem4", "reports": reports }),
            )?;
            Ok(ok)
        }

        Command::Theorem5 { weight } => {
            let (f, span, params) = weight.load()?;
            let reports: Vec<BoundReport> = primes::theorem_reports(&f, span, 1, 0, params)?
                .into_iter()
                .filter(|r| r.label.starts_with("theorem5"))
                .collect();
            let ok = reports.iter().all(|r| !r.counts_against_verdict());
            for r in &reports {
                summarize_bound(r);
            }
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "theorem5", "reports": reports }),
            )?;
            Ok(ok)
        }

        Command::Corpus(args) => {
            let mut cases = match &args.file {
                Some(path) => primes::parse_corpus(&std::fs::read_to_string(path)?)?,
                None => primes::builtin_corpus(),
            };
            cases.extend(random_cases(cli.seed, args.random_cases));
            let reports = primes::theorem_corpus_check(&cases)?;
            let ok = reports.iter().all(|r| !r.counts_against_verdict());
            let applicable = reports
                .iter()
                .filter(|r| r.status != wbt_core::CheckStatus::Inapplicable)
                .count();
            eprintln!(
                "corpus: {} cases, {} checks ({} applicable), all hold: {}",
                cases.len(),
                reports.len(),
                applicable,
                ok
            );
            emit(
                cli,
                serde_json::json!({ "schema": 1, "command": "corpus", "reports": reports }),
            )?;
            Ok(ok)
        }
    }
}

fn build_case(
    shape: &str,
    x: &str,
    y: &str,
    k: u64,
    l: u64,
    scale: f64,
    resolution: Option<u32>,
) -> Result<CorpusCase, Error> {
    let shape: Shape = shape.parse()?;
    let resolution = resolution.unwrap_or(match shape {
        Shape::Constant | Shape::LinearRamp => 1,
        Shape::Hat => 2,
        Shape::SmoothBumpApprox => 64,
    });
    Ok(CorpusCase {
        shape,
        k,
        l,
        x: Decimal::parse(x)?,
        y: Decimal::parse(y)?,
        scale,
        resolution,
    })
}

fn random_cases(seed: u64, count: u32) -> Vec<CorpusCase> {
    let shapes = [
        (Shape::Constant, 1u32),
        (Shape::LinearRamp, 1),
        (Shape::Hat, 2),
        (Shape::SmoothBumpApprox, 64),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (shape, resolution) = shapes[rng.gen_range(0..shapes.len())];
            let k = rng.gen_range(1..=12u64);
            let l = loop {
                let l = rng.gen_range(0..k);
                if wbt_core::gcd(l, k) == 1 {
                    break l;
                }
            };
            CorpusCase {
                shape,
                k,
                l,
                x: Decimal::from_u64(rng.gen_range(0..1_000_000_000u64)),
                y: Decimal::from_u64(rng.gen_range(1_000..=100_000u64)),
                scale: rng.gen_range(0.1..10.0),
                resolution,
            }
        })
        .collect()
}

fn summarize_constant(r: &ConstantsReport) {
    match r.paper_bound {
        Some(bound) => eprintln!(
            "{}: {:.9} vs {} — {}",
            r.name,
            r.computed,
            bound,
            if r.verdict { "ok" } else { "VIOLATED" }
        ),
        None => eprintln!("{}: {:.9}", r.name, r.computed),
    }
}

fn summarize_bound(r: &BoundReport) {
    eprintln!(
        "{}: lhs={:?} rhs={:.6} margin={:?} status={:?}",
        r.label, r.lhs, r.rhs, r.margin, r.status
    );
}

fn emit(cli: &Cli, value: serde_json::Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(&value).expect("reports serialize");
    match &cli.out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n"))?;
        }
        None => println!("{text}"),
    }
    Ok(())
}
