//! `polylcm`: exact lcm of polynomial values and the statistics around it.
//!
//! Exit status: 0 when every hard check passes, 1 on a usage or input
//! error, 2 when a hard check fails.

use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use polylcm::alpha::{alpha_for_prime, AlphaResidual, PrimeKind};
use polylcm::experiments::Check;
use polylcm::output::{checkpoint_path, write_config, write_report};
use polylcm::plus::PlusRecord;
use polylcm::poly::{discriminant, irreducibility_screen, Irreducibility};
use polylcm::primes::is_prime_u64;
use polylcm::roots::count_roots_mod_p;
use polylcm::run::{run, Mode, Outcome, RunConfig, RunControl, StatsReport};
use polylcm::sieve::{SieveContext, SieveSettings, DEFAULT_SEGMENT_SIZE};
use polylcm::{Error, IntPolynomial};
use serde_json::json;

#[derive(Parser)]
#[command(name = "polylcm", version, about = "Exact lcm of polynomial values and largest-prime-factor statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ln L_f(N) at each checkpoint and the growth ratio.
    Lcm(RunArgs),
    /// Every statistic with its pass/fail table.
    Verify(RunArgs),
    /// alpha_p(N) by residue counting and by sieving, against N rho(p)/(p-1).
    Alpha(AlphaArgs),
    /// One JSON line per n with the factorization of f(n).
    Factor(FactorArgs),
}

#[derive(Args)]
struct PolyArgs {
    /// Polynomial, e.g. "x^3-x+7" or "[7, -1, 0, 1]" (constant term first).
    #[arg(long)]
    poly: String,
    /// Upper end of the range 1..=N.
    #[arg(long = "N", value_name = "N")]
    n: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// Comma-separated checkpoints; default 1000, 10000, ... below N, and N.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    /// Largest sieved prime; defaults to N.
    #[arg(long = "B", value_name = "B")]
    bound: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_SIZE)]
    segment_size: u64,
    /// Thresholds for P+(f(n)) > delta n ln n; default 1/(2 d^2).
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    /// Run directory for summary.json, config.json, CSVs and the checkpoint.
    #[arg(long, env = "POLYLCM_OUT", default_value = "polylcm-out")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "POLYLCM_WORKERS")]
    workers: Option<usize>,
    /// Seed for root splitting and probable-prime bases.
    #[arg(long)]
    seed: Option<u64>,
    /// Cross-check against an incremental big-integer lcm up to the cap.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 2000)]
    oracle_cap: u64,
    /// Continue from the checkpoint in the run directory.
    #[arg(long)]
    resume: bool,
    /// Stop after this many segments and keep the checkpoint.
    #[arg(long)]
    halt_after_segments: Option<usize>,
    /// Root table cache file, reused when polynomial and bound match.
    #[arg(long)]
    root_cache: Option<PathBuf>,
    /// Permit degree one, where the ratio becomes ln L / N.
    #[arg(long)]
    allow_degree_one: bool,
}

#[derive(Args)]
struct AlphaArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// The prime p <= N.
    #[arg(long)]
    p: u64,
}

#[derive(Args)]
struct FactorArgs {
    #[command(flatten)]
    poly: PolyArgs,
    /// Largest sieved prime; defaults to N.
    #[arg(long = "B", value_name = "B")]
    bound: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_SIZE)]
    segment_size: u64,
}

/// A failed hard check, as opposed to an input error.
struct ChecksFailed;

fn parse_poly(s: &str) -> anyhow::Result<IntPolynomial> {
    let f: IntPolynomial = s.parse()?;
    if f.degree() == 0 {
        return Err(Error::Degree {
            required: 1,
            found: 0,
        })
        .context(format!("{f} is a constant polynomial"));
    }
    Ok(f)
}

fn screen(f: &IntPolynomial) -> anyhow::Result<Irreducibility> {
    let s = irreducibility_screen(f)?;
    if matches!(s, Irreducibility::Unknown) {
        eprintln!("warning: irreducibility of {f} could not be certified");
    }
    Ok(s)
}

fn run_command(args: RunArgs, mode: Mode) -> anyhow::Result<Result<(), ChecksFailed>> {
    let f = parse_poly(&args.poly.poly)?;
    let verdict = screen(&f)?;
    if let Irreducibility::No(w) = &verdict {
        bail!("{f} is reducible (factor {})", w.factor());
    }
    let mut cfg = RunConfig::new(f, args.poly.n);
    cfg.mode = mode;
    if let Some(c) = args.checkpoints {
        cfg.checkpoints = c;
    }
    if let Some(b) = args.bound {
        cfg.bound = b;
    }
    cfg.segment_size = args.segment_size;
    if let Some(d) = args.delta {
        cfg.deltas = d;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.oracle = args.oracle;
    cfg.oracle_cap = args.oracle_cap;
    cfg.allow_degree_one = args.allow_degree_one;
    let cfg = cfg.normalized()?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_config(&args.out, &cfg)?;
    let control = RunControl {
        checkpoint: Some(checkpoint_path(&args.out)),
        resume: args.resume,
        halt_after_segments: args.halt_after_segments,
        root_cache: args.root_cache,
        allow_reducible: false,
    };
    let report = match run(&cfg, &control)? {
        Outcome::Completed(r) => r,
        Outcome::Halted {
            segments_done,
            segments_total,
        } => {
            println!(
                "halted after {segments_done} of {segments_total} segments; resume with --resume --out {}",
                args.out.display()
            );
            return Ok(Ok(()));
        }
    };
    write_report(&args.out, &report)?;
    print_report(&report, mode);
    println!("report written to {}", args.out.display());
    Ok(if report.all_hard_pass() {
        Ok(())
    } else {
        Err(ChecksFailed)
    })
}

fn print_report(r: &StatsReport, mode: Mode) {
    println!("f = {}  (degree {}, disc {})", r.polynomial, r.degree, r.discriminant);
    println!("irreducibility: {}", r.screen);
    println!("{:>12}  {:>20}  {:>10}", "N", "ln L_f(N)", "ratio");
    for s in &r.checkpoints {
        println!("{:>12}  {:>20.6}  {:>10.6}", s.n, s.ln_lcm, s.cilleruelo_ratio);
    }
    if mode == Mode::Verify || !r.checks.is_empty() {
        println!();
        print_checks(&r.checks);
        println!(
            "{} checks, {} hard failures",
            r.checks.len(),
            r.hard_failures
        );
    }
}

fn print_checks(checks: &[Check]) {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    println!("{:<width$}  {:>14}  {:<6}  {:<4}  threshold", "check", "measured", "kind", "");
    for c in checks {
        println!(
            "{:<width$}  {:>14.6}  {:<6}  {:<4}  {}",
            c.name,
            c.measured,
            if c.hard { "hard" } else { "soft" },
            if c.pass { "PASS" } else { "FAIL" },
            c.threshold
        );
    }
}

fn alpha_command(args: AlphaArgs) -> anyhow::Result<Result<(), ChecksFailed>> {
    let f = parse_poly(&args.poly.poly)?;
    let (n, p) = (args.poly.n, args.p);
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p).into());
    }
    if p > n {
        bail!("p = {p} exceeds N = {n}");
    }
    let formula = alpha_for_prime(&f, p, n)?;
    let settings = SieveSettings {
        bound: p,
        ..SieveSettings::new(n)
    };
    let ctx = SieveContext::new(&f, settings)?;
    let sieved: u64 = ctx
        .segments()
        .into_iter()
        .flat_map(|(lo, hi)| ctx.factor_segment(lo, hi))
        .map(|fv| fv.exponent_of(p) as u64)
        .sum();
    let disc = discriminant(&f)?;
    let (kind, rho) = if (f.content() % p) == 0u32.into() {
        (PrimeKind::Content, p as usize)
    } else {
        let kind = if (&disc % p) == 0.into() {
            PrimeKind::Singular
        } else {
            PrimeKind::Regular
        };
        (kind, count_roots_mod_p(&f, p)?)
    };
    let r = AlphaResidual::new(p, kind, formula, rho, f.degree(), &disc, n, 4.0);
    println!("f = {f}, N = {n}, p = {p} ({})", serde_json::to_value(kind)?.as_str().unwrap_or(""));
    println!("alpha (residue counts) = {formula}");
    println!("alpha (sieve)          = {sieved}");
    println!("rho(p)                 = {rho}");
    println!("main term N rho/(p-1)  = {}", r.main_term);
    println!("residual               = {}", r.residual);
    match kind {
        PrimeKind::Regular => println!("bound 4 d ln N / ln p  = {}", r.bound),
        PrimeKind::Singular => println!("bound 2 d disc^2 N / p = {}", r.bound),
        PrimeKind::Content => println!("p divides every coefficient; no bound applies"),
    }
    println!("{}", if r.pass { "PASS" } else { "FAIL" });
    Ok(if formula == sieved && r.pass {
        Ok(())
    } else {
        Err(ChecksFailed)
    })
}

fn factor_command(args: FactorArgs) -> anyhow::Result<Result<(), ChecksFailed>> {
    let f = parse_poly(&args.poly.poly)?;
    let n = args.poly.n;
    let bound = args.bound.unwrap_or(n);
    let settings = SieveSettings {
        bound,
        segment_size: args.segment_size,
        ..SieveSettings::new(n)
    };
    let ctx = SieveContext::new(&f, settings)?;
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (lo, hi) in ctx.segments() {
        for fv in ctx.factor_segment(lo, hi) {
            let rec = PlusRecord::new(&fv, bound);
            let mut line = json!({
                "n": fv.n,
                "factors": fv.small_factors,
                "cofactor": fv.cofactor.to_string(),
                "cofactor_class": fv.cofactor_class,
                "p_plus": rec.p_plus.as_ref().map(|p| p.to_string()),
                "p_plus_lower": rec.p_plus_lower.to_string(),
                "p_plus_upper": rec.p_plus_upper.to_string(),
            });
            if bound >= n {
                line["p_plus_exceeds_n"] = json!(rec.exceeds_n);
            }
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(Ok(()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Lcm(a) => run_command(a, Mode::Lcm),
        Command::Verify(a) => run_command(a, Mode::Verify),
        Command::Alpha(a) => alpha_command(a),
        Command::Factor(a) => factor_command(a),
    };
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(ChecksFailed)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
