//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every measured value is checked against an oracle written here
//! from scratch (trial division, direct residue loops, big-integer lcm).

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use polylcm::alpha::alpha_exponents;
use polylcm::experiments::{
    chebotarev_sum, cilleruelo_ratio, density_p_plus, exceptional_set_report, granville_density,
    multiplicity_check, psi_baseline, window_start,
};
use polylcm::roots::rho;
use polylcm::run::{run, Outcome, RunConfig, RunControl, StatsReport};
use polylcm::sieve::{exponent_map, sieve_factorizations, DEFAULT_SEGMENT_SIZE};
use polylcm::IntPolynomial;

const EXACTNESS_N: u64 = 2000;
const EXACTNESS_REL_TOL: f64 = 1e-9;
const EXACTNESS_LIMIT: Duration = Duration::from_secs(60);
const RESIDUAL_N: u64 = 10_000;
const RESIDUAL_CONSTANT: f64 = 4.0;
const RESIDUAL_LIMIT: Duration = Duration::from_secs(300);
const WINDOW_N: u64 = 10_000;
const DENSITY_SLACK: f64 = 0.05;
const FROZEN_DENSITY: [(&str, u64); 2] = [("x^2+1", 7915), ("x^3-x+7", 9723)];
const CHEBOTAREV_CHECKPOINTS: [u64; 3] = [1_000, 10_000, 100_000];
const CHEBOTAREV_MAX: f64 = 5.0;
const CHEBOTAREV_DRIFT: f64 = 1.0;
const CHEBOTAREV_LIMIT: Duration = Duration::from_secs(120);
const CILLERUELO_BAND: (f64, f64) = (0.7, 1.05);
const GRANVILLE_DELTA: f64 = 0.125;
const GRANVILLE_MIN: f64 = 0.02;
const EXCEPTIONAL_SLACK: f64 = 0.05;
const PSI_N: u64 = 100_000;
const PSI_BAND: (f64, f64) = (0.98, 1.02);
const PSI_REL_TOL: f64 = 1e-12;
const RESUME_N: u64 = 10_000;

const TEST_POLYS: [&str; 2] = ["x^2+1", "x^3-x+7"];

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn poly(s: &str) -> IntPolynomial {
    s.parse().expect("test polynomial parses")
}

fn primes(limit: u64) -> Vec<u64> {
    (2..=limit)
        .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

/// Trial division of `|v|` by `ps`: exponents and what is left.
fn trial_divide(v: &BigUint, ps: &[u64]) -> (Vec<(u64, u32)>, BigUint) {
    let mut rest = v.clone();
    let mut out = Vec::new();
    for &p in ps {
        let mut e = 0;
        while !rest.is_zero() && (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    (out, rest)
}

fn value(f: &IntPolynomial, n: u64) -> BigUint {
    f.eval_u64(n).magnitude().clone()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn exactness_oracle() -> Verdict {
    let start = Instant::now();
    let ps = primes(EXACTNESS_N);
    let mut worst = 0.0f64;
    for s in ["x^2+1", "x^3-x+7", "x^4+x+1"] {
        let f = poly(s);
        let stream = sieve_factorizations(&f, EXACTNESS_N, EXACTNESS_N, DEFAULT_SEGMENT_SIZE)
            .map_err(|e| e.to_string())?;
        let mut seen = 0;
        for fv in stream {
            seen += 1;
            let (factors, rest) = trial_divide(&value(&f, fv.n), &ps);
            ensure(fv.small_factors == factors && fv.cofactor == rest, || {
                format!("{s}: n = {} sieve {:?}/{} vs trial {factors:?}/{rest}", fv.n, fv.small_factors, fv.cofactor)
            })?;
        }
        ensure(seen == EXACTNESS_N, || format!("{s}: {seen} values"))?;
        let slow = (1..=EXACTNESS_N).fold(BigUint::one(), |acc, n| acc.lcm(&value(&f, n)));
        let map = exponent_map(&f, EXACTNESS_N).map_err(|e| e.to_string())?;
        ensure(map.lcm_value() == slow, || format!("{s}: exact lcm differs"))?;
        let ln_slow = ln_big(&slow);
        let rel = (map.ln_lcm() - ln_slow).abs() / ln_slow;
        ensure(rel <= EXACTNESS_REL_TOL, || format!("{s}: rel error {rel:e}"))?;
        worst = worst.max(rel);
    }
    within(EXACTNESS_LIMIT, start)?;
    Ok(format!("3 polys x {EXACTNESS_N} values match trial division; worst ln L rel error {worst:.1e}"))
}

fn ln_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    let shift = bits.saturating_sub(64);
    let top = (v >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn hand_pinned() -> Verdict {
    let f = poly("x^2+1");
    let map = exponent_map(&f, 5).map_err(|e| e.to_string())?;
    // 2 * 5 * 10 * 17 * 26 -> lcm 2 * 5 * 13 * 17
    ensure(map.lcm_value() == BigUint::from(2210u32), || format!("L(5) = {}", map.lcm_value()))?;
    let alpha = alpha_exponents(&f, 10).map_err(|e| e.to_string())?;
    ensure(alpha.get(&5) == Some(&5), || format!("alpha_5(10) = {:?}", alpha.get(&5)))?;
    let sieved = exponent_map(&f, 10).map_err(|e| e.to_string())?;
    ensure(sieved.alpha.get(&5) == Some(&5), || format!("sieved alpha_5(10) = {:?}", sieved.alpha.get(&5)))?;
    let r5 = rho(&f, 5, 1).map_err(|e| e.to_string())?;
    let r25 = rho(&f, 5, 2).map_err(|e| e.to_string())?;
    let brute = |m: u64| (0..m).filter(|x| (x * x + 1) % m == 0).count();
    ensure(r5 == 2 && r25 == 2 && brute(5) == 2 && brute(25) == 2, || {
        format!("rho(5) = {r5}, rho(25) = {r25}")
    })?;
    Ok("L(5) = 2210, alpha_5(10) = 5, rho(5) = rho(25) = 2".into())
}

fn alpha_residual_bounds() -> Verdict {
    let start = Instant::now();
    let f = poly("x^2+1");
    let n = RESIDUAL_N;
    let d = 2.0;
    let disc = 4u64;
    let formula = alpha_exponents(&f, n).map_err(|e| e.to_string())?;
    let sieved = exponent_map(&f, n).map_err(|e| e.to_string())?.alpha;
    let mut worst = 0.0f64;
    for p in primes(n) {
        // direct count of sum_k #{m <= N : p^k | m^2 + 1}
        let mut direct = 0u64;
        let mut pk = p as u128;
        loop {
            let c = (1..=n as u128).filter(|m| (m * m + 1) % pk == 0).count() as u64;
            if c == 0 {
                break;
            }
            direct += c;
            pk *= p as u128;
        }
        let got = formula.get(&p).copied().unwrap_or(0);
        let sv = sieved.get(&p).copied().unwrap_or(0);
        ensure(got == direct && sv == direct, || format!("p = {p}: formula {got}, sieve {sv}, direct {direct}"))?;
        let rho_p = (0..p).filter(|x| (x * x + 1) % p == 0).count() as f64;
        if disc.is_multiple_of(p) {
            let bound = 2.0 * d * (disc * disc) as f64 * n as f64 / p as f64;
            ensure(direct as f64 <= bound, || format!("singular p = {p}: {direct} > {bound}"))?;
        } else {
            let residual = (direct as f64 - n as f64 * rho_p / (p - 1) as f64).abs();
            let bound = RESIDUAL_CONSTANT * d * (n as f64).ln() / (p as f64).ln();
            ensure(residual <= bound, || format!("p = {p}: residual {residual} > {bound}"))?;
            worst = worst.max(residual / bound);
        }
    }
    within(RESIDUAL_LIMIT, start)?;
    Ok(format!("N = {n}: all primes within bound; worst |residual| / bound = {worst:.3}"))
}

/// `P^+(f(n))` for `x^2 + 1` by trial division up to the square root.
fn largest_prime_factor(v: u64) -> u64 {
    let mut v = v;
    let mut best = 1;
    let mut p = 2;
    while p * p <= v {
        while v.is_multiple_of(p) {
            v /= p;
            best = p;
        }
        p += 1;
    }
    if v > 1 {
        v
    } else {
        best
    }
}

fn multiplicity() -> Verdict {
    let mut parts = Vec::new();
    for s in TEST_POLYS {
        let f = poly(s);
        let d = f.degree() as u64;
        let m = multiplicity_check(&f, WINDOW_N).map_err(|e| e.to_string())?;
        ensure(m.exact, || format!("{s}: grouping not exact"))?;
        ensure(m.max_multiplicity <= d, || format!("{s}: multiplicity {} > {d}", m.max_multiplicity))?;
        ensure(m.partition_sum == m.members, || format!("{s}: partition {} != {}", m.partition_sum, m.members))?;
        parts.push(format!("{s}: {} <= {d}", m.max_multiplicity));
    }
    let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
    for n in window_start(WINDOW_N) + 1..=WINDOW_N {
        let q = largest_prime_factor(n * n + 1);
        if q > n {
            *groups.entry(q).or_default() += 1;
        }
    }
    let oracle_max = groups.values().copied().max().unwrap_or(0);
    let lib = multiplicity_check(&poly("x^2+1"), WINDOW_N).map_err(|e| e.to_string())?;
    ensure(lib.max_multiplicity == oracle_max && lib.distinct_primes == groups.len() as u64, || {
        format!("x^2+1 oracle max {oracle_max}, {} groups", groups.len())
    })?;
    Ok(format!("N = {WINDOW_N}, {}", parts.join(", ")))
}

/// Whether `|f(n)|` has a prime factor above `n`, by stripping primes up to `n`.
fn plus_exceeds(f: &IntPolynomial, n: u64, ps: &[u64]) -> bool {
    let mut v = value(f, n).to_u128().expect("values fit in u128");
    for &p in ps.iter().take_while(|&&p| p <= n) {
        let p = p as u128;
        while v.is_multiple_of(p) {
            v /= p;
        }
        if v == 1 {
            return false;
        }
    }
    v > 1
}

fn density() -> Verdict {
    let ps = primes(WINDOW_N);
    let mut parts = Vec::new();
    for (s, frozen) in FROZEN_DENSITY {
        let f = poly(s);
        let d = f.degree() as f64;
        let frac = density_p_plus(&f, WINDOW_N).map_err(|e| e.to_string())?;
        let oracle = (1..=WINDOW_N).filter(|&n| plus_exceeds(&f, n, &ps)).count() as u64;
        ensure(frac.numerator == oracle, || format!("{s}: {} vs oracle {oracle}", frac.numerator))?;
        ensure(frac.numerator == frozen, || format!("{s}: {} vs frozen {frozen}", frac.numerator))?;
        let need = 1.0 - 1.0 / d - DENSITY_SLACK;
        ensure(frac.value >= need, || format!("{s}: {} < {need}", frac.value))?;
        parts.push(format!("{s}: {}/{} >= {need:.3}", frac.numerator, frac.denominator));
    }
    Ok(parts.join(", "))
}

fn chebotarev() -> Verdict {
    let start = Instant::now();
    let f = poly("x^2+1");
    let points = chebotarev_sum(&f, &CHEBOTAREV_CHECKPOINTS).map_err(|e| e.to_string())?;
    // rho(p) = 1 + (-1 / p) for odd p, rho(2) = 1
    let ps = primes(*CHEBOTAREV_CHECKPOINTS.last().unwrap());
    let mut max_dev = 0.0f64;
    let mut devs = Vec::new();
    let mut sums = Vec::new();
    for pt in &points {
        let oracle: f64 = ps
            .iter()
            .take_while(|&&p| p <= pt.n)
            .map(|&p| {
                let r = if p == 2 { 1.0 } else if p % 4 == 1 { 2.0 } else { 0.0 };
                r * (p as f64).ln() / (p - 1) as f64
            })
            .sum();
        ensure((pt.sum - oracle).abs() < 1e-9, || format!("S({}) = {} vs oracle {oracle}", pt.n, pt.sum))?;
        let dev = oracle - (pt.n as f64).ln();
        max_dev = max_dev.max(dev.abs());
        devs.push(dev);
        sums.push(oracle);
    }
    ensure(max_dev <= CHEBOTAREV_MAX, || format!("max deviation {max_dev}"))?;
    // S(N) itself grows like ln N; the bounded quantity is S(N) - ln N
    let drift = (devs[2] - devs[1]).abs();
    ensure(drift <= CHEBOTAREV_DRIFT, || format!("drift {drift}"))?;
    within(CHEBOTAREV_LIMIT, start)?;
    Ok(format!(
        "max |S(N) - ln N| = {max_dev:.4}, drift of S(N) - ln N from 1e4 to 1e5 = {drift:.4} (raw S(1e5) - S(1e4) = {:.4})",
        sums[2] - sums[1]
    ))
}

fn cilleruelo() -> Verdict {
    let f = poly("x^2+1");
    let r = cilleruelo_ratio(&f, 100_000, &[1_000, 100_000]).map_err(|e| e.to_string())?;
    let (lo, hi) = (r[0].1, r[1].1);
    ensure(CILLERUELO_BAND.0 <= hi && hi <= CILLERUELO_BAND.1, || format!("ratio(1e5) = {hi}"))?;
    ensure((hi - 1.0).abs() < (lo - 1.0).abs(), || format!("ratio(1e5) = {hi} not closer than {lo}"))?;
    let cubic = cilleruelo_ratio(&poly("x^3-x+7"), 10_000, &[10_000]).map_err(|e| e.to_string())?;
    Ok(format!(
        "d = 2: ratio(1e3) = {lo:.4}, ratio(1e5) = {hi:.4}; d = 3 reported: ratio(1e4) = {:.4}",
        cubic[0].1
    ))
}

fn granville() -> Verdict {
    let f = poly("x^2+1");
    let g = granville_density(&f, WINDOW_N, GRANVILLE_DELTA).map_err(|e| e.to_string())?;
    let lo = window_start(WINDOW_N);
    let oracle = (lo + 1..=WINDOW_N)
        .filter(|&n| largest_prime_factor(n * n + 1) as f64 > GRANVILLE_DELTA * n as f64 * (n as f64).ln())
        .count() as u64;
    ensure(g.definite.numerator == oracle && g.indeterminate == 0, || {
        format!("definite {} (+{} open) vs oracle {oracle}", g.definite.numerator, g.indeterminate)
    })?;
    ensure(g.definite.value > GRANVILLE_MIN, || format!("fraction {}", g.definite.value))?;
    Ok(format!("delta = 1/8: {}/{} = {:.4} > {GRANVILLE_MIN}", g.definite.numerator, g.definite.denominator, g.definite.value))
}

fn exceptional() -> Verdict {
    let ps = primes(WINDOW_N);
    let mut parts = Vec::new();
    for s in TEST_POLYS {
        let f = poly(s);
        let d = f.degree() as f64;
        let rep = exceptional_set_report(&f, WINDOW_N).map_err(|e| e.to_string())?;
        let lo = window_start(WINDOW_N);
        let members: Vec<u64> = (lo + 1..=WINDOW_N).filter(|&n| !plus_exceeds(&f, n, &ps)).collect();
        ensure(rep.exceptional == members.len() as u64, || {
            format!("{s}: #E = {} vs oracle {}", rep.exceptional, members.len())
        })?;
        let frac = members.len() as f64 / WINDOW_N as f64;
        let need = 1.0 / d + EXCEPTIONAL_SLACK;
        ensure(frac <= need, || format!("{s}: #E/N = {frac} > {need}"))?;
        // Q divides prod f(n) exactly: compare exponents prime by prime
        let mut gamma: BTreeMap<u64, u64> = BTreeMap::new();
        for &n in &members {
            let (fs, rest) = trial_divide(&value(&f, n), &ps);
            ensure(rest.is_one(), || format!("{s}: f({n}) not N-smooth"))?;
            for (p, e) in fs {
                *gamma.entry(p).or_default() += e as u64;
            }
        }
        let alpha = alpha_exponents(&f, WINDOW_N).map_err(|e| e.to_string())?;
        let bad = gamma.iter().find(|(p, &g)| alpha.get(p).copied().unwrap_or(0) < g);
        ensure(bad.is_none(), || format!("{s}: gamma_p > alpha_p at {bad:?}"))?;
        ensure(rep.gamma_le_alpha && rep.ln_q_direct <= rep.ln_alpha_bound, || {
            format!("{s}: ln Q = {} vs {}", rep.ln_q_direct, rep.ln_alpha_bound)
        })?;
        parts.push(format!("{s}: #E/N = {frac:.4} <= {need:.3}"));
    }
    Ok(parts.join(", "))
}

fn psi() -> Verdict {
    let b = psi_baseline(PSI_N);
    ensure(b.exact_match, || "two computations differ".into())?;
    let oracle: f64 = primes(PSI_N)
        .iter()
        .map(|&p| {
            let mut k = 0;
            let mut q = p;
            while q <= PSI_N {
                k += 1;
                q = q.saturating_mul(p);
            }
            k as f64 * (p as f64).ln()
        })
        .sum();
    ensure((b.psi - oracle).abs() <= PSI_REL_TOL * oracle, || format!("psi {} vs oracle {oracle}", b.psi))?;
    ensure(PSI_BAND.0 <= b.ratio && b.ratio <= PSI_BAND.1, || format!("psi/N = {}", b.ratio))?;
    Ok(format!("psi(1e5) = {:.4}, psi/N = {:.5}", b.psi, b.ratio))
}

fn completed(o: Outcome) -> Result<StatsReport, String> {
    match o {
        Outcome::Completed(r) => Ok(*r),
        Outcome::Halted { .. } => Err("run halted unexpectedly".into()),
    }
}

fn resume() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = RunConfig::new(poly("x^2+1"), RESUME_N);
    cfg.segment_size = 512;
    cfg.workers = 2;
    let whole = completed(run(&cfg, &RunControl::default()).map_err(|e| e.to_string())?)?;
    let mut control = RunControl {
        checkpoint: Some(dir.path().join("state.json")),
        resume: true,
        halt_after_segments: Some(5),
        ..Default::default()
    };
    let first = run(&cfg, &control).map_err(|e| e.to_string())?;
    let total = match first {
        Outcome::Halted { segments_done, segments_total } => {
            ensure(segments_done == 5, || format!("halted after {segments_done}"))?;
            segments_total
        }
        Outcome::Completed(_) => return Err("did not halt".into()),
    };
    control.halt_after_segments = None;
    let resumed = completed(run(&cfg, &control).map_err(|e| e.to_string())?)?;
    let a = serde_json::to_string(&whole.without_timing()).map_err(|e| e.to_string())?;
    let b = serde_json::to_string(&resumed.without_timing()).map_err(|e| e.to_string())?;
    ensure(a == b, || "reports differ".into())?;
    Ok(format!("halted at 5/{total} segments, resumed report identical ({} bytes)", a.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("exactness oracle", exactness_oracle),
        ("hand-pinned values", hand_pinned),
        ("alpha residuals", alpha_residual_bounds),
        ("multiplicity at most d", multiplicity),
        ("P+ density", density),
        ("Chebotarev sum", chebotarev),
        ("Cilleruelo ratio", cilleruelo),
        ("Granville fraction", granville),
        ("exceptional set", exceptional),
        ("psi baseline", psi),
        ("determinism and resume", resume),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = check();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("[{:>2}] PASS {name}: {msg} ({secs:.1}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[{:>2}] FAIL {name}: {msg} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
