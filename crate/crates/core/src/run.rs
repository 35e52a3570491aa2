//! Checkpointed runs: sieve `1..=N` segment by segment, fold every
//! statistic in segment order, snapshot at each checkpoint and assemble the
//! final report with its checks.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::{alpha_from_table, AlphaResidual, PrimeKind};
use crate::bigmath::ln_biguint;
use crate::error::{Error, Result};
use crate::experiments::{
    chebotarev_from_rho, cilleruelo_value, large_n_regime, psi_baseline, window_start, Check,
    ChebotarevPoint, Fraction, PsiBaseline, Thresholds, WindowReport, WindowStats,
};
use crate::plus::PlusRecord;
use crate::poly::{irreducibility_screen, IntPolynomial, Irreducibility};
use crate::roots::{RootTableCache, DEFAULT_ROOT_SEED, ROOT_CACHE_VERSION};
use crate::sieve::{lcm_oracle, ExponentMap, SieveContext, SieveSettings, DEFAULT_SEGMENT_SIZE};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// lcm series and growth ratio only.
    Lcm,
    /// Every statistic and check.
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub polynomial: IntPolynomial,
    pub n_max: u64,
    pub checkpoints: Vec<u64>,
    pub bound: u64,
    pub segment_size: u64,
    pub deltas: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
    pub oracle: bool,
    pub oracle_cap: u64,
    pub allow_degree_one: bool,
    pub mode: Mode,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// `10^3, 10^4, ...` below N, then N.
pub fn default_checkpoints(n_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1000u64), |c| c.checked_mul(10))
        .take_while(|&c| c < n_max)
        .collect();
    out.push(n_max);
    out
}

impl RunConfig {
    pub fn new(polynomial: IntPolynomial, n_max: u64) -> Self {
        let d = polynomial.degree().max(1) as f64;
        RunConfig {
            checkpoints: default_checkpoints(n_max),
            bound: n_max,
            segment_size: DEFAULT_SEGMENT_SIZE,
            deltas: vec![1.0 / (2.0 * d * d)],
            seed: DEFAULT_ROOT_SEED,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            oracle: false,
            oracle_cap: 2000,
            allow_degree_one: false,
            mode: Mode::Verify,
            thresholds: Thresholds::default(),
            polynomial,
            n_max,
        }
    }

    /// Checks the invariants and returns the config with its checkpoint list
    /// sorted, deduplicated and ending at N.
    pub fn normalized(&self) -> Result<RunConfig> {
        let mut cfg = self.clone();
        let d = cfg.polynomial.degree();
        if d == 0 {
            return Err(Error::Degree {
                required: 1,
                found: 0,
            });
        }
        if d == 1 && !cfg.allow_degree_one {
            return Err(Error::Degree {
                required: 2,
                found: 1,
            });
        }
        if cfg.n_max == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if cfg.bound == 0 || cfg.bound > cfg.n_max {
            return Err(Error::Config(format!(
                "sieve bound B = {} must satisfy 1 <= B <= N = {}",
                cfg.bound, cfg.n_max
            )));
        }
        if cfg.mode == Mode::Verify && cfg.bound < cfg.n_max {
            return Err(Error::BoundBelowN {
                bound: cfg.bound,
                n_max: cfg.n_max,
            });
        }
        if cfg.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        if cfg.segment_size == 0 {
            return Err(Error::Config("segment size must be at least 1".into()));
        }
        if let Some(bad) = cfg.deltas.iter().find(|&&x| x.is_nan() || x <= 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {bad}")));
        }
        if let Some(&bad) = cfg.checkpoints.iter().find(|&&c| c == 0 || c > cfg.n_max) {
            return Err(Error::Config(format!(
                "checkpoint {bad} is outside [1, {}]",
                cfg.n_max
            )));
        }
        cfg.checkpoints.push(cfg.n_max);
        cfg.checkpoints.sort_unstable();
        cfg.checkpoints.dedup();
        Ok(cfg)
    }

    fn oracle_point(&self) -> Option<u64> {
        self.oracle.then(|| self.oracle_cap.min(self.n_max).max(1))
    }

    /// Segments `[lo, hi)`, split so that every checkpoint, window start
    /// and oracle point falls on a boundary.
    pub fn segments(&self) -> Vec<(u64, u64)> {
        let mut cuts: Vec<u64> = vec![1, self.n_max + 1];
        for &c in &self.checkpoints {
            cuts.push(c + 1);
            if self.mode == Mode::Verify {
                cuts.push(window_start(c) + 1);
            }
        }
        if let Some(o) = self.oracle_point() {
            cuts.push(o + 1);
        }
        cuts.retain(|&c| c >= 1 && c <= self.n_max + 1);
        cuts.sort_unstable();
        cuts.dedup();
        cuts.windows(2)
            .flat_map(|w| crate::sieve::split_range(w[0], w[1], self.segment_size))
            .collect()
    }

    /// Serialized form with the worker count removed, used to match a
    /// checkpoint to the run that wrote it.
    fn key(&self) -> Result<String> {
        let mut c = self.clone();
        c.workers = 0;
        Ok(serde_json::to_string(&c)?)
    }
}

/// How a run is driven, as opposed to what it computes.
#[derive(Clone, Debug, Default)]
pub struct RunControl {
    /// Where the resumable state is written.
    pub checkpoint: Option<PathBuf>,
    /// Continue from `checkpoint` when it exists.
    pub resume: bool,
    /// Stop after this many segments in total and save the state.
    pub halt_after_segments: Option<usize>,
    /// On-disk root tables keyed by polynomial and prime bound.
    pub root_cache: Option<PathBuf>,
    /// Run even if the screen finds f reducible.
    pub allow_reducible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: u64,
    pub ln_lcm: f64,
    pub cilleruelo_ratio: f64,
    pub density: Option<Fraction>,
    pub window: Option<WindowReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: u64,
    pub exact_match: bool,
    pub ln_sieve: f64,
    pub ln_oracle: f64,
    pub rel_error: f64,
}

/// Everything needed to continue an interrupted run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub version: u32,
    pub config: RunConfig,
    pub segments_done: usize,
    pub map: ExponentMap,
    pub plus_total: u64,
    pub windows: Vec<Option<WindowStats>>,
    pub snapshots: Vec<Snapshot>,
    pub oracle: Option<OracleReport>,
}

impl RunState {
    fn fresh(cfg: &RunConfig) -> Self {
        let windows = cfg
            .checkpoints
            .iter()
            .map(|_| (cfg.mode == Mode::Verify).then(|| WindowStats::new(cfg.deltas.len())))
            .collect();
        RunState {
            version: SCHEMA_VERSION,
            config: cfg.clone(),
            segments_done: 0,
            map: ExponentMap::default(),
            plus_total: 0,
            windows,
            snapshots: Vec::new(),
            oracle: None,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        {
            let file = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            serde_json::to_writer(file, self)?;
        }
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(file)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: u64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranvilleSeries {
    pub delta: f64,
    pub flagged: bool,
    pub points: Vec<SeriesPoint>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub ln_lcm: Vec<SeriesPoint>,
    pub cilleruelo_ratio: Vec<SeriesPoint>,
    pub density_p_plus: Vec<SeriesPoint>,
    pub exceptional_fraction: Vec<SeriesPoint>,
    pub chebotarev_sum_deviation: Vec<SeriesPoint>,
    pub granville_density: Vec<GranvilleSeries>,
    pub psi_baseline_ratio: Vec<SeriesPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub primes: usize,
    pub formula_equals_sieve: bool,
    /// First primes where the two computations differ.
    pub mismatches: Vec<u64>,
    pub residual_constant: f64,
    /// Largest `|residual| / bound` over regular primes.
    pub worst_regular_ratio: f64,
    pub worst_regular_prime: Option<u64>,
    pub regular_failures: usize,
    pub singular_failures: usize,
    #[serde(skip)]
    pub rows: Vec<AlphaResidual>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub workers: usize,
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub polynomial: String,
    pub coefficients: String,
    pub degree: usize,
    pub discriminant: String,
    pub content: String,
    pub screen: Irreducibility,
    pub mode: Mode,
    pub n_max: u64,
    pub bound: u64,
    pub segment_size: u64,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub large_n_regime: bool,
    pub thresholds: Thresholds,
    pub series: Series,
    pub checkpoints: Vec<Snapshot>,
    pub chebotarev: Vec<ChebotarevPoint>,
    pub psi: Vec<PsiBaseline>,
    pub alpha: Option<AlphaSummary>,
    pub oracle: Option<OracleReport>,
    pub checks: Vec<Check>,
    pub hard_failures: usize,
    pub notes: Vec<String>,
    pub metadata: Metadata,
}

impl StatsReport {
    pub fn all_hard_pass(&self) -> bool {
        self.hard_failures == 0
    }

    /// The report with run-dependent metadata cleared, for comparisons.
    pub fn without_timing(&self) -> StatsReport {
        let mut r = self.clone();
        r.metadata.wall_time_secs = 0.0;
        r.metadata.workers = 0;
        r
    }
}

#[derive(Debug)]
pub enum Outcome {
    Completed(Box<StatsReport>),
    Halted { segments_done: usize, segments_total: usize },
}

struct SegmentOut {
    map: ExponentMap,
    plus: u64,
    window: Option<WindowStats>,
}

fn in_window(cfg: &RunConfig, i: usize, lo: u64, hi: u64) -> bool {
    let c = cfg.checkpoints[i];
    lo > window_start(c) && hi - 1 <= c
}

fn process_segment(ctx: &SieveContext, cfg: &RunConfig, lo: u64, hi: u64) -> SegmentOut {
    let values = ctx.factor_segment(lo, hi);
    let mut map = ExponentMap::default();
    let mut plus = 0;
    let windowed = cfg.mode == Mode::Verify
        && (0..cfg.checkpoints.len()).any(|i| in_window(cfg, i, lo, hi));
    let mut window = windowed.then(|| WindowStats::new(cfg.deltas.len()));
    for fv in &values {
        map.absorb(fv);
        if cfg.mode == Mode::Verify {
            let rec = PlusRecord::new(fv, cfg.bound);
            plus += rec.exceeds_n as u64;
            if let Some(w) = window.as_mut() {
                w.absorb(fv, &rec, &cfg.deltas);
            }
        }
    }
    SegmentOut { map, plus, window }
}

fn build_context(cfg: &RunConfig, control: &RunControl) -> Result<SieveContext> {
    let settings = SieveSettings {
        n_max: cfg.n_max,
        bound: cfg.bound,
        segment_size: cfg.segment_size,
        seed: cfg.seed,
    };
    let Some(path) = &control.root_cache else {
        return SieveContext::new(&cfg.polynomial, settings);
    };
    let value_bound = cfg.polynomial.value_bound(cfg.n_max);
    if let Some(cache) =
        RootTableCache::load_matching(path, &cfg.polynomial, cfg.bound, &value_bound)?
    {
        if cache.seed == cfg.seed {
            return SieveContext::with_tables(&cfg.polynomial, settings, cache.tables);
        }
    }
    let ctx = SieveContext::new(&cfg.polynomial, settings)?;
    RootTableCache {
        version: ROOT_CACHE_VERSION,
        polynomial: cfg.polynomial.clone(),
        prime_bound: cfg.bound,
        value_bound: value_bound.to_string(),
        seed: cfg.seed,
        tables: ctx.tables(),
    }
    .save(path)?;
    Ok(ctx)
}

fn take_snapshot(cfg: &RunConfig, state: &mut RunState, i: usize) {
    let n = cfg.checkpoints[i];
    let d = cfg.polynomial.degree();
    let window = state.windows[i]
        .take()
        .map(|w| w.report(d, n, &state.map, &cfg.deltas));
    let ln_lcm = match &window {
        Some(w) => w.multiplicity.ln_lcm,
        None => state.map.ln_lcm(),
    };
    state.snapshots.push(Snapshot {
        n,
        ln_lcm,
        cilleruelo_ratio: cilleruelo_value(ln_lcm, d, n),
        density: (cfg.mode == Mode::Verify).then(|| Fraction::new(state.plus_total, n)),
        window,
    });
}

fn oracle_check(cfg: &RunConfig, map: &ExponentMap, n: u64) -> OracleReport {
    let exact = lcm_oracle(&cfg.polynomial, n);
    let sieve = map.lcm_value();
    let ln_sieve = map.ln_lcm();
    let ln_oracle = ln_biguint(&exact);
    let rel_error = if ln_oracle == 0.0 {
        (ln_sieve - ln_oracle).abs()
    } else {
        ((ln_sieve - ln_oracle) / ln_oracle).abs()
    };
    OracleReport {
        n,
        exact_match: sieve == exact,
        ln_sieve,
        ln_oracle,
        rel_error,
    }
}

/// Runs (or resumes) the configured computation.
pub fn run(config: &RunConfig, control: &RunControl) -> Result<Outcome> {
    let started = Instant::now();
    let cfg = config.normalized()?;
    let screen = irreducibility_screen(&cfg.polynomial)?;
    if screen.is_no() && !control.allow_reducible {
        return Err(Error::Reducible {
            poly: cfg.polynomial.to_string(),
            witness: screen.to_string(),
        });
    }
    let ctx = build_context(&cfg, control)?;
    let segments = cfg.segments();
    let mut state = match (&control.checkpoint, control.resume) {
        (Some(path), true) if path.exists() => {
            let state = RunState::load(path)?;
            if state.version != SCHEMA_VERSION {
                return Err(Error::Checkpoint(format!(
                    "schema version {} != {}",
                    state.version, SCHEMA_VERSION
                )));
            }
            if state.config.key()? != cfg.key()? {
                return Err(Error::Checkpoint(
                    "the checkpoint was written with a different configuration".into(),
                ));
            }
            if state.segments_done > segments.len() {
                return Err(Error::Checkpoint("segment counter out of range".into()));
            }
            state
        }
        _ => RunState::fresh(&cfg),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let batch = (cfg.workers * 2).max(1);
    let stop = control
        .halt_after_segments
        .map_or(segments.len(), |h| h.min(segments.len()));
    let oracle_point = cfg.oracle_point();
    while state.segments_done < stop {
        let start = state.segments_done;
        let end = (start + batch).min(stop);
        let outs: Vec<SegmentOut> = pool.install(|| {
            segments[start..end]
                .par_iter()
                .map(|&(lo, hi)| process_segment(&ctx, &cfg, lo, hi))
                .collect()
        });
        for (out, &(lo, hi)) in outs.iter().zip(&segments[start..end]) {
            state.map.merge(&out.map);
            state.plus_total += out.plus;
            if let Some(w) = &out.window {
                for i in 0..cfg.checkpoints.len() {
                    if in_window(&cfg, i, lo, hi) {
                        if let Some(acc) = state.windows[i].as_mut() {
                            acc.merge(w);
                        }
                    }
                }
            }
            let last = hi - 1;
            if let Some(i) = cfg.checkpoints.iter().position(|&c| c == last) {
                pool.install(|| take_snapshot(&cfg, &mut state, i));
            }
            if oracle_point == Some(last) {
                state.oracle = Some(oracle_check(&cfg, &state.map, last));
            }
            state.segments_done += 1;
        }
    }
    if state.segments_done < segments.len() {
        if let Some(path) = &control.checkpoint {
            state.save(path)?;
        }
        return Ok(Outcome::Halted {
            segments_done: state.segments_done,
            segments_total: segments.len(),
        });
    }
    if let Some(path) = &control.checkpoint {
        state.save(path)?;
    }
    let report = pool.install(|| assemble(&cfg, &ctx, screen, state, started));
    Ok(Outcome::Completed(Box::new(report)))
}

fn alpha_summary(cfg: &RunConfig, ctx: &SieveContext, map: &ExponentMap) -> Result<AlphaSummary> {
    let n = cfg.n_max;
    let disc = crate::poly::discriminant(&cfg.polynomial)?;
    let d = cfg.polynomial.degree();
    let c = cfg.thresholds.residual_constant;
    let rows: Vec<(bool, AlphaResidual)> = ctx
        .plans()
        .par_iter()
        .map(|plan| {
            let formula = alpha_from_table(plan.content_exp, &plan.table, n)?;
            let sieved = map.alpha.get(&plan.prime).copied().unwrap_or(0);
            let p = plan.prime;
            let (kind, rho) = if plan.content_exp > 0 {
                (PrimeKind::Content, p as usize)
            } else if (&disc % p).is_zero() {
                (PrimeKind::Singular, plan.table.roots(1).len())
            } else {
                (PrimeKind::Regular, plan.table.roots(1).len())
            };
            Ok((
                formula == sieved,
                AlphaResidual::new(p, kind, formula, rho, d, &disc, n, c),
            ))
        })
        .collect::<Result<_>>()?;
    let mismatches: Vec<u64> = rows
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, r)| r.prime)
        .take(20)
        .collect();
    let mut worst = (0.0f64, None);
    for (_, r) in &rows {
        if r.kind == PrimeKind::Regular && r.bound > 0.0 {
            let ratio = r.residual.abs() / r.bound;
            if ratio > worst.0 {
                worst = (ratio, Some(r.prime));
            }
        }
    }
    let failures = |k: PrimeKind| rows.iter().filter(|(_, r)| r.kind == k && !r.pass).count();
    Ok(AlphaSummary {
        primes: rows.len(),
        formula_equals_sieve: mismatches.is_empty(),
        mismatches,
        residual_constant: c,
        worst_regular_ratio: worst.0,
        worst_regular_prime: worst.1,
        regular_failures: failures(PrimeKind::Regular),
        singular_failures: failures(PrimeKind::Singular),
        rows: rows.into_iter().map(|(_, r)| r).collect(),
    })
}

fn point(n: u64, value: f64) -> SeriesPoint {
    SeriesPoint { n, value }
}

fn assemble(
    cfg: &RunConfig,
    ctx: &SieveContext,
    screen: Irreducibility,
    state: RunState,
    started: Instant,
) -> StatsReport {
    let f = &cfg.polynomial;
    let d = f.degree();
    let disc = crate::poly::discriminant(f).unwrap_or_default();
    let content = f.content();
    let verify = cfg.mode == Mode::Verify;
    let mut notes = vec![
        "the P+(f(n)) > n exp((ln n)^a) threshold needs scales far beyond a desk run and is not evaluated".to_string(),
    ];
    if matches!(screen, Irreducibility::Unknown) {
        notes.push("irreducibility could not be certified; statistics assume it".into());
    }
    if d >= 3 {
        notes.push(format!(
            "the growth ratio for degree {d} is reported without assertion"
        ));
    }
    let mut series = Series::default();
    for s in &state.snapshots {
        series.ln_lcm.push(point(s.n, s.ln_lcm));
        series.cilleruelo_ratio.push(point(s.n, s.cilleruelo_ratio));
        if let Some(den) = s.density {
            series.density_p_plus.push(point(s.n, den.value));
        }
        if let Some(w) = &s.window {
            series
                .exceptional_fraction
                .push(point(s.n, w.exceptional_fraction.value));
        }
    }
    let mut chebotarev = Vec::new();
    let mut psi = Vec::new();
    let mut alpha = None;
    if verify {
        series.granville_density = cfg
            .deltas
            .iter()
            .enumerate()
            .map(|(j, &delta)| GranvilleSeries {
                delta,
                flagged: delta >= 1.0 / (d * d) as f64,
                points: state
                    .snapshots
                    .iter()
                    .filter_map(|s| s.window.as_ref())
                    .map(|w| point(w.n_max, w.granville[j].definite.value))
                    .collect(),
            })
            .collect();
        let rho: Vec<(u64, usize)> = ctx
            .plans()
            .iter()
            .map(|plan| {
                let r = if plan.content_exp > 0 {
                    plan.prime as usize
                } else {
                    plan.table.roots(1).len()
                };
                (plan.prime, r)
            })
            .collect();
        chebotarev = chebotarev_from_rho(&rho, &cfg.checkpoints);
        series.chebotarev_sum_deviation = chebotarev.iter().map(|c| point(c.n, c.deviation)).collect();
        psi = cfg.checkpoints.par_iter().map(|&n| psi_baseline(n)).collect();
        series.psi_baseline_ratio = psi.iter().map(|p| point(p.n, p.ratio)).collect();
        alpha = alpha_summary(cfg, ctx, &state.map).ok();
    }
    let regime = large_n_regime(f, &disc, cfg.n_max);
    let mut report = StatsReport {
        schema_version: SCHEMA_VERSION,
        polynomial: f.to_string(),
        coefficients: f.to_coeff_list(),
        degree: d,
        discriminant: disc.to_string(),
        content: content.to_string(),
        screen,
        mode: cfg.mode,
        n_max: cfg.n_max,
        bound: cfg.bound,
        segment_size: cfg.segment_size,
        seed: cfg.seed,
        deltas: cfg.deltas.clone(),
        large_n_regime: regime,
        thresholds: cfg.thresholds.clone(),
        series,
        checkpoints: state.snapshots,
        chebotarev,
        psi,
        alpha,
        oracle: state.oracle,
        checks: Vec::new(),
        hard_failures: 0,
        notes,
        metadata: Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            workers: cfg.workers,
            wall_time_secs: 0.0,
        },
    };
    report.checks = build_checks(cfg, &report, &state.map);
    report.hard_failures = report.checks.iter().filter(|c| c.failed_hard()).count();
    report.metadata.wall_time_secs = started.elapsed().as_secs_f64();
    report
}

const COPRIME_CHECK_LIMIT: u64 = 200_000;

/// Exact `gcd(prod cofactors, prod of sieved primes) = 1`, for moderate N.
fn cofactors_coprime(map: &ExponentMap, n_max: u64) -> Option<bool> {
    if n_max > COPRIME_CHECK_LIMIT {
        return None;
    }
    let primes: Vec<BigUint> = map
        .max_exponents
        .iter()
        .filter(|(_, &e)| e > 0)
        .map(|(&p, _)| BigUint::from(p))
        .collect();
    let modulus = crate::bigmath::product_tree(primes);
    let cofactors = crate::bigmath::product_tree(
        map.prime_cofactors
            .iter()
            .chain(&map.composite_cofactors)
            .cloned()
            .collect(),
    );
    Some(crate::bigmath::gcd_big(&cofactors, &modulus) == BigUint::from(1u32))
}

fn build_checks(cfg: &RunConfig, r: &StatsReport, map: &ExponentMap) -> Vec<Check> {
    let t = &cfg.thresholds;
    let d = r.degree;
    let df = d as f64;
    let mut checks = Vec::new();
    let asymptotic = |n: u64, c: Check| if n >= t.asymptotic_from { c } else { c.soft() };

    // growth ratio
    if d == 2 {
        let early = r.checkpoints.iter().find(|s| s.n == 1000);
        for s in r.checkpoints.iter().filter(|s| s.n >= t.cilleruelo_from) {
            let v = s.cilleruelo_ratio;
            checks.push(Check::new(
                format!("cilleruelo_ratio@{}", s.n),
                v,
                format!("[{}, {}]", t.cilleruelo_low, t.cilleruelo_high),
                (t.cilleruelo_low..=t.cilleruelo_high).contains(&v),
            ));
            if let Some(e) = early {
                checks.push(Check::new(
                    format!("cilleruelo_closer@{}", s.n),
                    (v - 1.0).abs(),
                    format!("< |ratio(1000) - 1| = {}", (e.cilleruelo_ratio - 1.0).abs()),
                    (v - 1.0).abs() < (e.cilleruelo_ratio - 1.0).abs(),
                ));
            }
        }
    }
    if let Some(o) = &r.oracle {
        checks.push(Check::new(
            format!("oracle_exact_lcm@{}", o.n),
            o.exact_match as u8 as f64,
            "exponent-map lcm == incremental lcm",
            o.exact_match,
        ));
        checks.push(Check::new(
            format!("oracle_ln_lcm@{}", o.n),
            o.rel_error,
            format!("<= {}", t.oracle_rel_tol),
            o.rel_error <= t.oracle_rel_tol,
        ));
    }
    if cfg.mode != Mode::Verify {
        return checks;
    }

    // exponent map invariants
    let alpha_ge_max = map
        .max_exponents
        .iter()
        .all(|(p, &m)| map.alpha.get(p).is_some_and(|&a| a >= m as u64));
    checks.push(Check::new(
        "exponent_map_alpha_ge_max",
        alpha_ge_max as u8 as f64,
        "alpha_p >= max_n v_p(f(n)) for every p",
        alpha_ge_max,
    ));
    match cofactors_coprime(map, cfg.n_max) {
        Some(ok) => checks.push(Check::new(
            "cofactor_coprimality",
            ok as u8 as f64,
            "gcd(cofactor product, sieved primes) = 1",
            ok,
        )),
        None => checks.push(
            Check::new("cofactor_coprimality", f64::NAN, "gcd(cofactor product, sieved primes) = 1", true)
                .soft()
                .with_note(format!("skipped above N = {COPRIME_CHECK_LIMIT}")),
        ),
    }

    for s in &r.checkpoints {
        let n = s.n;
        let Some(w) = &s.window else { continue };
        if let Some(den) = s.density {
            let need = 1.0 - 1.0 / df - t.epsilon;
            checks.push(asymptotic(
                n,
                Check::new(format!("density_p_plus@{n}"), den.value, format!(">= {need}"), den.value >= need),
            ));
        }
        let cap = 1.0 / df + t.epsilon;
        checks.push(asymptotic(
            n,
            Check::new(
                format!("exceptional_fraction@{n}"),
                w.exceptional_fraction.value,
                format!("<= {cap}"),
                w.exceptional_fraction.value <= cap,
            ),
        ));
        checks.push(Check::new(
            format!("exceptional_log_bound@{n}"),
            w.ln_q_direct,
            format!("<= sum alpha_p ln p = {}", w.ln_alpha_bound),
            w.gamma_le_alpha,
        ).with_note("decided exactly by gamma_p <= alpha_p for every p"));
        let two_ways = if w.ln_q_direct == 0.0 {
            w.ln_q_factored.abs()
        } else {
            ((w.ln_q_direct - w.ln_q_factored) / w.ln_q_direct).abs()
        };
        checks.push(Check::new(
            format!("exceptional_log_two_ways@{n}"),
            two_ways,
            format!("<= {}", t.oracle_rel_tol),
            two_ways <= t.oracle_rel_tol,
        ));
        if let Some(ratio) = w.log_ratio {
            checks.push(
                Check::new(
                    format!("exceptional_log_ratio@{n}"),
                    ratio,
                    format!("[{}, {}]", t.exceptional_ratio_low, t.exceptional_ratio_high),
                    (t.exceptional_ratio_low..=t.exceptional_ratio_high).contains(&ratio),
                )
                .soft(),
            );
        }
        checks.push(Check::new(
            format!("window_complement@{n}"),
            (w.plus_count + w.exceptional) as f64,
            format!("== window size {}", w.window_size),
            w.plus_count + w.exceptional == w.window_size,
        ));
        let m = &w.multiplicity;
        let asserted = large_n_regime(&cfg.polynomial, &r.discriminant.parse().unwrap_or_default(), n)
            || r.content == "1";
        let mut mult = Check::new(
            format!("multiplicity@{n}"),
            m.max_multiplicity as f64,
            format!("<= d = {d}"),
            m.max_multiplicity <= d as u64,
        );
        if !m.exact {
            mult = mult.with_note("some composite cofactors share factors; the count is an upper bound");
        }
        if !asserted {
            mult = mult.soft().with_note("N is below the large-N regime and f has nontrivial content");
        }
        checks.push(mult);
        let mut partition = Check::new(
            format!("partition@{n}"),
            m.partition_sum as f64,
            format!("== #N = {}", m.members),
            m.partition_sum == m.members,
        );
        if !m.exact {
            partition = partition.soft();
        }
        checks.push(partition);
        let mut cover = Check::new(
            format!("count_le_d_primes@{n}"),
            m.members as f64,
            format!("<= d * #P = {}", d as u64 * m.distinct_primes),
            m.members <= d as u64 * m.distinct_primes,
        );
        if !asserted {
            cover = cover.soft();
        }
        checks.push(cover);
        checks.push(Check::new(
            format!("prime_log_chain@{n}"),
            m.ln_primes_lower,
            format!(">= #P ln(N / ln N) = {}", m.chain_rhs),
            m.ln_primes_lower >= m.chain_rhs,
        ));
        checks.push(Check::new(
            format!("lcm_covers_primes@{n}"),
            m.ln_lcm,
            format!(">= sum ln p over P <= {}", m.ln_keys_upper),
            m.ln_lcm >= m.ln_keys_upper * (1.0 - 1e-12),
        ));
        for g in &w.granville {
            let c = Check::new(
                format!("granville@{n}(delta={})", g.delta),
                g.definite.value,
                format!("> {}", t.granville_min),
                g.definite.value > t.granville_min,
            );
            checks.push(if g.flagged {
                c.soft().with_note("delta >= 1/d^2 is outside the proven range")
            } else {
                asymptotic(n, c)
            });
        }
    }

    // Chebotarev sum
    let large: Vec<&ChebotarevPoint> = r.chebotarev.iter().filter(|c| c.n >= 1000).collect();
    if !large.is_empty() {
        let worst = large.iter().map(|c| c.deviation.abs()).fold(0.0, f64::max);
        checks.push(Check::new(
            "chebotarev_max_deviation",
            worst,
            format!("<= {}", t.chebotarev_max),
            worst <= t.chebotarev_max,
        ));
    }
    let at = |n: u64| r.chebotarev.iter().find(|c| c.n == n);
    if let (Some(a), Some(b)) = (at(10_000), at(100_000)) {
        let drift = (b.deviation - a.deviation).abs();
        checks.push(Check::new(
            "chebotarev_drift",
            drift,
            format!("<= {}", t.chebotarev_drift),
            drift <= t.chebotarev_drift,
        ));
    }

    for p in &r.psi {
        checks.push(Check::new(
            format!("psi_two_ways@{}", p.n),
            (p.ln_lcm - p.psi).abs(),
            "identical prime exponents",
            p.exact_match,
        ));
        if p.n >= t.psi_from {
            checks.push(Check::new(
                format!("psi_ratio@{}", p.n),
                p.ratio,
                format!("[{}, {}]", t.psi_low, t.psi_high),
                (t.psi_low..=t.psi_high).contains(&p.ratio),
            ));
        }
    }

    match &r.alpha {
        Some(a) => {
            checks.push(Check::new(
                "alpha_formula_equals_sieve",
                a.mismatches.len() as f64,
                "0 mismatching primes",
                a.formula_equals_sieve,
            ));
            checks.push(Check::new(
                "alpha_regular_residual",
                a.worst_regular_ratio,
                format!("|alpha - N rho/(p-1)| <= {} d ln N / ln p", a.residual_constant),
                a.regular_failures == 0,
            ));
            checks.push(Check::new(
                "alpha_singular_bound",
                a.singular_failures as f64,
                "alpha_p <= 2 d disc^2 N / p",
                a.singular_failures == 0,
            ));
        }
        None => checks.push(Check::new(
            "alpha_formula_equals_sieve",
            f64::NAN,
            "root tables complete",
            false,
        )
        .with_note("a root table was truncated")),
    }
    checks
}
