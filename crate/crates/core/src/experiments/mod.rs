//! Statistics over sieve output: densities, multiplicities, Chebotarev
//! sums, exceptional sets and the lcm growth ratio, each with its checks.

mod chebotarev;
mod psi;
mod window;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::sieve::{ExponentMap, SieveContext, SieveSettings};

pub use chebotarev::{chebotarev_from_rho, chebotarev_sum, rho_table, ChebotarevPoint};
pub use psi::{psi_baseline, PsiBaseline};
pub use window::{
    GranvilleCount, GranvilleReport, MultiplicityReport, WindowReport, WindowStats,
};

/// An exact ratio with its float rendering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

impl Fraction {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        let value = if denominator == 0 {
            0.0
        } else {
            numerator as f64 / denominator as f64
        };
        Fraction {
            numerator,
            denominator,
            value,
        }
    }
}

/// One measured quantity against its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: String,
    /// Hard checks decide the exit status; soft ones are reported only.
    pub hard: bool,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, threshold: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold: threshold.into(),
            hard: true,
            pass,
            note: None,
        }
    }

    pub fn soft(mut self) -> Self {
        self.hard = false;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn failed_hard(&self) -> bool {
        self.hard && !self.pass
    }
}

/// Tolerances for every check. Asymptotic bounds only apply from the
/// listed N upward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub epsilon: f64,
    pub asymptotic_from: u64,
    pub chebotarev_max: f64,
    pub chebotarev_drift: f64,
    pub granville_min: f64,
    pub residual_constant: f64,
    pub cilleruelo_low: f64,
    pub cilleruelo_high: f64,
    pub cilleruelo_from: u64,
    pub psi_low: f64,
    pub psi_high: f64,
    pub psi_from: u64,
    pub exceptional_ratio_low: f64,
    pub exceptional_ratio_high: f64,
    pub oracle_rel_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            epsilon: 0.05,
            asymptotic_from: 10_000,
            chebotarev_max: 5.0,
            chebotarev_drift: 1.0,
            granville_min: 0.02,
            residual_constant: 4.0,
            cilleruelo_low: 0.7,
            cilleruelo_high: 1.05,
            cilleruelo_from: 100_000,
            psi_low: 0.98,
            psi_high: 1.02,
            psi_from: 10_000,
            exceptional_ratio_low: 0.8,
            exceptional_ratio_high: 1.0,
            oracle_rel_tol: 1e-9,
        }
    }
}

/// `floor(N / ln N)`: the windows are `window_start < n <= N`.
pub fn window_start(n_max: u64) -> u64 {
    if n_max < 3 {
        // N / ln N >= N here
        return n_max;
    }
    let x = n_max as f64 / (n_max as f64).ln();
    let mut w = x.floor() as u64;
    // guard the float floor against rounding at the boundary
    let ln = (n_max as f64).ln();
    while w > 0 && (w as f64) * ln > n_max as f64 {
        w -= 1;
    }
    w
}

/// `N / ln N > max(|disc f|, height f, d^2)`.
pub fn large_n_regime(f: &IntPolynomial, disc: &BigInt, n_max: u64) -> bool {
    let x = n_max as f64 / (n_max as f64).ln();
    let d2 = (f.degree() * f.degree()) as f64;
    let disc = disc.abs().to_f64().unwrap_or(f64::INFINITY);
    let height = f.height().to_f64().unwrap_or(f64::INFINITY);
    n_max >= 3 && x > disc.max(height).max(d2)
}

/// `ln L / ((d - 1) N ln N)`, or `ln L / N` for degree one.
pub fn cilleruelo_value(ln_lcm: f64, degree: usize, n: u64) -> f64 {
    let n = n as f64;
    if degree <= 1 {
        ln_lcm / n
    } else {
        ln_lcm / ((degree - 1) as f64 * n * n.ln())
    }
}

/// `(N_i, ln L_f(N_i) / ((d - 1) N_i ln N_i))`.
pub fn cilleruelo_ratio(f: &IntPolynomial, n_max: u64, checkpoints: &[u64]) -> Result<Vec<(u64, f64)>> {
    if f.degree() < 2 {
        return Err(Error::Degree {
            required: 2,
            found: f.degree(),
        });
    }
    Ok(crate::sieve::lcm_log(f, n_max, checkpoints)?
        .into_iter()
        .map(|(n, l)| (n, cilleruelo_value(l, f.degree(), n)))
        .collect())
}

/// Sieve `1..=N` at B = N and fold the window `(N / ln N, N]`.
fn window_fold(f: &IntPolynomial, n_max: u64, deltas: &[f64]) -> Result<(ExponentMap, WindowStats, u64)> {
    let ctx = SieveContext::new(f, SieveSettings::new(n_max))?;
    let w = window_start(n_max);
    let mut map = ExponentMap::default();
    let mut stats = WindowStats::new(deltas.len());
    let mut plus = 0;
    for (lo, hi) in ctx.segments() {
        let values = ctx.factor_segment(lo, hi);
        for fv in &values {
            map.absorb(fv);
            let rec = crate::plus::PlusRecord::new(fv, n_max);
            plus += rec.exceeds_n as u64;
            if fv.n > w {
                stats.absorb(fv, &rec, deltas);
            }
        }
    }
    Ok((map, stats, plus))
}

/// Fraction of `1 <= n <= N` with `P^+(f(n)) > n`.
pub fn density_p_plus(f: &IntPolynomial, n_max: u64) -> Result<Fraction> {
    let (_, _, plus) = window_fold(f, n_max, &[])?;
    Ok(Fraction::new(plus, n_max))
}

/// Maximum number of `m` in the window sharing one largest prime factor.
pub fn multiplicity_check(f: &IntPolynomial, n_max: u64) -> Result<MultiplicityReport> {
    let (map, stats, _) = window_fold(f, n_max, &[])?;
    Ok(stats.multiplicity(map.ln_lcm(), n_max))
}

pub fn exceptional_set_report(f: &IntPolynomial, n_max: u64) -> Result<WindowReport> {
    let (map, stats, _) = window_fold(f, n_max, &[])?;
    Ok(stats.report(f.degree(), n_max, &map, &[]))
}

/// Window fraction with `P^+(f(n)) > delta n ln n`.
pub fn granville_density(f: &IntPolynomial, n_max: u64, delta: f64) -> Result<GranvilleReport> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let (map, stats, _) = window_fold(f, n_max, &[delta])?;
    let report = stats.report(f.degree(), n_max, &map, &[delta]);
    Ok(report.granville.into_iter().next().unwrap())
}
