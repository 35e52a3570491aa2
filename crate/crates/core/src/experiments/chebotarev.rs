use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::primes::primes_up_to;
use crate::roots::count_roots_mod_p;

/// `S(N) = sum_{p <= N} rho(p) ln p / (p - 1) - ln N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebotarevPoint {
    pub n: u64,
    pub sum: f64,
    pub deviation: f64,
}

/// Deviation series from `(p, rho(p))` pairs ascending in p.
pub fn chebotarev_from_rho(rho: &[(u64, usize)], checkpoints: &[u64]) -> Vec<ChebotarevPoint> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut sum = 0.0;
    let mut i = 0;
    for &n in checkpoints {
        while i < rho.len() && rho[i].0 <= n {
            let (p, r) = rho[i];
            sum += r as f64 * (p as f64).ln() / (p - 1) as f64;
            i += 1;
        }
        out.push(ChebotarevPoint {
            n,
            sum,
            deviation: sum - (n as f64).ln(),
        });
    }
    out
}

/// `rho(p)` for every `p <= limit`; primes dividing the content get p.
pub fn rho_table(f: &IntPolynomial, limit: u64) -> Result<Vec<(u64, usize)>> {
    primes_up_to(limit)
        .par_iter()
        .map(|&p| match count_roots_mod_p(f, p) {
            Ok(r) => Ok((p, r)),
            Err(Error::VanishesModP(_)) => Ok((p, p as usize)),
            Err(e) => Err(e),
        })
        .collect()
}

pub fn chebotarev_sum(f: &IntPolynomial, checkpoints: &[u64]) -> Result<Vec<ChebotarevPoint>> {
    let mut points = checkpoints.to_vec();
    points.sort_unstable();
    points.dedup();
    let limit = points.last().copied().unwrap_or(0);
    Ok(chebotarev_from_rho(&rho_table(f, limit)?, &points))
}
