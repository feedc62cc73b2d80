//! Closed forms for staggered pipelines and memory-time area.

use num_bigint::BigInt;

use crate::rational::{from_u64, gcd_u64, Rational};

use super::AnalysisError;

/// Peak memory of a staggered pipeline with `k` slots of length `tau`:
/// `s*k + (tau*k + tau + k - gcd(tau, k)) / 2`.
pub fn peak_memory(k: u64, tau: u64, s: u64) -> u64 {
    let (k128, tau128) = (k as u128, tau as u128);
    let stagger = (tau128 * k128 + tau128 + k128 - gcd_u64(tau, k) as u128) / 2;
    let total = s as u128 * k128 + stagger;
    u64::try_from(total).unwrap_or(u64::MAX)
}

/// Largest `k` with `peak_memory(k, tau, s) <= M`.
pub fn max_parallelism(tau: u64, s: u64, budget: u64) -> Result<u64, AnalysisError> {
    if tau == 0 || s + tau > budget {
        return Err(AnalysisError::Infeasible { tau, s, budget });
    }
    let fits = |k: u64| peak_memory(k, tau, s) <= budget;
    // Peak grows by at least one per extra slot, so k <= budget.
    let mut lo = 1u64;
    let mut hi = 2u64;
    while fits(hi) {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    // Invariant: fits(lo), !fits(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `floor((2M - tau + 1) / (2s + tau + 1))`, the guaranteed parallelism.
pub fn parallelism_floor_bound(tau: u64, s: u64, budget: u64) -> u64 {
    (2 * budget + 1).saturating_sub(tau) / (2 * s + tau + 1)
}

/// Memory-time area of one job: `s*o + o(o+1)/2`.
pub fn area(o: u64, s: u64) -> u64 {
    s * o + o * (o + 1) / 2
}

/// Area evaluated at a rational length.
pub fn area_rational(y: &Rational, s: u64) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    from_u64(s) * y + y * (y + Rational::from_integer(BigInt::from(1))) / two
}

/// `n(n+1)/2 * area(tau, s) / M` for `n` jobs of length at least `tau`.
pub fn opt_lb_single(n: u64, tau: u64, s: u64, budget: u64) -> Rational {
    let pairs = n as u128 * (n as u128 + 1) / 2;
    Rational::new(
        BigInt::from(pairs) * BigInt::from(area(tau, s)),
        BigInt::from(budget),
    )
}

/// `tau / k* < (1 + 2/k*) * area(tau, s) / M`, checked in integers as
/// `tau * M < (k* + 2) * area`.
pub fn packing_inequality_holds(tau: u64, s: u64, budget: u64) -> Result<bool, AnalysisError> {
    let k = max_parallelism(tau, s, budget)?;
    Ok((tau as u128) * (budget as u128) < (k as u128 + 2) * area(tau, s) as u128)
}

/// `n * ceil(n/k) <= 2 * sum_{u=1..n} ceil(u/k)`.
pub fn ceiling_inequality_holds(n: u64, k: u64) -> bool {
    let lhs = n as u128 * n.div_ceil(k) as u128;
    let rhs: u128 = (1..=n).map(|u| u.div_ceil(k) as u128).sum();
    lhs <= 2 * rhs
}
