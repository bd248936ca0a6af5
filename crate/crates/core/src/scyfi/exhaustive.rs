//! Brute-force enumeration of all region sequences, and the cost formulas for
//! random search without flips.

use super::{solve_cycle_candidate, CycleLibrary, CycleObject, Tolerances};
use crate::error::{Error, Result};
use crate::plrnn::{PiecewiseLinearMap, RegionCode, RegionSequence};

/// Default limit on `bits * k_max` for [`exhaustive_oracle`].
pub const DEFAULT_ENUMERATION_GUARD: usize = 24;

/// True when `seq` is not a repetition of a shorter sequence.
pub fn is_primitive(seq: &RegionSequence) -> bool {
    let k = seq.len();
    (1..k)
        .filter(|p| k % p == 0)
        .all(|p| seq.rotated(p) != *seq)
}

fn sequence_from_index(idx: u64, bits: usize, k: usize) -> RegionSequence {
    let mask = if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 };
    RegionSequence::new(
        (0..k)
            .map(|l| RegionCode::from_index((idx >> (l * bits)) & mask, bits))
            .collect(),
    )
}

/// Every cycle up to order `k_max`, found by solving every primitive,
/// canonical, non-constant region sequence.
pub fn exhaustive_oracle<M: PiecewiseLinearMap + ?Sized>(
    map: &M,
    k_max: usize,
    tol: &Tolerances,
) -> Result<CycleLibrary> {
    exhaustive_oracle_with_guard(map, k_max, tol, DEFAULT_ENUMERATION_GUARD)
}

pub fn exhaustive_oracle_with_guard<M: PiecewiseLinearMap + ?Sized>(
    map: &M,
    k_max: usize,
    tol: &Tolerances,
    guard: usize,
) -> Result<CycleLibrary> {
    let bits = map.n_switches();
    if bits * k_max > guard.min(62) {
        return Err(Error::BudgetGuard {
            bits: bits * k_max,
            limit: guard.min(62),
        });
    }
    let mut lib = CycleLibrary::new();
    for k in 1..=k_max {
        let mut evaluations = 0u64;
        for idx in 0..(1u64 << (bits * k)) {
            let seq = sequence_from_index(idx, bits, k);
            if (k >= 2 && seq.is_constant()) || !seq.is_canonical() || !is_primitive(&seq) {
                continue;
            }
            evaluations += 1;
            match solve_cycle_candidate(map, &seq, tol) {
                Err(d) => lib.record_degenerate(&seq, d.rcond),
                Ok(c) if c.consistent && c.distinct => {
                    lib.try_insert(CycleObject::new(map, &seq, c.points, tol), tol);
                }
                Ok(_) => {}
            }
        }
        lib.add_evaluations(k, evaluations);
    }
    Ok(lib)
}

/// Expected and median number of uniform draws without replacement needed to
/// hit one of `m` marked sequences among `2^(bits k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub expected: f64,
    pub median: u64,
}

pub fn exhaustive_expectation(bits: usize, k: usize, m: u64) -> Result<Expectation> {
    let e = bits * k;
    if e >= 1023 {
        return Err(Error::OutOfRange(format!("2^{e} sequences")));
    }
    let n_total = 2f64.powi(e as i32);
    if m == 0 || (m as f64) > n_total {
        return Err(Error::OutOfRange(format!(
            "m = {m} must lie in 1..=2^{e}"
        )));
    }
    let expected = (n_total + 1.0) / (m as f64 + 1.0);

    // survival(n) = C(N - n, m) / C(N, m), non-increasing in n
    let exact = e < 63 && (m as f64) * (e as f64 + 1.0) < 126.0;
    let big_n = if e < 63 { 1u64 << e } else { 0 };
    let at_most_half = |n: u64| -> bool {
        if exact {
            if n + m > big_n {
                return true;
            }
            let (mut num, mut den) = (2u128, 1u128);
            for i in 0..m {
                num *= (big_n - n - i) as u128;
                den *= (big_n - i) as u128;
            }
            num <= den
        } else {
            let nf = n as f64;
            if nf + m as f64 > n_total {
                return true;
            }
            let log_ratio: f64 = (0..m)
                .map(|i| (-nf / (n_total - i as f64)).ln_1p())
                .sum();
            log_ratio <= 0.5f64.ln()
        }
    };
    let mut lo = 0u64;
    let mut hi = (n_total - m as f64 + 1.0).min(u64::MAX as f64) as u64;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if at_most_half(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Expectation {
        expected,
        median: lo,
    })
}

/// Random initialisations needed so that a particular sequence of `k` codes
/// with `bits` bits each is drawn at least once with probability `1 - eps`.
pub fn required_initializations(bits: usize, k: usize, eps: f64) -> u64 {
    if eps >= 1.0 {
        return 0;
    }
    if eps <= 0.0 {
        return u64::MAX;
    }
    let p = 0.5f64.powi((bits * k).min(i32::MAX as usize) as i32);
    let denom = (-p).ln_1p();
    if denom == 0.0 {
        return u64::MAX;
    }
    let n = (eps.ln() / denom).ceil();
    if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        n as u64
    }
}
