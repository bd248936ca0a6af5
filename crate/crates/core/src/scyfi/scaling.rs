//! Search-cost measurements: how many region sequences the search solves
//! before it finds a cycle, compared with blind enumeration.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    exhaustive_expectation, exhaustive_oracle_with_guard, find_k_observed, generate_case1_params,
    embed_fixed_point, Candidate, CycleLibrary, CycleObject, Degenerate, SearchBudget,
    SearchObserver, Tolerances,
};
use crate::plrnn::{PiecewiseLinearMap, PlrnnParams, RegionCode, RegionSequence};
use crate::rng;

/// Result of one cost measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FirstHit {
    pub evaluations: u64,
    pub found: bool,
}

struct StopAt<'a, F: Fn(&CycleObject) -> bool> {
    accept: &'a F,
    evaluations: u64,
    found: bool,
}

impl<F: Fn(&CycleObject) -> bool> SearchObserver for StopAt<'_, F> {
    fn evaluated(&mut self, _: &RegionSequence, _: bool, _: &Result<Candidate, Degenerate>) -> bool {
        self.evaluations += 1;
        true
    }

    fn stored(&mut self, cycle: &CycleObject) -> bool {
        if (self.accept)(cycle) {
            self.found = true;
            return false;
        }
        true
    }
}

/// Number of linear solves until the order-`k` search stores a cycle accepted by `accept`.
pub fn evaluations_to_first<M, F>(
    map: &M,
    k: usize,
    budget: &SearchBudget,
    tol: &Tolerances,
    accept: F,
) -> FirstHit
where
    M: PiecewiseLinearMap + ?Sized,
    F: Fn(&CycleObject) -> bool,
{
    let mut obs = StopAt {
        accept: &accept,
        evaluations: 0,
        found: false,
    };
    let mut lib = CycleLibrary::new();
    find_k_observed(map, k, &mut lib, budget, tol, &mut obs);
    FirstHit {
        evaluations: obs.evaluations,
        found: obs.found,
    }
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One row of the cost-versus-order table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderScalingRow {
    pub m_dim: usize,
    pub k: usize,
    /// Median solves to the first `k`-cycle over all systems and seeds.
    pub scyfi_median: f64,
    /// Median over systems of the blind-enumeration median.
    pub exhaustive_median: f64,
    /// Median over systems of the blind-enumeration mean.
    pub exhaustive_expected: f64,
    pub runs: usize,
    pub missed: usize,
}

/// Cost of finding a first `k`-cycle for each `k` in `ks`, over `systems` x `seeds`.
/// The enumeration baseline counts every rotation of every `k`-cycle as a hit.
pub fn scaling_by_order(
    systems: &[PlrnnParams],
    ks: &[usize],
    seeds: &[u64],
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Vec<OrderScalingRow> {
    let m_dim = systems.first().map(|s| s.m()).unwrap_or(0);
    ks.iter()
        .map(|&k| {
            let baselines: Vec<Option<(f64, f64)>> = systems
                .par_iter()
                .map(|s| {
                    let lib = exhaustive_oracle_with_guard(s, k, tol, 62).ok()?;
                    let hits = (lib.count(k) * k) as u64;
                    let e = exhaustive_expectation(s.m(), k, hits).ok()?;
                    Some((e.median as f64, e.expected))
                })
                .collect();
            let jobs: Vec<(usize, u64)> = (0..systems.len())
                .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
                .collect();
            let hits: Vec<FirstHit> = jobs
                .par_iter()
                .map(|&(i, s)| {
                    let b = budget.with_seed(rng::split(s, i as u64));
                    evaluations_to_first(&systems[i], k, &b, tol, |_| true)
                })
                .collect();
            let found: Vec<f64> = hits
                .iter()
                .filter(|h| h.found)
                .map(|h| h.evaluations as f64)
                .collect();
            let ok: Vec<(f64, f64)> = baselines.into_iter().flatten().collect();
            OrderScalingRow {
                m_dim,
                k,
                scyfi_median: median(&found),
                exhaustive_median: median(&ok.iter().map(|x| x.0).collect::<Vec<_>>()),
                exhaustive_expected: median(&ok.iter().map(|x| x.1).collect::<Vec<_>>()),
                runs: hits.len(),
                missed: hits.iter().filter(|h| !h.found).count(),
            }
        })
        .collect()
}

/// `n` random systems of size `m` that each have at least one `k`-cycle for
/// every `k` up to `k_max`, checked by exhaustive enumeration. Draws are
/// `a ~ U(-0.5, 1)`, `W ~ U(-4, 4)` including the diagonal, `h ~ U(-1, 1)`;
/// the search tries seeds in order from `seed`.
pub fn order_benchmark_systems(m: usize, n: usize, k_max: usize, seed: u64, tol: &Tolerances) -> Vec<PlrnnParams> {
    let mut out = Vec::with_capacity(n);
    let mut draw = 0u64;
    while out.len() < n {
        let batch: Vec<PlrnnParams> = (draw..draw + 64)
            .into_par_iter()
            .filter_map(|d| {
                let mut r = rng::stream(seed, d);
                let a = DVector::from_fn(m, |_, _| r.gen_range(-0.5..1.0));
                let w = DMatrix::from_fn(m, m, |_, _| r.gen_range(-4.0..4.0));
                let h = DVector::from_fn(m, |_, _| r.gen_range(-1.0..1.0));
                let p = PlrnnParams { a, w, h };
                let lib = exhaustive_oracle_with_guard(&p, k_max, tol, 62).ok()?;
                (1..=k_max).all(|k| lib.count(k) > 0).then_some(p)
            })
            .collect();
        out.extend(batch.into_iter().take(n - out.len()));
        draw += 64;
    }
    out
}

/// One row of the cost-versus-dimension table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScalingRow {
    pub m_dim: usize,
    pub scyfi_median: f64,
    pub scyfi_max: f64,
    /// Blind-enumeration median for a single fixed point among `2^M` regions.
    pub exhaustive_median: f64,
    pub runs: usize,
    pub missed: usize,
}

fn dimension_row(m_dim: usize, hits: &[FirstHit]) -> DimensionScalingRow {
    let found: Vec<f64> = hits
        .iter()
        .filter(|h| h.found)
        .map(|h| h.evaluations as f64)
        .collect();
    DimensionScalingRow {
        m_dim,
        scyfi_median: median(&found),
        scyfi_max: found.iter().cloned().fold(f64::NAN, f64::max),
        exhaustive_median: exhaustive_expectation(m_dim, 1, 1)
            .map(|e| e.median as f64)
            .unwrap_or(f64::INFINITY),
        runs: hits.len(),
        missed: hits.iter().filter(|h| !h.found).count(),
    }
}

/// Cost of finding the fixed point of contracting positive systems of size
/// `ms`, a fresh system and search seed per entry of `seeds`.
pub fn scaling_by_dimension(
    ms: &[usize],
    seeds: &[u64],
    eps: f64,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Vec<DimensionScalingRow> {
    ms.iter()
        .map(|&m| {
            let hits: Vec<FirstHit> = seeds
                .par_iter()
                .map(|&s| {
                    let p = generate_case1_params(m, eps, rng::split(s, m as u64));
                    evaluations_to_first(&p, 1, &budget.with_seed(s), tol, |_| true)
                })
                .collect();
            dimension_row(m, &hits)
        })
        .collect()
}

/// Cost of recovering a fixed point embedded at a random location, with the
/// embedding initialised at `init_scale`.
pub fn scaling_embedded(
    ms: &[usize],
    seeds: &[u64],
    init_scale: f64,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Vec<DimensionScalingRow> {
    ms.iter()
        .map(|&m| {
            let hits: Vec<FirstHit> = seeds
                .par_iter()
                .filter_map(|&s| {
                    let mut r = rng::stream(s, 1000 + m as u64);
                    let z = DVector::from_fn(m, |_, _| {
                        let mag = r.gen_range(0.5..1.5);
                        if r.gen::<bool>() {
                            mag
                        } else {
                            -mag
                        }
                    });
                    let p = embed_fixed_point(&z, rng::split(s, m as u64), init_scale).ok()?;
                    let target = RegionCode::of(&z);
                    Some(evaluations_to_first(
                        &p,
                        1,
                        &budget.with_seed(s),
                        tol,
                        |c| c.region_seq.codes()[0] == target,
                    ))
                })
                .collect();
            dimension_row(m, &hits)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_basic() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn case1_needs_at_most_two_solves() {
        let rows = scaling_by_dimension(
            &[2, 8, 16],
            &(0..10).collect::<Vec<_>>(),
            0.1,
            &SearchBudget::fixed(1000, 100, 0),
            &Tolerances::default(),
        );
        for r in rows {
            assert_eq!(r.missed, 0);
            assert!(r.scyfi_max <= 2.0, "{r:?}");
        }
    }
}
