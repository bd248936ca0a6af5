//! Region-flipping search for fixed points and `k`-cycles.
//!
//! A guessed region sequence fixes one affine map per step, so the candidate
//! cycle is the solution of a single linear system. When the solution's own
//! region codes disagree with the guess, the guess is replaced by the observed
//! codes and the system is solved again.

mod exhaustive;
mod generators;
mod scaling;

use std::collections::{BTreeMap, HashSet};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::plrnn::{PiecewiseLinearMap, RegionCode, RegionSequence, DEFAULT_BORDER_EPS};
use crate::rng;

pub use exhaustive::{
    exhaustive_expectation, exhaustive_oracle, exhaustive_oracle_with_guard,
    is_primitive, required_initializations, Expectation, DEFAULT_ENUMERATION_GUARD,
};
pub use generators::{
    embed_fixed_point, embed_fixed_point_with, generate_case1_params, generate_case2_params,
    random_params, EmbedReport,
};
pub use scaling::{
    evaluations_to_first, median, order_benchmark_systems, scaling_by_dimension, scaling_by_order, scaling_embedded,
    DimensionScalingRow, FirstHit, OrderScalingRow,
};

pub const DEFAULT_POINT_TOL: f64 = 1e-9;
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-12;
pub const DEFAULT_STAB_TOL: f64 = 1e-9;
/// Upper bound on automatically sized outer loops.
pub const DEFAULT_NOUT_CAP: u64 = 1_000_000;
pub const DEFAULT_NIN: usize = 100;
pub const DEFAULT_MISS_PROB: f64 = 1e-3;

/// Numerical tolerances shared by the search, the oracle and the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Closure residual and point distinctness, relative to `max(1, |z|)`.
    pub point_tol: f64,
    /// Minimum reciprocal condition number of `I - P`.
    pub singular_tol: f64,
    /// Half width of the marginal band around `|lambda| = 1`.
    pub stab_tol: f64,
    pub border_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            point_tol: DEFAULT_POINT_TOL,
            singular_tol: DEFAULT_SINGULAR_TOL,
            stab_tol: DEFAULT_STAB_TOL,
            border_eps: DEFAULT_BORDER_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn from_radius(max_abs_eig: f64, stab_tol: f64) -> Self {
        if max_abs_eig < 1.0 - stab_tol {
            Stability::Stable
        } else if max_abs_eig > 1.0 + stab_tol {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A verified periodic orbit. Points are stored in the rotation that makes
/// `region_seq` canonical, so equal cycles compare equal field by field.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleObject {
    pub order: usize,
    pub points: Vec<DVector<f64>>,
    pub region_seq: RegionSequence,
    /// Eigenvalues of the cycle Jacobian, sorted by `(re, im)`.
    pub eigenvalues: Vec<Complex64>,
    pub stability: Stability,
    pub max_abs_eig: f64,
}

impl CycleObject {
    /// Build from a solved sequence; rotates into canonical order and computes the spectrum.
    pub fn new<M: PiecewiseLinearMap + ?Sized>(
        map: &M,
        seq: &RegionSequence,
        points: Vec<DVector<f64>>,
        tol: &Tolerances,
    ) -> Self {
        let k = seq.len();
        let shift = seq.canonical_shift();
        let region_seq = seq.rotated(shift);
        let points: Vec<_> = (0..k).map(|l| points[(l + shift) % k].clone()).collect();
        let jac = cycle_jacobian(map, &region_seq);
        let eigenvalues = linalg::eigenvalues(&jac);
        let max_abs_eig = eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
        Self {
            order: k,
            points,
            region_seq,
            eigenvalues,
            stability: Stability::from_radius(max_abs_eig, tol.stab_tol),
            max_abs_eig,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }

    /// `max(1, max_l |z_l|_inf)`, the scale used for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.points.iter().map(|p| p.amax()).fold(1.0, f64::max)
    }

    /// Largest Euclidean norm among the points.
    pub fn max_point_norm(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Smallest `|z_m|` over all points and the given coordinates.
    pub fn min_abs_component(&self, coords: &[usize]) -> f64 {
        self.points
            .iter()
            .flat_map(|p| coords.iter().map(move |&m| p[m].abs()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Re-check closure, self-consistency and distinctness against `map`.
    pub fn verify<M: PiecewiseLinearMap + ?Sized>(
        &self,
        map: &M,
        tol: &Tolerances,
    ) -> Result<(), String> {
        let k = self.order;
        if self.points.len() != k || self.region_seq.len() != k {
            return Err("order does not match points/codes".into());
        }
        let scale = self.scale();
        for l in 0..k {
            let next = map.apply(&self.points[l]);
            let res = (&next - &self.points[(l + 1) % k]).amax();
            if res > tol.point_tol * scale {
                return Err(format!("closure residual {res:e} at point {l}"));
            }
            let code = map.region(&self.points[l], tol.border_eps).code;
            if code != self.region_seq.codes()[l] {
                return Err(format!(
                    "point {l} lies in {code}, expected {}",
                    self.region_seq.codes()[l]
                ));
            }
        }
        if min_pairwise_distance(&self.points) <= tol.point_tol * scale {
            return Err("points are not pairwise distinct".into());
        }
        Ok(())
    }

    /// Smallest over rotations of the largest point mismatch (`inf` for different orders).
    pub fn distance(&self, other: &CycleObject) -> f64 {
        if self.order != other.order {
            return f64::INFINITY;
        }
        let k = self.order;
        (0..k)
            .map(|r| {
                (0..k)
                    .map(|l| (&self.points[l] - &other.points[(l + r) % k]).amax())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// True if every point of `other` coincides with some point of `self`.
    pub fn contains_points_of(&self, other: &CycleObject, tol: f64) -> bool {
        let scale = self.scale().max(other.scale());
        other.points.iter().all(|q| {
            self.points
                .iter()
                .any(|p| (p - q).amax() <= tol * scale)
        })
    }
}

/// Product of the per-step matrices along `seq`.
pub fn cycle_jacobian<M: PiecewiseLinearMap + ?Sized>(map: &M, seq: &RegionSequence) -> DMatrix<f64> {
    let n = map.dim();
    seq.codes()
        .iter()
        .fold(DMatrix::identity(n, n), |acc, c| map.step_matrix(c) * acc)
}

pub(crate) fn min_pairwise_distance(points: &[DVector<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((&points[i] - &points[j]).amax());
        }
    }
    best
}

/// A region sequence whose linear system could not be solved reliably.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateRecord {
    pub order: usize,
    /// Canonical rotation.
    pub seq: RegionSequence,
    pub rcond: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Stored,
    /// Same canonical sequence or same point set as a stored cycle.
    Duplicate,
    /// Contains the points of a stored lower-order cycle.
    Superset,
}

/// All cycles found for one parameter set, keyed by order and kept sorted by
/// canonical region sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CycleLibrary {
    pub by_order: BTreeMap<usize, Vec<CycleObject>>,
    pub degenerate: Vec<DegenerateRecord>,
    /// Number of linear solves performed per order.
    pub evaluations: BTreeMap<usize, u64>,
}

impl CycleLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cycles(&self, k: usize) -> &[CycleObject] {
        self.by_order.get(&k).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn count(&self, k: usize) -> usize {
        self.cycles(k).len()
    }

    pub fn total(&self) -> usize {
        self.by_order.values().map(|v| v.len()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CycleObject> {
        self.by_order.values().flat_map(|v| v.iter())
    }

    pub fn n_with(&self, stability: Stability) -> usize {
        self.iter().filter(|c| c.stability == stability).count()
    }

    pub fn max_order(&self) -> usize {
        self.by_order
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, _)| *k)
            .max()
            .unwrap_or(0)
    }

    pub fn total_evaluations(&self) -> u64 {
        self.evaluations.values().sum()
    }

    /// Look up a cycle by (any rotation of) its region sequence.
    pub fn get(&self, seq: &RegionSequence) -> Option<&CycleObject> {
        let canon = seq.canonical();
        let list = self.by_order.get(&seq.len())?;
        list.binary_search_by(|c| c.region_seq.cmp(&canon))
            .ok()
            .map(|i| &list[i])
    }

    /// Store `cycle` unless it duplicates a stored cycle or contains the points
    /// of a stored cycle of lower order.
    pub fn try_insert(&mut self, cycle: CycleObject, tol: &Tolerances) -> InsertOutcome {
        for (&j, list) in self.by_order.range(..=cycle.order) {
            for other in list {
                if j == cycle.order {
                    if other.region_seq == cycle.region_seq
                        || cycle.distance(other) <= tol.point_tol * cycle.scale().max(other.scale())
                    {
                        return InsertOutcome::Duplicate;
                    }
                } else if cycle.contains_points_of(other, tol.point_tol) {
                    return InsertOutcome::Superset;
                }
            }
        }
        let list = self.by_order.entry(cycle.order).or_default();
        let pos = list
            .binary_search_by(|c| c.region_seq.cmp(&cycle.region_seq))
            .unwrap_or_else(|p| p);
        list.insert(pos, cycle);
        InsertOutcome::Stored
    }

    pub fn record_degenerate(&mut self, seq: &RegionSequence, rcond: f64) {
        let canon = seq.canonical();
        if !self
            .degenerate
            .iter()
            .any(|d| d.order == canon.len() && d.seq == canon)
        {
            self.degenerate.push(DegenerateRecord {
                order: canon.len(),
                seq: canon,
                rcond,
            });
        }
    }

    pub fn add_evaluations(&mut self, k: usize, n: u64) {
        *self.evaluations.entry(k).or_default() += n;
    }

    /// Compare the stored cycles (not counters) of two libraries: same orders,
    /// same sequences, points and eigenvalues within `tol` (relative to scale).
    pub fn matches(&self, other: &CycleLibrary, tol: f64) -> Result<(), String> {
        let orders = |l: &CycleLibrary| -> Vec<usize> {
            l.by_order
                .iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, _)| *k)
                .collect()
        };
        if orders(self) != orders(other) {
            return Err(format!(
                "orders differ: {:?} vs {:?}",
                orders(self),
                orders(other)
            ));
        }
        for (k, list) in &self.by_order {
            let theirs = other.cycles(*k);
            if list.len() != theirs.len() {
                return Err(format!(
                    "order {k}: {} vs {} cycles",
                    list.len(),
                    theirs.len()
                ));
            }
            for (a, b) in list.iter().zip(theirs) {
                if a.region_seq != b.region_seq {
                    return Err(format!("order {k}: {} vs {}", a.region_seq, b.region_seq));
                }
                let scale = a.scale().max(b.scale());
                let d = a.distance(b);
                if d > tol * scale {
                    return Err(format!("order {k} {}: points differ by {d:e}", a.region_seq));
                }
                let de = a
                    .eigenvalues
                    .iter()
                    .zip(&b.eigenvalues)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                if a.eigenvalues.len() != b.eigenvalues.len() || de > tol * a.max_abs_eig.max(1.0) {
                    return Err(format!(
                        "order {k} {}: eigenvalues differ by {de:e}",
                        a.region_seq
                    ));
                }
            }
        }
        Ok(())
    }
}

/// How many random initialisations the outer loop may draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OuterBudget {
    Fixed(u64),
    /// Enough draws that a given sequence is missed with probability `miss_prob`, capped at `cap`.
    Auto { miss_prob: f64, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub n_out: OuterBudget,
    pub n_in: usize,
    pub rng_seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self::auto(DEFAULT_MISS_PROB, 0)
    }
}

impl SearchBudget {
    pub fn fixed(n_out: u64, n_in: usize, rng_seed: u64) -> Self {
        Self {
            n_out: OuterBudget::Fixed(n_out.max(1)),
            n_in: n_in.max(1),
            rng_seed,
        }
    }

    pub fn auto(miss_prob: f64, rng_seed: u64) -> Self {
        Self {
            n_out: OuterBudget::Auto {
                miss_prob,
                cap: DEFAULT_NOUT_CAP,
            },
            n_in: DEFAULT_NIN,
            rng_seed,
        }
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    pub fn with_n_in(mut self, n_in: usize) -> Self {
        self.n_in = n_in.max(1);
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        if let OuterBudget::Auto { miss_prob, .. } = self.n_out {
            self.n_out = OuterBudget::Auto { miss_prob, cap };
        }
        self
    }

    /// Outer-loop size for codes of `bits` bits and order `k`.
    pub fn n_out_for(&self, bits: usize, k: usize) -> u64 {
        match self.n_out {
            OuterBudget::Fixed(n) => n.max(1),
            OuterBudget::Auto { miss_prob, cap } => {
                required_initializations(bits, k, miss_prob).clamp(1, cap.max(1))
            }
        }
    }
}

/// A solved candidate; `consistent` means the points lie in the guessed regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// `points[l]` is the input to step `l`.
    pub points: Vec<DVector<f64>>,
    pub observed_seq: RegionSequence,
    pub consistent: bool,
    /// Some component of some point is within `border_eps` of a border.
    pub on_border: bool,
    /// Points are pairwise distinct, so `k` is the minimal period.
    pub distinct: bool,
    pub rcond: f64,
}

/// `I - P` was numerically singular for the guessed sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degenerate {
    pub rcond: f64,
}

/// Solve for the cycle whose `l`-th point lies in `seq.codes()[l]`.
pub fn solve_cycle_candidate<M: PiecewiseLinearMap + ?Sized>(
    map: &M,
    seq: &RegionSequence,
    tol: &Tolerances,
) -> Result<Candidate, Degenerate> {
    let n = map.dim();
    let h = map.bias();
    let mats: Vec<DMatrix<f64>> = seq.codes().iter().map(|c| map.step_matrix(c)).collect();
    let mut p = DMatrix::identity(n, n);
    let mut q = DVector::zeros(n);
    for m in &mats {
        q = m * q + &h;
        p = m * p;
    }
    let lhs = DMatrix::identity(n, n) - p;
    let solved = linalg::solve_checked(&lhs, &q, tol.singular_tol).map_err(|rcond| Degenerate { rcond })?;
    let mut points = Vec::with_capacity(mats.len());
    points.push(solved.x);
    for m in &mats[..mats.len() - 1] {
        let next = m * points.last().unwrap() + &h;
        points.push(next);
    }
    let regions: Vec<_> = points.iter().map(|z| map.region(z, tol.border_eps)).collect();
    let on_border = regions.iter().any(|r| r.any_on_border());
    let observed_seq = RegionSequence::new(regions.into_iter().map(|r| r.code).collect());
    let scale = points.iter().map(|z| z.amax()).fold(1.0, f64::max);
    let distinct = min_pairwise_distance(&points) > tol.point_tol * scale;
    Ok(Candidate {
        consistent: observed_seq == *seq,
        observed_seq,
        points,
        on_border,
        distinct,
        rcond: solved.rcond,
    })
}

/// Hooks into the search loop. Returning `false` stops the search.
pub trait SearchObserver {
    fn evaluated(
        &mut self,
        _seq: &RegionSequence,
        _fresh_draw: bool,
        _outcome: &Result<Candidate, Degenerate>,
    ) -> bool {
        true
    }

    fn stored(&mut self, _cycle: &CycleObject) -> bool {
        true
    }
}

impl SearchObserver for () {}

/// Counters of one `find_k` run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub evaluations: u64,
    pub draws: u64,
    pub stored: u64,
    pub degenerate: u64,
    pub stopped: bool,
}

/// Draw `k` codes of `bits` bits uniformly, rejecting constant sequences for `k >= 2`.
pub fn random_sequence<R: Rng + ?Sized>(rng: &mut R, bits: usize, k: usize) -> RegionSequence {
    loop {
        let seq = RegionSequence::new(
            (0..k)
                .map(|_| RegionCode::new((0..bits).map(|_| rng.gen::<bool>()).collect()))
                .collect(),
        );
        if k == 1 || !seq.is_constant() {
            return seq;
        }
    }
}

/// Search for `k`-cycles, adding them to `library`.
pub fn find_k<M: PiecewiseLinearMap + ?Sized>(
    map: &M,
    k: usize,
    library: &mut CycleLibrary,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> SearchStats {
    find_k_observed(map, k, library, budget, tol, &mut ())
}

/// [`find_k`] with an observer attached.
pub fn find_k_observed<M: PiecewiseLinearMap + ?Sized, O: SearchObserver + ?Sized>(
    map: &M,
    k: usize,
    library: &mut CycleLibrary,
    budget: &SearchBudget,
    tol: &Tolerances,
    observer: &mut O,
) -> SearchStats {
    assert!(k >= 1, "cycle order must be at least 1");
    let bits = map.n_switches();
    let n_out = budget.n_out_for(bits, k);
    let n_in = budget.n_in.max(1);
    let mut rng = rng::stream(budget.rng_seed, k as u64);
    let mut stats = SearchStats::default();
    let mut visited: HashSet<RegionSequence> = HashSet::new();

    let mut since_store = 0u64;
    'outer: while since_store < n_out {
        since_store += 1;
        stats.draws += 1;
        let mut seq = random_sequence(&mut rng, bits, k);
        visited.clear();
        for c in 0..n_in {
            if !visited.insert(seq.canonical()) {
                break;
            }
            stats.evaluations += 1;
            let outcome = solve_cycle_candidate(map, &seq, tol);
            let go_on = observer.evaluated(&seq, c == 0, &outcome);
            match outcome {
                Err(Degenerate { rcond }) => {
                    stats.degenerate += 1;
                    library.record_degenerate(&seq, rcond);
                    if !go_on {
                        stats.stopped = true;
                        break 'outer;
                    }
                    break;
                }
                Ok(cand) => {
                    if !go_on {
                        stats.stopped = true;
                        break 'outer;
                    }
                    if cand.consistent && cand.distinct {
                        let obj = CycleObject::new(map, &seq, cand.points, tol);
                        let snapshot = obj.clone();
                        if library.try_insert(obj, tol) == InsertOutcome::Stored {
                            stats.stored += 1;
                            since_store = 0;
                            if !observer.stored(&snapshot) {
                                stats.stopped = true;
                                break 'outer;
                            }
                            break;
                        }
                    }
                    seq = cand.observed_seq;
                }
            }
        }
    }
    library.add_evaluations(k, stats.evaluations);
    stats
}

/// Run the search for every order `1..=k_max`, threading one library.
pub fn find_all<M: PiecewiseLinearMap + ?Sized>(
    map: &M,
    k_max: usize,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> CycleLibrary {
    let mut lib = CycleLibrary::new();
    for k in 1..=k_max {
        find_k(map, k, &mut lib, budget, tol);
    }
    lib
}
