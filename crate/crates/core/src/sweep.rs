//! Cycle libraries along parameter grids or training traces, diffed between
//! neighbours and classified into bifurcation events.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plrnn::{PiecewiseLinearMap, PlrnnParams, RegionCode, RegionSequence};
use crate::pwl2d::{linspace, Pwl2dParams};
use crate::scyfi::{
    find_all, solve_cycle_candidate, CycleLibrary, CycleObject, SearchBudget, Stability,
    Tolerances,
};

/// A scalar parameter of a [`System`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParamTarget {
    /// Diagonal entry `a_i`.
    A(usize),
    W(usize, usize),
    H(usize),
    /// Named field of the planar one-border map.
    Pwl(String),
}

impl fmt::Display for ParamTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamTarget::A(i) => write!(f, "A[{i}]"),
            ParamTarget::W(i, j) => write!(f, "W[{i},{j}]"),
            ParamTarget::H(i) => write!(f, "h[{i}]"),
            ParamTarget::Pwl(name) => f.write_str(name),
        }
    }
}

impl FromStr for ParamTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Field {
            field: "target".into(),
            msg: format!("cannot parse `{s}` (expected A[i], W[i,j], h[i] or a planar field)"),
        };
        let s = s.trim();
        if let Some(name) = Pwl2dParams::FIELDS.iter().find(|f| **f == s) {
            return Ok(ParamTarget::Pwl(name.to_string()));
        }
        let open = s.find('[').ok_or_else(bad)?;
        if !s.ends_with(']') {
            return Err(bad());
        }
        let head = &s[..open];
        let idx: Vec<usize> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (head, idx.as_slice()) {
            ("A" | "a", [i]) => Ok(ParamTarget::A(*i)),
            ("W" | "w", [i, j]) => Ok(ParamTarget::W(*i, *j)),
            ("h" | "H", [i]) => Ok(ParamTarget::H(*i)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for ParamTarget {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ParamTarget {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Either kind of map the sweep can run on.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Plrnn(PlrnnParams),
    Pwl2d(Pwl2dParams),
}

impl System {
    pub fn get(&self, target: &ParamTarget) -> Result<f64> {
        let oob = || Error::OutOfRange(format!("{target} does not exist for this system"));
        match (self, target) {
            (System::Plrnn(p), ParamTarget::A(i)) => p.a.get(*i).copied().ok_or_else(oob),
            (System::Plrnn(p), ParamTarget::H(i)) => p.h.get(*i).copied().ok_or_else(oob),
            (System::Plrnn(p), ParamTarget::W(i, j)) => p.w.get((*i, *j)).copied().ok_or_else(oob),
            (System::Pwl2d(p), ParamTarget::Pwl(name)) => p.get(name).ok_or_else(oob),
            _ => Err(oob()),
        }
    }

    /// Copy with `target` set to `value`.
    pub fn with(&self, target: &ParamTarget, value: f64) -> Result<System> {
        self.get(target)?;
        let mut out = self.clone();
        match (&mut out, target) {
            (System::Plrnn(p), ParamTarget::A(i)) => p.a[*i] = value,
            (System::Plrnn(p), ParamTarget::H(i)) => p.h[*i] = value,
            (System::Plrnn(p), ParamTarget::W(i, j)) => p.w[(*i, *j)] = value,
            (System::Pwl2d(p), ParamTarget::Pwl(name)) => {
                p.set(name, value);
            }
            _ => unreachable!("checked by get"),
        }
        Ok(out)
    }

    /// Entrywise `(1 - s) self + s other`; both must be the same kind and size.
    pub fn lerp(&self, other: &System, s: f64) -> System {
        match (self, other) {
            (System::Plrnn(a), System::Plrnn(b)) => System::Plrnn(a.lerp(b, s)),
            (System::Pwl2d(a), System::Pwl2d(b)) => {
                let mut out = *a;
                for f in Pwl2dParams::FIELDS {
                    out.set(f, (1.0 - s) * a.get(f).unwrap() + s * b.get(f).unwrap());
                }
                System::Pwl2d(out)
            }
            _ => panic!("cannot interpolate between different system kinds"),
        }
    }
}

impl PiecewiseLinearMap for System {
    fn dim(&self) -> usize {
        match self {
            System::Plrnn(p) => p.m(),
            System::Pwl2d(_) => 2,
        }
    }

    fn switching_coords(&self) -> Vec<usize> {
        match self {
            System::Plrnn(p) => p.switching_coords(),
            System::Pwl2d(p) => p.switching_coords(),
        }
    }

    fn n_switches(&self) -> usize {
        match self {
            System::Plrnn(p) => p.m(),
            System::Pwl2d(_) => 1,
        }
    }

    fn step_matrix(&self, code: &RegionCode) -> DMatrix<f64> {
        match self {
            System::Plrnn(p) => PiecewiseLinearMap::step_matrix(p, code),
            System::Pwl2d(p) => p.step_matrix(code),
        }
    }

    fn bias(&self) -> DVector<f64> {
        match self {
            System::Plrnn(p) => p.bias(),
            System::Pwl2d(p) => p.bias(),
        }
    }

    fn region_code(&self, z: &DVector<f64>) -> RegionCode {
        match self {
            System::Plrnn(p) => p.region_code(z),
            System::Pwl2d(p) => p.region_code(z),
        }
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            System::Plrnn(p) => p.apply(z),
            System::Pwl2d(p) => p.apply(z),
        }
    }
}

/// One swept coordinate: `n_steps` values from `lo` to `hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub target: ParamTarget,
    pub lo: f64,
    pub hi: f64,
    pub n_steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.n_steps)
    }
}

/// Classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventThresholds {
    pub dtb_norm: f64,
    pub eig_tol: f64,
    /// Relative to `max(1, max |z|)`.
    pub bcb_tol: f64,
    /// Most bisection steps on a straddling interval; bisection also stops
    /// once the bracket reaches floating-point resolution.
    pub bisect_steps: usize,
}

impl Default for EventThresholds {
    fn default() -> Self {
        Self {
            dtb_norm: 1e6,
            eig_tol: 5e-2,
            bcb_tol: 1e-6,
            bisect_steps: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: System,
    pub axes: Vec<Axis>,
    pub k_max: usize,
    pub budget: SearchBudget,
    pub tol: Tolerances,
    pub thresholds: EventThresholds,
}

impl SweepSpec {
    pub fn new(base: System, axes: Vec<Axis>, k_max: usize, budget: SearchBudget) -> Self {
        Self {
            base,
            axes,
            k_max,
            budget,
            tol: Tolerances::default(),
            thresholds: EventThresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidParams("a sweep needs one or two axes".into()));
        }
        if self.axes.len() == 2 && self.axes[0].target == self.axes[1].target {
            return Err(Error::InvalidParams("sweep axes must be distinct".into()));
        }
        for ax in &self.axes {
            if ax.n_steps < 2 {
                return Err(Error::InvalidParams(format!("axis {} needs n_steps >= 2", ax.target)));
            }
            self.base.get(&ax.target)?;
        }
        if self.k_max == 0 {
            return Err(Error::InvalidParams("k_max must be at least 1".into()));
        }
        Ok(())
    }

    /// The system at a grid index.
    pub fn system_at(&self, index: &[usize]) -> Result<System> {
        self.system_at_coords(&self.coords(index))
    }

    pub fn coords(&self, index: &[usize]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(index)
            .map(|(ax, &i)| ax.lo + (ax.hi - ax.lo) * i as f64 / (ax.n_steps - 1) as f64)
            .collect()
    }

    pub fn system_at_coords(&self, coords: &[f64]) -> Result<System> {
        let mut sys = self.base.clone();
        for (ax, &v) in self.axes.iter().zip(coords) {
            sys = sys.with(&ax.target, v)?;
        }
        Ok(sys)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "DTB")]
    Dtb,
    #[serde(rename = "BCB")]
    Bcb,
    #[serde(rename = "DFB")]
    Dfb,
    #[serde(rename = "CB")]
    Cb,
    #[serde(rename = "appear")]
    Appear,
    #[serde(rename = "disappear")]
    Disappear,
    #[serde(rename = "stability_change")]
    StabilityChange,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Dtb => "DTB",
            EventKind::Bcb => "BCB",
            EventKind::Dfb => "DFB",
            EventKind::Cb => "CB",
            EventKind::Appear => "appear",
            EventKind::Disappear => "disappear",
            EventKind::StabilityChange => "stability_change",
        }
    }

    /// DTB or BCB.
    pub fn is_border_or_infinity(self) -> bool {
        matches!(self, EventKind::Dtb | EventKind::Bcb)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Measurements supporting a classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub max_point_norm: f64,
    pub min_abs_component: f64,
    /// Eigenvalue closest to the unit circle, `[re, im]`.
    pub eig_near: Option<[f64; 2]>,
}

/// Where an event happened: between two grid cells (or epochs), refined to a
/// parameter bracket along the segment joining them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLocation {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    /// Refined position along the segment, `0` at `from`, `1` at `to`.
    pub s: f64,
    /// Width of the final bracket in segment units.
    pub width: f64,
    /// Refined parameter coordinates (axis values, or fractional epoch).
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub loc: EventLocation,
    pub kind: EventKind,
    pub order: usize,
    pub seq: RegionSequence,
    pub evidence: Evidence,
}

fn eig_closest_to_circle(eigs: &[Complex64]) -> Option<Complex64> {
    eigs.iter()
        .copied()
        .min_by(|a, b| (a.norm() - 1.0).abs().partial_cmp(&(b.norm() - 1.0).abs()).unwrap())
}

fn evidence_of(obj: &CycleObject, coords: &[usize]) -> Evidence {
    Evidence {
        max_point_norm: obj.max_point_norm(),
        min_abs_component: obj.min_abs_component(coords),
        eig_near: eig_closest_to_circle(&obj.eigenvalues).map(|e| [e.re, e.im]),
    }
}

fn is_dtb(obj: &CycleObject, th: &EventThresholds) -> bool {
    obj.max_point_norm() > th.dtb_norm
        && obj
            .eigenvalues
            .iter()
            .any(|e| (e - Complex64::new(1.0, 0.0)).norm() < th.eig_tol)
}

fn is_bcb(obj: &CycleObject, coords: &[usize], th: &EventThresholds) -> bool {
    obj.min_abs_component(coords) <= th.bcb_tol * obj.scale()
}

fn is_dfb(obj: &CycleObject, th: &EventThresholds) -> bool {
    obj.eigenvalues
        .iter()
        .any(|e| (e - Complex64::new(-1.0, 0.0)).norm() < th.eig_tol)
}

fn is_cb(obj: &CycleObject, th: &EventThresholds) -> bool {
    obj.eigenvalues
        .iter()
        .any(|e| e.im.abs() > 1e-12 && (e.norm() - 1.0).abs() < th.eig_tol)
}

/// Classify the change from `before` to `after` (either may be absent).
/// `coords` are the switching coordinates of the map.
pub fn classify_event(
    before: Option<&CycleObject>,
    after: Option<&CycleObject>,
    coords: &[usize],
    th: &EventThresholds,
) -> Result<EventKind> {
    match (before, after) {
        (None, None) => Err(Error::InvalidParams(
            "classify_event needs at least one object".into(),
        )),
        (Some(o), None) | (None, Some(o)) => Ok(if is_dtb(o, th) {
            EventKind::Dtb
        } else if is_bcb(o, coords, th) {
            EventKind::Bcb
        } else if before.is_some() {
            EventKind::Disappear
        } else {
            EventKind::Appear
        }),
        (Some(b), Some(a)) => Ok(if is_dtb(b, th) || is_dtb(a, th) {
            EventKind::Dtb
        } else if is_dfb(b, th) || is_dfb(a, th) {
            EventKind::Dfb
        } else if is_cb(b, th) || is_cb(a, th) {
            EventKind::Cb
        } else {
            EventKind::StabilityChange
        }),
    }
}

/// The object with region sequence `seq` at `sys`, if it exists there.
pub fn object_at<M: PiecewiseLinearMap + ?Sized>(
    sys: &M,
    seq: &RegionSequence,
    tol: &Tolerances,
) -> Option<CycleObject> {
    match solve_cycle_candidate(sys, seq, tol) {
        Ok(c) if c.consistent && c.distinct => Some(CycleObject::new(sys, seq, c.points, tol)),
        _ => None,
    }
}

/// A detected change along one segment, before mapping to grid coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEvent {
    pub kind: EventKind,
    pub order: usize,
    pub seq: RegionSequence,
    pub s: f64,
    pub width: f64,
    pub evidence: Evidence,
}

/// Bisect `[0, 1]` for the switch of `pred`, given `pred(0) != pred(1)`.
fn bisect<F: Fn(f64) -> bool>(pred: F, steps: usize) -> (f64, f64) {
    let left = pred(0.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) == left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Diff the libraries at both ends of the segment `s -> sys(s)`, `s` in `[0, 1]`,
/// refining and classifying every change.
pub fn diff_segment<F>(
    sys: F,
    lib0: &CycleLibrary,
    lib1: &CycleLibrary,
    tol: &Tolerances,
    th: &EventThresholds,
) -> Vec<SegmentEvent>
where
    F: Fn(f64) -> System + Sync,
{
    let coords = sys(0.0).switching_coords();
    let mut seqs: Vec<RegionSequence> = lib0
        .iter()
        .chain(lib1.iter())
        .map(|c| c.region_seq.clone())
        .collect();
    seqs.sort();
    seqs.dedup();

    let mut out = Vec::new();
    let mut gone = Vec::new();
    let mut born = Vec::new();
    for seq in seqs {
        let (b, a) = (lib0.get(&seq), lib1.get(&seq));
        let order = seq.len();
        match (b, a) {
            (Some(b), Some(a)) => {
                if b.stability == a.stability {
                    continue;
                }
                let stab = |s: f64| object_at(&sys(s), &seq, tol).map(|o| o.stability);
                let left = b.stability;
                let (lo, hi) = bisect(|s| stab(s) == Some(left), th.bisect_steps);
                let ob = object_at(&sys(lo), &seq, tol).unwrap_or_else(|| b.clone());
                let oa = object_at(&sys(hi), &seq, tol).unwrap_or_else(|| a.clone());
                let kind = classify_event(Some(&ob), Some(&oa), &coords, th).unwrap();
                out.push(SegmentEvent {
                    kind,
                    order,
                    seq: seq.clone(),
                    s: 0.5 * (lo + hi),
                    width: hi - lo,
                    evidence: evidence_of(&ob, &coords),
                });
            }
            (Some(_), None) | (None, Some(_)) => {
                let exists = |s: f64| object_at(&sys(s), &seq, tol).is_some();
                let e0 = exists(0.0);
                if e0 == exists(1.0) {
                    // the search missed it on one side; not a change
                    continue;
                }
                let (lo, hi) = bisect(exists, th.bisect_steps);
                let survivor_at = if e0 { lo } else { hi };
                let obj = object_at(&sys(survivor_at), &seq, tol).expect("exists by bisection");
                let kind = if e0 {
                    classify_event(Some(&obj), None, &coords, th)
                } else {
                    classify_event(None, Some(&obj), &coords, th)
                }
                .unwrap();
                let ev = SegmentEvent {
                    kind,
                    order,
                    seq: seq.clone(),
                    s: 0.5 * (lo + hi),
                    width: hi - lo,
                    evidence: evidence_of(&obj, &coords),
                };
                if e0 {
                    gone.push((ev, obj));
                } else {
                    born.push((ev, obj));
                }
            }
            (None, None) => unreachable!(),
        }
    }

    // an object whose points slide across a border changes its sequence: pair
    // a disappearance with an appearance of the same order at the same spot
    let mut used = vec![false; born.len()];
    for (g, gobj) in gone {
        let partner = born.iter().enumerate().position(|(i, (b, bobj))| {
            !used[i]
                && b.order == g.order
                && (b.s - g.s).abs() <= (b.width.max(g.width) * 2.0).max(1e-9)
                && gobj.distance(bobj) <= 1e-3 * gobj.scale().max(bobj.scale())
        });
        match partner {
            Some(i) => {
                used[i] = true;
                out.push(SegmentEvent {
                    kind: EventKind::Bcb,
                    ..g
                });
            }
            None => out.push(g),
        }
    }
    for (i, (b, _)) in born.into_iter().enumerate() {
        if !used[i] {
            out.push(b);
        }
    }
    out.sort_by(|a, b| {
        a.s.partial_cmp(&b.s)
            .unwrap()
            .then(a.order.cmp(&b.order))
            .then(a.seq.cmp(&b.seq))
    });
    out
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    pub library: CycleLibrary,
}

impl SweepCell {
    /// A degenerate solve occurred here: the cell sits on a bifurcation manifold.
    pub fn on_manifold(&self) -> bool {
        !self.library.degenerate.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub cells: Vec<SweepCell>,
    pub events: Vec<BifurcationEvent>,
}

impl SweepResult {
    pub fn cell(&self, index: &[usize]) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.index == index)
    }
}

fn grid_indices(axes: &[Axis]) -> Vec<Vec<usize>> {
    match axes.len() {
        1 => (0..axes[0].n_steps).map(|i| vec![i]).collect(),
        _ => (0..axes[0].n_steps)
            .flat_map(|i| (0..axes[1].n_steps).map(move |j| vec![i, j]))
            .collect(),
    }
}

/// Search every grid cell, then diff neighbours along each axis.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let indices = grid_indices(&spec.axes);
    let cells: Vec<SweepCell> = indices
        .par_iter()
        .map(|idx| {
            let sys = spec.system_at(idx)?;
            Ok(SweepCell {
                index: idx.clone(),
                coords: spec.coords(idx),
                library: find_all(&sys, spec.k_max, &spec.budget, &spec.tol),
            })
        })
        .collect::<Result<_>>()?;

    let pos = |idx: &[usize]| -> usize {
        match idx.len() {
            1 => idx[0],
            _ => idx[0] * spec.axes[1].n_steps + idx[1],
        }
    };
    let mut pairs = Vec::new();
    for idx in &indices {
        for axis in 0..spec.axes.len() {
            if idx[axis] + 1 < spec.axes[axis].n_steps {
                let mut next = idx.clone();
                next[axis] += 1;
                pairs.push((idx.clone(), next));
            }
        }
    }
    let events: Vec<Vec<BifurcationEvent>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let (ca, cb) = (&cells[pos(a)], &cells[pos(b)]);
            let (xa, xb) = (ca.coords.clone(), cb.coords.clone());
            let at = |s: f64| -> Vec<f64> {
                xa.iter().zip(&xb).map(|(p, q)| p + s * (q - p)).collect()
            };
            let seg = diff_segment(
                |s| spec.system_at_coords(&at(s)).expect("validated"),
                &ca.library,
                &cb.library,
                &spec.tol,
                &spec.thresholds,
            );
            seg.into_iter()
                .map(|e| BifurcationEvent {
                    loc: EventLocation {
                        from: a.clone(),
                        to: b.clone(),
                        s: e.s,
                        width: e.width,
                        coords: at(e.s),
                    },
                    kind: e.kind,
                    order: e.order,
                    seq: e.seq,
                    evidence: e.evidence,
                })
                .collect()
        })
        .collect();
    Ok(SweepResult {
        axes: spec.axes.clone(),
        cells,
        events: events.into_iter().flatten().collect(),
    })
}

/// Per-epoch libraries and the events between consecutive epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceAnalysis {
    pub libraries: Vec<CycleLibrary>,
    pub events: Vec<BifurcationEvent>,
}

/// Treat a sequence of parameter snapshots as a one-dimensional sweep,
/// interpolating linearly between consecutive epochs for refinement.
pub fn analyze_training_trace(
    snapshots: &[PlrnnParams],
    k_max: usize,
    budget: &SearchBudget,
    tol: &Tolerances,
    th: &EventThresholds,
) -> Result<TraceAnalysis> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidParams("need at least two snapshots".into()));
    }
    let libraries: Vec<CycleLibrary> = snapshots
        .par_iter()
        .map(|p| find_all(p, k_max, budget, tol))
        .collect();
    let events: Vec<Vec<BifurcationEvent>> = (0..snapshots.len() - 1)
        .into_par_iter()
        .map(|e| {
            let (a, b) = (&snapshots[e], &snapshots[e + 1]);
            if a == b {
                return Vec::new();
            }
            diff_segment(
                |s| System::Plrnn(a.lerp(b, s)),
                &libraries[e],
                &libraries[e + 1],
                tol,
                th,
            )
            .into_iter()
            .map(|ev| BifurcationEvent {
                loc: EventLocation {
                    from: vec![e],
                    to: vec![e + 1],
                    s: ev.s,
                    width: ev.width,
                    coords: vec![e as f64 + ev.s],
                },
                kind: ev.kind,
                order: ev.order,
                seq: ev.seq,
                evidence: ev.evidence,
            })
            .collect()
        })
        .collect();
    Ok(TraceAnalysis {
        libraries,
        events: events.into_iter().flatten().collect(),
    })
}

/// One point of a bifurcation diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramRow {
    /// Epoch index or parameter value.
    pub value: f64,
    pub order: usize,
    pub point: usize,
    pub stability: Stability,
    /// Projection on the supplied direction, or the first coordinate.
    pub projected: f64,
}

/// Flatten libraries into diagram rows; `direction` is normalised if given.
pub fn diagram_rows(
    values: &[f64],
    libraries: &[CycleLibrary],
    direction: Option<&DVector<f64>>,
) -> Vec<DiagramRow> {
    let dir = direction.map(|d| d / d.norm().max(f64::MIN_POSITIVE));
    let mut rows = Vec::new();
    for (&v, lib) in values.iter().zip(libraries) {
        for c in lib.iter() {
            for (l, z) in c.points.iter().enumerate() {
                rows.push(DiagramRow {
                    value: v,
                    order: c.order,
                    point: l,
                    stability: c.stability,
                    projected: dir.as_ref().map(|d| d.dot(z)).unwrap_or(z[0]),
                });
            }
        }
    }
    rows
}
