//! Closed-form analysis of the planar map with a single switching border
//!
//! ```text
//! T(z) = A_L z + h   if z1 <= 0,     A_L = [[a_l, c], [b_l, d]]
//! T(z) = A_R z + h   if z1 >  0,     A_R = [[a_r, c], [b_r, d]]
//! ```
//!
//! Fixed points, the 2-cycle `RL` and the 3-cycles `RL^2`, `R^2L` are solved
//! directly from 2x2 algebra, independent of the generic cycle search.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::plrnn::{PiecewiseLinearMap, PlrnnParams, RegionCode, RegionSequence};

/// Relative size below which a determinant counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Relative distance to the border below which a point counts as on it.
pub const ON_CURVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pwl2dParams {
    pub a_l: f64,
    pub a_r: f64,
    pub b_l: f64,
    pub b_r: f64,
    pub c: f64,
    pub d: f64,
    pub h1: f64,
    pub h2: f64,
}

type Mat2 = [[f64; 2]; 2];
type Vec2 = [f64; 2];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn apply(a: &Mat2, v: &Vec2, h: &Vec2) -> Vec2 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + h[0],
        a[1][0] * v[0] + a[1][1] * v[1] + h[1],
    ]
}

fn trace(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

impl Pwl2dParams {
    /// Planar PLRNN with `W = [[w11, 0], [w21, 0]]`: `a_l = a11`, `a_r = a11 + w11`,
    /// `b_r = w21`, `d = a22`, `b_l = c = 0`.
    pub fn from_restricted(a11: f64, w11: f64, w21: f64, a22: f64, h1: f64, h2: f64) -> Self {
        Self {
            a_l: a11,
            a_r: a11 + w11,
            b_l: 0.0,
            b_r: w21,
            c: 0.0,
            d: a22,
            h1,
            h2,
        }
    }

    /// From a planar PLRNN in restricted form; `None` unless `M = 2` and the
    /// second column of `W` vanishes.
    pub fn from_plrnn(p: &PlrnnParams) -> Option<Self> {
        if p.m() != 2 || p.w[(0, 1)] != 0.0 || p.w[(1, 1)] != 0.0 {
            return None;
        }
        Some(Self::from_restricted(
            p.a[0],
            p.w[(0, 0)],
            p.w[(1, 0)],
            p.a[1],
            p.h[0],
            p.h[1],
        ))
    }

    /// Planar network with a leaky unit `phi_1(z) = z (z > 0), alpha z (z <= 0)`
    /// and a linear second unit `phi_2(z) = beta z`.
    pub fn from_leaky(a11: f64, a22: f64, w: [[f64; 2]; 2], alpha: f64, beta: f64, h: [f64; 2]) -> Self {
        Self {
            a_l: a11 + alpha * w[0][0],
            a_r: a11 + w[0][0],
            b_l: alpha * w[1][0],
            b_r: w[1][0],
            c: beta * w[0][1],
            d: a22 + beta * w[1][1],
            h1: h[0],
            h2: h[1],
        }
    }

    pub fn left(&self) -> Mat2 {
        [[self.a_l, self.c], [self.b_l, self.d]]
    }

    pub fn right(&self) -> Mat2 {
        [[self.a_r, self.c], [self.b_r, self.d]]
    }

    pub fn h(&self) -> Vec2 {
        [self.h1, self.h2]
    }

    /// One application of the map on a plain pair.
    pub fn step(&self, z: Vec2) -> Vec2 {
        let m = if z[0] > 0.0 { self.right() } else { self.left() };
        apply(&m, &z, &self.h())
    }

    /// Field access by name (`a_l`, `a_r`, `b_l`, `b_r`, `c`, `d`, `h1`, `h2`).
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "a_l" => self.a_l,
            "a_r" => self.a_r,
            "b_l" => self.b_l,
            "b_r" => self.b_r,
            "c" => self.c,
            "d" => self.d,
            "h1" => self.h1,
            "h2" => self.h2,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "a_l" => &mut self.a_l,
            "a_r" => &mut self.a_r,
            "b_l" => &mut self.b_l,
            "b_r" => &mut self.b_r,
            "c" => &mut self.c,
            "d" => &mut self.d,
            "h1" => &mut self.h1,
            "h2" => &mut self.h2,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub const FIELDS: [&'static str; 8] = ["a_l", "a_r", "b_l", "b_r", "c", "d", "h1", "h2"];
}

impl PiecewiseLinearMap for Pwl2dParams {
    fn dim(&self) -> usize {
        2
    }

    fn switching_coords(&self) -> Vec<usize> {
        vec![0]
    }

    fn n_switches(&self) -> usize {
        1
    }

    fn step_matrix(&self, code: &RegionCode) -> DMatrix<f64> {
        let m = if code.bits()[0] { self.right() } else { self.left() };
        DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
    }

    fn bias(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.h1, self.h2])
    }

    fn region_code(&self, z: &DVector<f64>) -> RegionCode {
        RegionCode::new(vec![z[0] > 0.0])
    }
}

/// The five low-order objects of the one-border map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectKind {
    #[serde(rename = "fixed_L")]
    FixedL,
    #[serde(rename = "fixed_R")]
    FixedR,
    #[serde(rename = "cycle_RL")]
    CycleRL,
    #[serde(rename = "cycle_RL2")]
    CycleRL2,
    #[serde(rename = "cycle_R2L")]
    CycleR2L,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 5] = [
        ObjectKind::FixedL,
        ObjectKind::FixedR,
        ObjectKind::CycleRL,
        ObjectKind::CycleRL2,
        ObjectKind::CycleR2L,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::FixedL => "fixed_L",
            ObjectKind::FixedR => "fixed_R",
            ObjectKind::CycleRL => "cycle_RL",
            ObjectKind::CycleRL2 => "cycle_RL2",
            ObjectKind::CycleR2L => "cycle_R2L",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn order(self) -> usize {
        self.sides().len()
    }

    /// Side of each periodic point, `true` for R, in orbit order starting at the first point.
    pub fn sides(self) -> &'static [bool] {
        match self {
            ObjectKind::FixedL => &[false],
            ObjectKind::FixedR => &[true],
            ObjectKind::CycleRL => &[true, false],
            ObjectKind::CycleRL2 => &[true, false, false],
            ObjectKind::CycleR2L => &[false, true, true],
        }
    }

    /// Canonical one-bit region sequence of the object.
    pub fn region_seq(self) -> RegionSequence {
        RegionSequence::new(
            self.sides()
                .iter()
                .map(|&r| RegionCode::new(vec![r]))
                .collect(),
        )
        .canonical()
    }

    /// Kind whose one-bit region sequence is a rotation of `seq`.
    pub fn from_seq(seq: &RegionSequence) -> Option<Self> {
        if seq.codes().iter().any(|c| c.len() != 1) {
            return None;
        }
        let canon = seq.canonical();
        Self::ALL.into_iter().find(|k| k.region_seq() == canon)
    }
}

impl std::fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Existence and stability of one object at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub object_kind: ObjectKind,
    pub exists: bool,
    /// Implies `exists`.
    pub stable: bool,
    /// Some point sits on the border: neither existing nor absent.
    pub on_curve: bool,
    /// The defining linear system is singular.
    pub degenerate: bool,
    pub points: Vec<Vec2>,
    /// Trace and determinant of the cycle Jacobian.
    pub trace: f64,
    pub det: f64,
}

impl RegionVerdict {
    fn degenerate(kind: ObjectKind, jac: &Mat2) -> Self {
        Self {
            object_kind: kind,
            exists: false,
            stable: false,
            on_curve: false,
            degenerate: true,
            points: Vec::new(),
            trace: trace(jac),
            det: det(jac),
        }
    }

    fn from_points(kind: ObjectKind, points: Vec<Vec2>, jac: &Mat2) -> Self {
        let sides = kind.sides();
        let mut on_curve = false;
        let mut admissible = true;
        for (p, &right) in points.iter().zip(sides) {
            let scale = p[0].abs().max(p[1].abs()).max(1.0);
            if p[0].abs() <= ON_CURVE_TOL * scale {
                on_curve = true;
            } else if (p[0] > 0.0) != right {
                admissible = false;
            }
        }
        let exists = admissible && !on_curve && points.iter().all(|p| p[0].is_finite() && p[1].is_finite());
        let (t, dt) = (trace(jac), det(jac));
        Self {
            object_kind: kind,
            exists,
            stable: exists && jury_stable(t, dt),
            on_curve: on_curve && admissible,
            degenerate: false,
            points,
            trace: t,
            det: dt,
        }
    }
}

/// Both roots of `x^2 - t x + D` strictly inside the unit circle:
/// `D < 1`, `P(1) = 1 - t + D > 0`, `P(-1) = 1 + t + D > 0`.
pub fn jury_stable(t: f64, d: f64) -> bool {
    d < 1.0 && 1.0 - t + d > 0.0 && 1.0 + t + d > 0.0
}

fn is_zero(x: f64, scale: f64) -> bool {
    !(x.abs() > DEGENERATE_TOL * scale.max(1.0))
}

/// Fixed point on the given side (`right = true` for R).
pub fn fixed_point(p: &Pwl2dParams, right: bool) -> RegionVerdict {
    let (a, b, kind, jac) = if right {
        (p.a_r, p.b_r, ObjectKind::FixedR, p.right())
    } else {
        (p.a_l, p.b_l, ObjectKind::FixedL, p.left())
    };
    let den = (1.0 - p.d) * (1.0 - a) - b * p.c;
    if is_zero(den, ((1.0 - p.d) * (1.0 - a)).abs().max((b * p.c).abs())) {
        return RegionVerdict::degenerate(kind, &jac);
    }
    let z = [
        ((1.0 - p.d) * p.h1 + p.c * p.h2) / den,
        (b * p.h1 + (1.0 - a) * p.h2) / den,
    ];
    RegionVerdict::from_points(kind, vec![z], &jac)
}

/// The 2-cycle `RL`; the first point lies in R, the second in L.
pub fn cycle2(p: &Pwl2dParams) -> RegionVerdict {
    let Pwl2dParams {
        a_l,
        a_r,
        b_l,
        b_r,
        c,
        d,
        h1,
        h2,
    } = *p;
    let jac = mul(&p.left(), &p.right());
    let dl = a_l * d - b_l * c;
    let dr = a_r * d - b_r * c;
    let den = dr * dl - c * (b_l + b_r) - d * d - a_l * a_r + 1.0;
    let scale = (dr * dl).abs() + (c * (b_l + b_r)).abs() + d * d + (a_l * a_r).abs() + 1.0;
    if is_zero(den, scale) {
        return RegionVerdict::degenerate(ObjectKind::CycleRL, &jac);
    }
    let n0 = (1.0 - d) * h1 + c * h2;
    let z1 = [
        n0 * (a_l + d + a_l * d - b_l * c + 1.0) / den,
        (h2 * (1.0 + d - a_l * a_r - b_r * c - a_l * a_r * d + a_r * b_l * c)
            + h1 * (b_l + a_r * b_l + b_r * d + a_l * b_r * d - b_l * b_r * c))
            / den,
    ];
    let z2 = [
        n0 * (a_r + d + a_r * d - b_r * c + 1.0) / den,
        (h2 * (1.0 + d - a_l * a_r - b_l * c - a_l * a_r * d + a_l * b_r * c)
            + h1 * (b_r + a_l * b_r + b_l * d + a_r * b_l * d - b_l * b_r * c))
            / den,
    ];
    RegionVerdict::from_points(ObjectKind::CycleRL, vec![z1, z2], &jac)
}

/// Which basic 3-cycle to solve for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeCycle {
    /// One point in R, two in L.
    RL2,
    /// One point in L, two in R.
    R2L,
}

struct Composite {
    /// Step matrices in orbit order.
    steps: Vec<Mat2>,
    jac: Mat2,
    /// `adj(I - J) q`, so that `z_1 = first_num / P(1)`.
    first_num: Vec2,
    p_at_1: f64,
    scale: f64,
}

fn composite(p: &Pwl2dParams, kind: ObjectKind) -> Composite {
    let h = p.h();
    let steps: Vec<Mat2> = kind
        .sides()
        .iter()
        .map(|&r| if r { p.right() } else { p.left() })
        .collect();
    let mut jac: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    let mut q: Vec2 = [0.0, 0.0];
    for s in &steps {
        q = apply(s, &q, &h);
        jac = mul(s, &jac);
    }
    let i_j = [[1.0 - jac[0][0], -jac[0][1]], [-jac[1][0], 1.0 - jac[1][1]]];
    let adj = [[i_j[1][1], -i_j[0][1]], [-i_j[1][0], i_j[0][0]]];
    let first_num = apply(&adj, &q, &[0.0, 0.0]);
    let scale = (i_j[0][0] * i_j[1][1]).abs() + (i_j[0][1] * i_j[1][0]).abs();
    Composite {
        steps,
        jac,
        first_num,
        p_at_1: det(&i_j),
        scale,
    }
}

impl Composite {
    /// Numerators `z_l * P(1)` of all points.
    fn numerators(&self, h: &Vec2) -> Vec<Vec2> {
        let hp = [h[0] * self.p_at_1, h[1] * self.p_at_1];
        let mut out = vec![self.first_num];
        for s in &self.steps[..self.steps.len() - 1] {
            let next = apply(s, out.last().unwrap(), &hp);
            out.push(next);
        }
        out
    }
}

/// Basic 3-cycle `RL^2` or its complement `R^2L`.
pub fn cycle3(p: &Pwl2dParams, which: ThreeCycle) -> RegionVerdict {
    let kind = match which {
        ThreeCycle::RL2 => ObjectKind::CycleRL2,
        ThreeCycle::R2L => ObjectKind::CycleR2L,
    };
    let comp = composite(p, kind);
    if is_zero(comp.p_at_1, comp.scale) {
        return RegionVerdict::degenerate(kind, &comp.jac);
    }
    let points = comp
        .numerators(&p.h())
        .into_iter()
        .map(|n| [n[0] / comp.p_at_1, n[1] / comp.p_at_1])
        .collect();
    RegionVerdict::from_points(kind, points, &comp.jac)
}

/// Verdict for any of the five kinds.
pub fn verdict(p: &Pwl2dParams, kind: ObjectKind) -> RegionVerdict {
    match kind {
        ObjectKind::FixedL => fixed_point(p, false),
        ObjectKind::FixedR => fixed_point(p, true),
        ObjectKind::CycleRL => cycle2(p),
        ObjectKind::CycleRL2 => cycle3(p, ThreeCycle::RL2),
        ObjectKind::CycleR2L => cycle3(p, ThreeCycle::R2L),
    }
}

pub fn all_verdicts(p: &Pwl2dParams) -> Vec<RegionVerdict> {
    ObjectKind::ALL.iter().map(|&k| verdict(p, k)).collect()
}

/// Scalar functions whose zero sets are the bifurcation curves of an object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveValues {
    /// `P(1)` of the cycle Jacobian; zero on the DTB curve.
    pub p_at_1: f64,
    /// `P(-1)`; zero on the DFB curve.
    pub p_at_minus1: f64,
    /// Determinant of the cycle Jacobian; `det - 1 = 0` with complex eigenvalues is the CB curve.
    pub det: f64,
    pub complex: bool,
    /// `z1 * P(1)` of the point nearest the border; zero on the BCB curve.
    pub border_fn: f64,
}

pub fn curve_values(p: &Pwl2dParams, kind: ObjectKind) -> CurveValues {
    let comp = composite(p, kind);
    let t = trace(&comp.jac);
    let dt = det(&comp.jac);
    let border_fn = comp
        .numerators(&p.h())
        .into_iter()
        .map(|n| n[0])
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap();
    CurveValues {
        p_at_1: 1.0 - t + dt,
        p_at_minus1: 1.0 + t + dt,
        det: dt,
        complex: t * t - 4.0 * dt < 0.0,
        border_fn,
    }
}

/// One `(a_l, a_r)` grid cell of a multistability scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub i: usize,
    pub j: usize,
    pub a_l: f64,
    pub a_r: f64,
    pub verdicts: Vec<RegionVerdict>,
}

impl ScanCell {
    pub fn n_stable(&self) -> usize {
        self.verdicts.iter().filter(|v| v.stable).count()
    }

    pub fn stable_kinds(&self) -> Vec<ObjectKind> {
        self.verdicts
            .iter()
            .filter(|v| v.stable)
            .map(|v| v.object_kind)
            .collect()
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Verdicts for every object on an `(a_l, a_r)` grid, other parameters from `base`.
pub fn multistability_scan(base: &Pwl2dParams, a_l: &[f64], a_r: &[f64]) -> Vec<ScanCell> {
    let jobs: Vec<(usize, usize)> = (0..a_l.len())
        .flat_map(|i| (0..a_r.len()).map(move |j| (i, j)))
        .collect();
    jobs.par_iter()
        .map(|&(i, j)| {
            let p = Pwl2dParams {
                a_l: a_l[i],
                a_r: a_r[j],
                ..*base
            };
            ScanCell {
                i,
                j,
                a_l: a_l[i],
                a_r: a_r[j],
                verdicts: all_verdicts(&p),
            }
        })
        .collect()
}

/// Stable objects of order at most 3 in a searched library, as kinds.
pub fn stable_kinds_in(lib: &crate::scyfi::CycleLibrary) -> Vec<ObjectKind> {
    let mut out: Vec<ObjectKind> = lib
        .iter()
        .filter(|c| c.is_stable() && c.order <= 3)
        .filter_map(|c| ObjectKind::from_seq(&c.region_seq))
        .collect();
    out.sort();
    out
}

/// Stable objects according to the closed-form verdicts.
pub fn oracle_stable_kinds(p: &Pwl2dParams) -> Vec<ObjectKind> {
    let mut out: Vec<ObjectKind> = all_verdicts(p)
        .into_iter()
        .filter(|v| v.stable)
        .map(|v| v.object_kind)
        .collect();
    out.sort();
    out
}

/// Cells where at least two stable objects coexist.
pub fn mab_cells(cells: &[ScanCell]) -> Vec<&ScanCell> {
    cells.iter().filter(|c| c.n_stable() >= 2).collect()
}

/// Parameters of the coexistence example: `c = 0.8`, `d = 0.2`, `b_l = -0.4`,
/// `b_r = 0.5`, `h = (1, 0)`.
pub fn coexistence_example(a_l: f64, a_r: f64) -> Pwl2dParams {
    Pwl2dParams {
        a_l,
        a_r,
        b_l: -0.4,
        b_r: 0.5,
        c: 0.8,
        d: 0.2,
        h1: 1.0,
        h2: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scyfi::{exhaustive_oracle, find_all, SearchBudget, Tolerances};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pwl(rng: &mut impl Rng) -> Pwl2dParams {
        Pwl2dParams {
            a_l: rng.gen_range(-2.0..2.0),
            a_r: rng.gen_range(-2.0..2.0),
            b_l: rng.gen_range(-1.0..1.0),
            b_r: rng.gen_range(-1.0..1.0),
            c: rng.gen_range(-1.0..1.0),
            d: rng.gen_range(-0.9..0.9),
            h1: rng.gen_range(-1.0..1.0),
            h2: rng.gen_range(-1.0..1.0),
        }
    }

    fn closes(p: &Pwl2dParams, v: &RegionVerdict) {
        let k = v.points.len();
        for l in 0..k {
            let next = p.step(v.points[l]);
            let target = v.points[(l + 1) % k];
            let scale = target[0].abs().max(target[1].abs()).max(1.0);
            assert!(
                (next[0] - target[0]).abs() < 1e-10 * scale && (next[1] - target[1]).abs() < 1e-10 * scale,
                "{p:?} {v:?} {next:?}"
            );
        }
    }

    #[test]
    fn decoupled_fixed_point() {
        let p = Pwl2dParams {
            a_l: 0.0,
            a_r: 0.5,
            b_l: 0.0,
            b_r: 0.0,
            c: 0.0,
            d: 0.5,
            h1: 1.0,
            h2: 0.0,
        };
        let v = fixed_point(&p, true);
        assert!(v.exists && v.stable);
        assert_relative_eq!(v.points[0][0], 2.0);
        assert_relative_eq!(v.points[0][1], 0.0);
    }

    #[test]
    fn unit_determinant_is_degenerate() {
        let p = Pwl2dParams {
            a_l: 0.0,
            a_r: 1.0,
            b_l: 0.0,
            b_r: 0.3,
            c: 0.0,
            d: 0.4,
            h1: 1.0,
            h2: 0.0,
        };
        assert!(fixed_point(&p, true).degenerate);
        assert!(curve_values(&p, ObjectKind::FixedR).p_at_1.abs() < 1e-15);
    }

    #[test]
    fn coexistence_point() {
        let p = coexistence_example(0.253, -2.83);
        let rl = cycle2(&p);
        assert!(rl.exists && rl.stable, "{rl:?}");
        let rl2 = cycle3(&p, ThreeCycle::RL2);
        assert!(rl2.exists && rl2.stable, "{rl2:?}");
        let r2l = cycle3(&p, ThreeCycle::R2L);
        assert!(r2l.exists && !r2l.stable);
        assert!(fixed_point(&p, true).exists && !fixed_point(&p, true).stable);
        assert!(!fixed_point(&p, false).exists);
        // values from an independent numerical solve
        assert_relative_eq!(rl.points[0][0], 1.1784, epsilon = 1e-4);
        assert_relative_eq!(rl.points[1][0], -1.6776, epsilon = 1e-4);
    }

    #[test]
    fn verdict_points_close_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = random_pwl(&mut rng);
            for v in all_verdicts(&p) {
                if v.exists {
                    closes(&p, &v);
                }
                assert!(!v.stable || v.exists);
            }
        }
    }

    #[test]
    fn two_cycle_formula_matches_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_pwl(&mut rng);
            let v = cycle2(&p);
            let comp = composite(&p, ObjectKind::CycleRL);
            let nums = comp.numerators(&p.h());
            for (pt, n) in v.points.iter().zip(&nums) {
                assert_relative_eq!(pt[0], n[0] / comp.p_at_1, max_relative = 1e-9, epsilon = 1e-9);
                assert_relative_eq!(pt[1], n[1] / comp.p_at_1, max_relative = 1e-9, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn verdicts_agree_with_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tol = Tolerances::default();
        for _ in 0..50 {
            let p = random_pwl(&mut rng);
            let lib = exhaustive_oracle(&p, 3, &tol).unwrap();
            for v in all_verdicts(&p) {
                let found = lib.get(&v.object_kind.region_seq());
                if v.on_curve || v.degenerate {
                    continue;
                }
                assert_eq!(found.is_some(), v.exists, "{:?} {p:?}", v.object_kind);
                if let Some(c) = found {
                    assert_eq!(c.is_stable(), v.stable, "{:?} {p:?}", v.object_kind);
                }
            }
        }
    }

    #[test]
    fn verdicts_agree_with_search_on_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let tol = Tolerances::default();
        for s in 0..50 {
            let p = random_pwl(&mut rng);
            let lib = find_all(&p, 1, &SearchBudget::fixed(20, 10, s), &tol);
            for side in [false, true] {
                let v = fixed_point(&p, side);
                let kind = if side { ObjectKind::FixedR } else { ObjectKind::FixedL };
                assert_eq!(lib.get(&kind.region_seq()).is_some(), v.exists);
            }
        }
    }

    #[test]
    fn fixed_point_border_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = random_pwl(&mut rng);
            for k in [ObjectKind::FixedL, ObjectKind::FixedR] {
                let cv = curve_values(&p, k);
                assert_relative_eq!(
                    cv.border_fn,
                    (1.0 - p.d) * p.h1 + p.c * p.h2,
                    max_relative = 1e-12,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn leaky_mapping_reduces_to_restricted() {
        let a = Pwl2dParams::from_leaky(0.3, 0.2, [[-1.1, 0.7], [0.5, 0.4]], 0.0, 0.0, [1.0, 0.5]);
        let b = Pwl2dParams::from_restricted(0.3, -1.1, 0.5, 0.2, 1.0, 0.5);
        assert_eq!(a, b);
        let plrnn = PlrnnParams::restricted_planar(0.3, -1.1, 0.5, 0.2, 1.0, 0.5);
        assert_eq!(Pwl2dParams::from_plrnn(&plrnn), Some(b));
    }

    #[test]
    fn kinds_and_sequences() {
        for k in ObjectKind::ALL {
            assert_eq!(ObjectKind::from_seq(&k.region_seq()), Some(k));
            assert_eq!(ObjectKind::from_name(k.name()), Some(k));
        }
    }
}
