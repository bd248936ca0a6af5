//! The piecewise-linear RNN map `z -> A z + W relu(z) + h`, its region
//! decomposition, per-region affine pieces and trajectory iteration.
//!
//! Everything downstream works against [`PiecewiseLinearMap`], so the same
//! search code runs on a PLRNN and on the one-border planar map in
//! [`crate::pwl2d`].

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Components with `|z_m| <= DEFAULT_BORDER_EPS` are flagged as lying on a border.
pub const DEFAULT_BORDER_EPS: f64 = 1e-12;
/// Trajectories whose state leaves this magnitude are reported as diverged.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e100;

/// Binary activity pattern: bit `m` is set iff the `m`-th switching coordinate is strictly positive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RegionCode(pub Vec<bool>);

impl RegionCode {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// Code of a state, every coordinate switching (`z_m > 0` strictly).
    pub fn of(z: &DVector<f64>) -> Self {
        Self(z.iter().map(|&x| x > 0.0).collect())
    }

    /// Code from the low `n` bits of `value` (bit `m` of the code = bit `m` of the integer).
    pub fn from_index(value: u64, n: usize) -> Self {
        Self((0..n).map(|m| (value >> m) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn to_ints(&self) -> Vec<u8> {
        self.0.iter().map(|&b| b as u8).collect()
    }

    pub fn from_ints(v: &[u8]) -> Self {
        Self(v.iter().map(|&b| b != 0).collect())
    }
}

impl fmt::Debug for RegionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RegionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for RegionCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_ints().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RegionCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u8>::deserialize(d)?;
        Ok(Self::from_ints(&v))
    }
}

/// A region code plus the on-border metadata of the state it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub code: RegionCode,
    /// `on_border[m]` is set when `|z_m| <= border_eps`; the code bit is then 0.
    pub on_border: Vec<bool>,
}

impl Region {
    pub fn any_on_border(&self) -> bool {
        self.on_border.iter().any(|&b| b)
    }
}

/// Region of `z` when every coordinate carries a border. Components within
/// `border_eps` of zero are flagged and get bit 0.
pub fn region_of(z: &DVector<f64>, border_eps: f64) -> Region {
    Region {
        code: RegionCode(z.iter().map(|&x| x > border_eps).collect()),
        on_border: z.iter().map(|x| x.abs() <= border_eps).collect(),
    }
}

/// Ordered list of region codes; `codes[l]` is the region of the `l`-th
/// periodic point, i.e. the input to step `l`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionSequence(pub Vec<RegionCode>);

impl RegionSequence {
    pub fn new(codes: Vec<RegionCode>) -> Self {
        Self(codes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn codes(&self) -> &[RegionCode] {
        &self.0
    }

    /// True when all codes are identical (for `k >= 2` no cycle can live in one linear piece).
    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn rotated(&self, shift: usize) -> Self {
        let k = self.0.len();
        Self((0..k).map(|l| self.0[(l + shift) % k].clone()).collect())
    }

    /// Shift of the lexicographically smallest rotation (first one on ties).
    pub fn canonical_shift(&self) -> usize {
        let k = self.0.len();
        let mut best = 0;
        for s in 1..k {
            let better = (0..k)
                .map(|l| self.0[(l + s) % k].cmp(&self.0[(l + best) % k]))
                .find(|o| o.is_ne())
                .map(|o| o.is_lt())
                .unwrap_or(false);
            if better {
                best = s;
            }
        }
        best
    }

    pub fn canonical(&self) -> Self {
        self.rotated(self.canonical_shift())
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Two sequences are equivalent iff one is a cyclic rotation of the other.
    pub fn equivalent(&self, other: &Self) -> bool {
        self.len() == other.len() && self.canonical() == other.canonical()
    }
}

impl fmt::Debug for RegionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RegionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// A continuous piecewise-affine map `z -> M(code(z)) z + h` whose pieces are
/// selected by the signs of a subset of state coordinates.
pub trait PiecewiseLinearMap: Send + Sync {
    /// State dimension.
    fn dim(&self) -> usize;

    /// Coordinates whose sign selects the linear piece, in code-bit order.
    fn switching_coords(&self) -> Vec<usize> {
        (0..self.dim()).collect()
    }

    /// Number of bits in a region code.
    fn n_switches(&self) -> usize {
        self.switching_coords().len()
    }

    /// Matrix of the linear piece for `code`.
    fn step_matrix(&self, code: &RegionCode) -> DMatrix<f64>;

    fn bias(&self) -> DVector<f64>;

    fn region_code(&self, z: &DVector<f64>) -> RegionCode {
        RegionCode(self.switching_coords().iter().map(|&m| z[m] > 0.0).collect())
    }

    fn region(&self, z: &DVector<f64>, border_eps: f64) -> Region {
        let coords = self.switching_coords();
        Region {
            code: RegionCode(coords.iter().map(|&m| z[m] > border_eps).collect()),
            on_border: coords.iter().map(|&m| z[m].abs() <= border_eps).collect(),
        }
    }

    /// One application of the map.
    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        self.step_matrix(&self.region_code(z)) * z + self.bias()
    }
}

/// Parameters of `z_t = A z_{t-1} + W max(z_{t-1}, 0) + h`.
///
/// `A` is diagonal and stored as a vector. `W` is usually off-diagonal; a
/// non-zero diagonal is accepted because it is what gives a single unit two
/// different slopes (the one-dimensional skew-tent maps and the restricted
/// planar setups are built that way).
#[derive(Debug, Clone, PartialEq)]
pub struct PlrnnParams {
    pub a: DVector<f64>,
    pub w: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl PlrnnParams {
    pub fn new(a: DVector<f64>, w: DMatrix<f64>, h: DVector<f64>) -> Result<Self> {
        let m = a.len();
        if m == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if w.nrows() != m || w.ncols() != m {
            return Err(Error::Dimension {
                what: "W",
                expected: m,
                found: if w.nrows() != m { w.nrows() } else { w.ncols() },
            });
        }
        if h.len() != m {
            return Err(Error::Dimension {
                what: "h",
                expected: m,
                found: h.len(),
            });
        }
        if a.iter().chain(w.iter()).chain(h.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite entry".into()));
        }
        Ok(Self { a, w, h })
    }

    /// Like [`PlrnnParams::new`] but rejects a non-zero diagonal in `W`.
    pub fn new_offdiag(a: DVector<f64>, w: DMatrix<f64>, h: DVector<f64>) -> Result<Self> {
        let p = Self::new(a, w, h)?;
        if !p.is_offdiag() {
            return Err(Error::InvalidParams("W must have a zero diagonal".into()));
        }
        Ok(p)
    }

    pub fn from_slices(a: &[f64], w_rows: &[&[f64]], h: &[f64]) -> Result<Self> {
        let m = a.len();
        let mut w = DMatrix::zeros(m, m);
        if w_rows.len() != m {
            return Err(Error::Dimension {
                what: "W rows",
                expected: m,
                found: w_rows.len(),
            });
        }
        for (i, row) in w_rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension {
                    what: "W row",
                    expected: m,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                w[(i, j)] = v;
            }
        }
        Self::new(
            DVector::from_column_slice(a),
            w,
            DVector::from_column_slice(h),
        )
    }

    /// One-unit map with left slope `a_l` (z <= 0) and right slope `a_r` (z > 0).
    pub fn skew_tent(a_l: f64, a_r: f64, h: f64) -> Self {
        Self {
            a: DVector::from_element(1, a_l),
            w: DMatrix::from_element(1, 1, a_r - a_l),
            h: DVector::from_element(1, h),
        }
    }

    /// Restricted planar setup with `W = [[w11, 0], [w21, 0]]`: one border at `z1 = 0`.
    pub fn restricted_planar(a11: f64, w11: f64, w21: f64, a22: f64, h1: f64, h2: f64) -> Self {
        Self {
            a: DVector::from_vec(vec![a11, a22]),
            w: DMatrix::from_row_slice(2, 2, &[w11, 0.0, w21, 0.0]),
            h: DVector::from_vec(vec![h1, h2]),
        }
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn is_offdiag(&self) -> bool {
        (0..self.m()).all(|i| self.w[(i, i)] == 0.0)
    }

    /// `A + W diag(code)`.
    pub fn step_matrix(&self, code: &RegionCode) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for (j, &on) in code.bits().iter().enumerate() {
            if on {
                out.set_column(j, &self.w.column(j));
            }
        }
        for i in 0..m {
            out[(i, i)] += self.a[i];
        }
        out
    }

    /// Total number of scalar parameters (A diagonal, full W, h).
    pub fn n_params(&self) -> usize {
        let m = self.m();
        2 * m + m * m
    }

    /// `(1 - s) self + s other`.
    pub fn lerp(&self, other: &Self, s: f64) -> Self {
        Self {
            a: &self.a * (1.0 - s) + &other.a * s,
            w: &self.w * (1.0 - s) + &other.w * s,
            h: &self.h * (1.0 - s) + &other.h * s,
        }
    }

    /// Spectral norms `(||A||, ||W||)`.
    pub fn norms(&self) -> (f64, f64) {
        let a = DMatrix::from_diagonal(&self.a);
        (
            crate::linalg::spectral_norm(&a),
            crate::linalg::spectral_norm(&self.w),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ParamsFile::from(self)).expect("params serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        ParamsFile::from_value(raw)?.into_params()
    }

    pub fn from_json_value(raw: serde_json::Value) -> Result<Self> {
        ParamsFile::from_value(raw)?.into_params()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

impl PiecewiseLinearMap for PlrnnParams {
    fn dim(&self) -> usize {
        self.m()
    }

    fn step_matrix(&self, code: &RegionCode) -> DMatrix<f64> {
        PlrnnParams::step_matrix(self, code)
    }

    fn bias(&self) -> DVector<f64> {
        self.h.clone()
    }

    fn region_code(&self, z: &DVector<f64>) -> RegionCode {
        RegionCode::of(z)
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        let relu = z.map(|x| if x > 0.0 { x } else { 0.0 });
        self.a.component_mul(z) + &self.w * relu + &self.h
    }
}

/// Wire format `{"M": int, "A": [..], "W": [[..]], "h": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

impl From<&PlrnnParams> for ParamsFile {
    fn from(p: &PlrnnParams) -> Self {
        let m = p.m();
        Self {
            m,
            a: p.a.iter().cloned().collect(),
            w: (0..m).map(|i| (0..m).map(|j| p.w[(i, j)]).collect()).collect(),
            h: p.h.iter().cloned().collect(),
        }
    }
}

impl ParamsFile {
    /// Field-by-field parse so that errors name the offending key.
    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Field {
            field: "<root>".into(),
            msg: "expected a JSON object".into(),
        })?;
        let get = |key: &str| {
            obj.get(key).ok_or_else(|| Error::Field {
                field: key.into(),
                msg: "missing".into(),
            })
        };
        let field_err = |key: &str, e: serde_json::Error| Error::Field {
            field: key.into(),
            msg: e.to_string(),
        };
        let m: usize = serde_json::from_value(get("M")?.clone()).map_err(|e| field_err("M", e))?;
        let a: Vec<f64> =
            serde_json::from_value(get("A")?.clone()).map_err(|e| field_err("A", e))?;
        let w: Vec<Vec<f64>> =
            serde_json::from_value(get("W")?.clone()).map_err(|e| field_err("W", e))?;
        let h: Vec<f64> =
            serde_json::from_value(get("h")?.clone()).map_err(|e| field_err("h", e))?;
        Ok(Self { m, a, w, h })
    }

    pub fn into_params(self) -> Result<PlrnnParams> {
        let m = self.m;
        let bad = |field: &str, msg: String| Error::Field {
            field: field.into(),
            msg,
        };
        if m == 0 {
            return Err(bad("M", "must be at least 1".into()));
        }
        if self.a.len() != m {
            return Err(bad("A", format!("expected {m} entries, found {}", self.a.len())));
        }
        if self.h.len() != m {
            return Err(bad("h", format!("expected {m} entries, found {}", self.h.len())));
        }
        if self.w.len() != m || self.w.iter().any(|r| r.len() != m) {
            return Err(bad("W", format!("expected a {m}x{m} matrix")));
        }
        let rows: Vec<&[f64]> = self.w.iter().map(|r| r.as_slice()).collect();
        PlrnnParams::from_slices(&self.a, &rows, &self.h)
    }
}

/// `(P, q)` such that applying a sequence of affine pieces to `z` gives `P z + q`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineComposition {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
}

impl AffineComposition {
    pub fn identity(m: usize) -> Self {
        Self {
            p: DMatrix::identity(m, m),
            q: DVector::zeros(m),
        }
    }

    pub fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.p * z + &self.q
    }
}

/// Compose the affine pieces of `seq` in order `codes[0], codes[1], ...`.
pub fn compose<M: PiecewiseLinearMap + ?Sized>(map: &M, seq: &RegionSequence) -> AffineComposition {
    let h = map.bias();
    let mut acc = AffineComposition::identity(map.dim());
    for code in seq.codes() {
        let step = map.step_matrix(code);
        acc.q = &step * &acc.q + &h;
        acc.p = step * acc.p;
    }
    acc
}

/// A finite-horizon orbit.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `states[0] = z0`; on divergence the list stops at the last finite state.
    pub states: Vec<DVector<f64>>,
    /// Index of the first state that left the divergence threshold.
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn last(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds z0")
    }
}

/// Iterate `t` steps from `z0`.
pub fn iterate<M: PiecewiseLinearMap + ?Sized>(
    map: &M,
    z0: &DVector<f64>,
    t: usize,
    divergence_threshold: f64,
) -> Trajectory {
    let mut states = Vec::with_capacity(t + 1);
    states.push(z0.clone());
    for i in 1..=t {
        let next = map.apply(states.last().unwrap());
        if next.iter().any(|x| !x.is_finite() || x.abs() > divergence_threshold) {
            return Trajectory {
                states,
                diverged_at: Some(i),
            };
        }
        states.push(next);
    }
    Trajectory {
        states,
        diverged_at: None,
    }
}
