//! Gradient-based PLRNN training with generalized teacher forcing, plus the
//! closed-form gradients at cycles and the look-ahead bifurcation probe.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_checked;
use crate::plrnn::{PlrnnParams, RegionCode, DEFAULT_DIVERGENCE_THRESHOLD};
use crate::scyfi::{find_all, CycleObject, SearchBudget, Tolerances};
use crate::sweep::{diff_segment, EventKind, EventThresholds, ParamTarget, SegmentEvent, System};

/// Full-state targets `x_1..x_T`; the loss is `sum_t |z_t - x_t|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub targets: Vec<DVector<f64>>,
}

impl LossSpec {
    pub fn new(targets: Vec<DVector<f64>>) -> Result<Self> {
        if targets.len() < 2 {
            return Err(Error::InvalidParams("need at least two targets".into()));
        }
        let m = targets[0].len();
        if let Some(bad) = targets.iter().find(|x| x.len() != m) {
            return Err(Error::Dimension {
                what: "target".into(),
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self { targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.targets[0].len()
    }
}

/// Generalized teacher forcing: the state fed into each step is
/// `(1 - alpha) z_t + alpha x_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtfConfig {
    pub alpha: f64,
}

impl GtfConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::OutOfRange(format!("alpha = {alpha} is outside [0, 1]")));
        }
        Ok(Self { alpha })
    }
}

/// Gradient with the same layout as [`PlrnnParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad {
    pub a: DVector<f64>,
    pub w: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl ParamGrad {
    pub fn zeros(m: usize) -> Self {
        Self {
            a: DVector::zeros(m),
            w: DMatrix::zeros(m, m),
            h: DVector::zeros(m),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_squared() + self.w.norm_squared() + self.h.norm_squared()).sqrt()
    }

    pub fn get(&self, t: &ParamTarget) -> Option<f64> {
        match t {
            ParamTarget::A(i) => self.a.get(*i).copied(),
            ParamTarget::W(i, j) => self.w.get((*i, *j)).copied(),
            ParamTarget::H(i) => self.h.get(*i).copied(),
            ParamTarget::Pwl(_) => None,
        }
    }

    /// Keep only the listed coordinates.
    pub fn masked(&self, keep: &[ParamTarget]) -> Self {
        let mut out = Self::zeros(self.a.len());
        for t in keep {
            match t {
                ParamTarget::A(i) => out.a[*i] = self.a[*i],
                ParamTarget::W(i, j) => out.w[(*i, *j)] = self.w[(*i, *j)],
                ParamTarget::H(i) => out.h[*i] = self.h[*i],
                ParamTarget::Pwl(_) => {}
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: &self.a * s,
            w: &self.w * s,
            h: &self.h * s,
        }
    }

    /// `params - step * self`.
    pub fn step(&self, params: &PlrnnParams, step: f64) -> PlrnnParams {
        PlrnnParams {
            a: &params.a - &self.a * step,
            w: &params.w - &self.w * step,
            h: &params.h - &self.h * step,
        }
    }
}

/// `A` diagonal, off-diagonal `W` and `h`.
pub fn default_trainable(m: usize) -> Vec<ParamTarget> {
    let mut out: Vec<ParamTarget> = (0..m).map(ParamTarget::A).collect();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                out.push(ParamTarget::W(i, j));
            }
        }
    }
    out.extend((0..m).map(ParamTarget::H));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpttResult {
    pub loss: f64,
    pub grad: ParamGrad,
}

fn relu(z: &DVector<f64>) -> DVector<f64> {
    z.map(|x| if x > 0.0 { x } else { 0.0 })
}

/// Model states `z_1 = z0, z_{t+1} = F(z~_t)` and the forced inputs `z~_t`.
fn forward(
    params: &PlrnnParams,
    z0: &DVector<f64>,
    loss: &LossSpec,
    alpha: f64,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    let t_len = loss.len();
    let mut states = Vec::with_capacity(t_len);
    let mut forced = Vec::with_capacity(t_len - 1);
    states.push(z0.clone());
    for t in 0..t_len - 1 {
        let zt = if alpha == 0.0 {
            states[t].clone()
        } else {
            &states[t] * (1.0 - alpha) + &loss.targets[t] * alpha
        };
        let next = params.a.component_mul(&zt) + &params.w * relu(&zt) + &params.h;
        if next.iter().any(|x| !x.is_finite() || x.abs() > DEFAULT_DIVERGENCE_THRESHOLD) {
            return Err(Error::NonFinite { step: t + 1 });
        }
        forced.push(zt);
        states.push(next);
    }
    Ok((states, forced))
}

/// The model states for `loss.len()` steps.
pub fn trajectory(
    params: &PlrnnParams,
    z0: &DVector<f64>,
    loss: &LossSpec,
    gtf: Option<&GtfConfig>,
) -> Result<Vec<DVector<f64>>> {
    forward(params, z0, loss, gtf.map_or(0.0, |g| g.alpha)).map(|(s, _)| s)
}

/// `sum_t |z_t - x_t|^2` along the (possibly forced) trajectory.
pub fn loss_value(
    params: &PlrnnParams,
    z0: &DVector<f64>,
    loss: &LossSpec,
    gtf: Option<&GtfConfig>,
) -> Result<f64> {
    let states = trajectory(params, z0, loss, gtf)?;
    Ok(states
        .iter()
        .zip(&loss.targets)
        .map(|(z, x)| (z - x).norm_squared())
        .sum())
}

/// Loss and its gradient by backpropagation through time. With teacher
/// forcing each Jacobian is scaled by `1 - alpha`.
pub fn bptt_gradient(
    params: &PlrnnParams,
    z0: &DVector<f64>,
    loss: &LossSpec,
    gtf: Option<&GtfConfig>,
) -> Result<BpttResult> {
    let m = params.m();
    if z0.len() != m || loss.dim() != m {
        return Err(Error::Dimension {
            what: "state".into(),
            expected: m,
            found: if z0.len() != m { z0.len() } else { loss.dim() },
        });
    }
    let alpha = gtf.map_or(0.0, |g| g.alpha);
    let (states, forced) = forward(params, z0, loss, alpha)?;
    let t_len = states.len();
    let value = states
        .iter()
        .zip(&loss.targets)
        .map(|(z, x)| (z - x).norm_squared())
        .sum();

    let mut g = ParamGrad::zeros(m);
    // delta = dL/dz_t, accumulated from the end
    let mut delta = (&states[t_len - 1] - &loss.targets[t_len - 1]) * 2.0;
    for t in (0..t_len - 1).rev() {
        let zt = &forced[t];
        let r = relu(zt);
        g.a += delta.component_mul(zt);
        g.w += &delta * r.transpose();
        g.h += &delta;
        let jac = params.step_matrix(&RegionCode::of(zt));
        let mut back = jac.transpose() * &delta;
        if alpha != 0.0 {
            back *= 1.0 - alpha;
        }
        delta = back + (&states[t] - &loss.targets[t]) * 2.0;
    }
    Ok(BpttResult { loss: value, grad: g })
}

/// Immediate partial of `F(z)` with respect to one parameter.
pub fn immediate_partial(z: &DVector<f64>, theta: &ParamTarget) -> Result<DVector<f64>> {
    let m = z.len();
    let mut out = DVector::zeros(m);
    match *theta {
        ParamTarget::A(i) if i < m => out[i] = z[i],
        ParamTarget::W(n, j) if n < m && j < m => out[n] = z[j].max(0.0),
        ParamTarget::H(i) if i < m => out[i] = 1.0,
        _ => {
            return Err(Error::OutOfRange(format!(
                "{theta} is not a parameter of an M = {m} system"
            )))
        }
    }
    Ok(out)
}

/// Derivative of every cycle point with respect to `theta`,
/// `(I - prod J)^{-1}` times the accumulated immediate partials over one period.
/// A singular `I - prod J` (the object sits at a degenerate transcritical
/// bifurcation) gives [`Error::Degenerate`].
pub fn cycle_gradient(
    params: &PlrnnParams,
    cycle: &CycleObject,
    theta: &ParamTarget,
    tol: &Tolerances,
) -> Result<Vec<DVector<f64>>> {
    let m = params.m();
    let k = cycle.order;
    let codes = cycle.region_seq.codes();
    let mats: Vec<DMatrix<f64>> = codes.iter().map(|c| params.step_matrix(c)).collect();
    let mut prod = DMatrix::identity(m, m);
    let mut acc = DVector::zeros(m);
    for l in 0..k {
        acc = &mats[l] * acc + immediate_partial(&cycle.points[l], theta)?;
        prod = &mats[l] * prod;
    }
    let lhs = DMatrix::identity(m, m) - prod;
    let d0 = solve_checked(&lhs, &acc, tol.singular_tol)
        .map_err(|rcond| Error::Degenerate { rcond })?
        .x;
    let mut out = Vec::with_capacity(k);
    out.push(d0);
    for l in 0..k - 1 {
        let next = &mats[l] * &out[l] + immediate_partial(&cycle.points[l], theta)?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBound {
    /// `|A| + |W|` in spectral norm.
    pub r: f64,
    pub alpha_star: f64,
}

/// Any `alpha > alpha_star` makes every product of forced Jacobians contracting.
pub fn gtf_alpha_bound(params: &PlrnnParams) -> AlphaBound {
    let (na, nw) = params.norms();
    let r = na + nw;
    AlphaBound {
        r,
        alpha_star: if r > 0.0 { (1.0 - 1.0 / r).max(0.0) } else { 0.0 },
    }
}

/// `prod_l (1 - alpha) (A + W D_l)`, first code applied first.
pub fn gtf_jacobian_product(params: &PlrnnParams, codes: &[RegionCode], alpha: f64) -> DMatrix<f64> {
    let m = params.m();
    codes.iter().fold(DMatrix::identity(m, m), |p, c| {
        params.step_matrix(c) * p * (1.0 - alpha)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Annealing {
    None,
    /// `alpha_e = alpha_0 (1 - e / epochs)`.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub grad_clip: Option<f64>,
    pub alpha: f64,
    pub annealing: Annealing,
    /// Coordinates updated by SGD; `None` means [`default_trainable`].
    pub trainable: Option<Vec<ParamTarget>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            epochs: 100,
            grad_clip: None,
            alpha: 0.0,
            annealing: Annealing::None,
            trainable: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Loss of the forced trajectory that produced the gradient.
    pub loss: f64,
    /// Loss of the freely generated trajectory.
    pub free_loss: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    #[serde(skip)]
    pub params: Option<PlrnnParams>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    /// Set when training stopped early on a non-finite loss.
    pub truncated: Option<String>,
}

impl TrainingTrace {
    /// Parameters at the start of each recorded epoch.
    pub fn snapshots(&self) -> Vec<PlrnnParams> {
        self.records.iter().filter_map(|r| r.params.clone()).collect()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.free_loss).collect()
    }

    /// Epoch `e` such that the free loss jumps most between `e` and `e + 1`.
    pub fn largest_jump(&self) -> Option<(usize, f64)> {
        self.records
            .windows(2)
            .map(|w| (w[0].epoch, (w[1].free_loss - w[0].free_loss).abs()))
            .filter(|(_, d)| d.is_finite())
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }
}

/// Plain SGD with optional norm clipping. Every epoch records the parameters
/// it started from; the freely generated loss is recorded alongside the
/// forced one.
pub fn train(params: &PlrnnParams, z0: &DVector<f64>, loss: &LossSpec, cfg: &TrainConfig) -> TrainingTrace {
    let trainable = cfg.trainable.clone().unwrap_or_else(|| default_trainable(params.m()));
    let mut p = params.clone();
    let mut trace = TrainingTrace::default();
    for e in 0..cfg.epochs {
        let alpha = match cfg.annealing {
            Annealing::None => cfg.alpha,
            Annealing::Linear => cfg.alpha * (1.0 - e as f64 / cfg.epochs as f64),
        };
        let gtf = GtfConfig { alpha };
        let res = bptt_gradient(&p, z0, loss, Some(&gtf));
        let free = loss_value(&p, z0, loss, None).unwrap_or(f64::INFINITY);
        let res = match res {
            Ok(r) if r.loss.is_finite() => r,
            Ok(_) => {
                trace.truncated = Some(format!("non-finite loss at epoch {e}"));
                break;
            }
            Err(err) => {
                trace.truncated = Some(format!("epoch {e}: {err}"));
                break;
            }
        };
        let mut g = res.grad.masked(&trainable);
        let norm = g.norm();
        if let Some(c) = cfg.grad_clip {
            if norm > c {
                g = g.scaled(c / norm);
            }
        }
        trace.records.push(EpochRecord {
            epoch: e,
            loss: res.loss,
            free_loss: free,
            grad_norm: norm,
            alpha,
            params: Some(p.clone()),
        });
        p = g.step(&p, cfg.lr);
    }
    trace
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lookahead {
    pub would_bifurcate: bool,
    pub kinds: Vec<EventKind>,
    pub events: Vec<SegmentEvent>,
}

/// Would the step `params - scale * gradient` cross a bifurcation of any
/// object with order up to `k_max`?
pub fn lookahead_probe(
    params: &PlrnnParams,
    gradient: &ParamGrad,
    scale: f64,
    k_max: usize,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Lookahead {
    let target = gradient.step(params, scale);
    if target == *params {
        return Lookahead {
            would_bifurcate: false,
            kinds: Vec::new(),
            events: Vec::new(),
        };
    }
    let lib0 = find_all(params, k_max, budget, tol);
    let lib1 = find_all(&target, k_max, budget, tol);
    let events = diff_segment(
        |s| System::Plrnn(params.lerp(&target, s)),
        &lib0,
        &lib1,
        tol,
        &EventThresholds::default(),
    );
    let mut kinds: Vec<EventKind> = events.iter().map(|e| e.kind).collect();
    kinds.sort();
    kinds.dedup();
    Lookahead {
        would_bifurcate: !events.is_empty(),
        kinds,
        events,
    }
}
