//! Parameter generators for benchmarking the search.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::plrnn::PlrnnParams;
use crate::rng;

/// Random PLRNN with `a_m ~ U(a)`, off-diagonal `w_ij ~ U(w)`, `h_m ~ U(h)`.
pub fn random_params<R: Rng + ?Sized>(
    m: usize,
    rng: &mut R,
    a: (f64, f64),
    w: (f64, f64),
    h: (f64, f64),
) -> PlrnnParams {
    let av = DVector::from_fn(m, |_, _| rng.gen_range(a.0..a.1));
    let mut wm = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                wm[(i, j)] = rng.gen_range(w.0..w.1);
            }
        }
    }
    let hv = DVector::from_fn(m, |_, _| rng.gen_range(h.0..h.1));
    PlrnnParams { a: av, w: wm, h: hv }
}

/// Contracting system with non-negative coupling and positive bias:
/// `A = diag(R)/s`, `W = (R - diag R)/s`, `s = 2 + |R| + eps`, `R ~ U[0,1)`.
/// Every candidate fixed point lies in the positive orthant.
pub fn generate_case1_params(m: usize, eps: f64, seed: u64) -> PlrnnParams {
    let mut rng = rng::stream(seed, 0);
    let r = DMatrix::from_fn(m, m, |_, _| rng.gen::<f64>());
    let s = 2.0 + spectral_norm(&r) + eps;
    let a = r.diagonal() / s;
    let mut w = &r / s;
    w.fill_diagonal(0.0);
    let h = DVector::from_fn(m, |_, _| 1.0 - rng.gen::<f64>());
    PlrnnParams { a, w, h }
}

/// Contracting system in which the first `card_s` units are forced positive
/// at every candidate fixed point, leaving `2^(m - card_s)` reachable regions.
pub fn generate_case2_params(m: usize, card_s: usize, eps: f64, seed: u64) -> Result<PlrnnParams> {
    if m < 2 || card_s > m {
        return Err(Error::OutOfRange(format!(
            "need m >= 2 and card_s <= m (m = {m}, card_s = {card_s})"
        )));
    }
    let mut rng = rng::stream(seed, 1);
    let h = DVector::from_fn(m, |_, _| 1.0 - rng.gen::<f64>());
    let beta_min = h.min();
    let beta_max = h.max();
    let r1 = DMatrix::from_fn(m, m, |_, _| -rng.gen::<f64>());
    let n1 = spectral_norm(&r1);
    let mut w = &r1 * (beta_min / (m as f64 + n1 + eps));
    w.fill_diagonal(0.0);
    let alpha_max = w.amax();
    let r_star = (m as f64 - 1.0) * alpha_max * beta_max / beta_min;
    let r2 = DVector::from_fn(m, |i, _| {
        if i < card_s {
            rng.gen_range((r_star - 1.0)..0.0)
        } else {
            rng.gen_range(-1.0..1.0)
        }
    });
    let a = r2 / (2.0 + n1 + eps);
    Ok(PlrnnParams { a, w, h })
}

/// Outcome of [`embed_fixed_point_with`].
#[derive(Debug, Clone)]
pub struct EmbedReport {
    pub params: PlrnnParams,
    pub residual: f64,
    pub iterations: usize,
}

/// Parameters for which `z_star` is an exact fixed point (residual below 1e-8).
pub fn embed_fixed_point(z_star: &DVector<f64>, seed: u64, init_scale: f64) -> Result<PlrnnParams> {
    embed_fixed_point_with(z_star, seed, init_scale, 100_000, 1e-8).map(|r| r.params)
}

/// Gradient descent on `0.5 |z* - (A + W D(z*)) z* - h|^2` over diagonal `A`,
/// zero-diagonal `W` and `h`, from `A, W ~ U(-init_scale, init_scale)`, `h = 0`.
pub fn embed_fixed_point_with(
    z_star: &DVector<f64>,
    seed: u64,
    init_scale: f64,
    max_iters: usize,
    tol: f64,
) -> Result<EmbedReport> {
    let m = z_star.len();
    if m == 0 {
        return Err(Error::InvalidParams("empty target".into()));
    }
    let mut rng = rng::stream(seed, 2);
    let mut draw = || {
        if init_scale > 0.0 {
            rng.gen_range(-init_scale..init_scale)
        } else {
            0.0
        }
    };
    let mut a = DVector::from_fn(m, |_, _| draw());
    let mut w = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { draw() });
    let mut h = DVector::zeros(m);
    let relu = z_star.map(|x| x.max(0.0));
    // largest row curvature of the least-squares problem
    let lr = 1.0 / (1.0 + z_star.amax().powi(2) + relu.norm_squared());

    let residual_of = |a: &DVector<f64>, w: &DMatrix<f64>, h: &DVector<f64>| {
        z_star - (a.component_mul(z_star) + w * &relu + h)
    };
    let mut r = residual_of(&a, &w, &h);
    let mut it = 0;
    while r.norm() >= tol && it < max_iters {
        for n in 0..m {
            a[n] += lr * r[n] * z_star[n];
            h[n] += lr * r[n];
            for j in 0..m {
                if j != n {
                    w[(n, j)] += lr * r[n] * relu[j];
                }
            }
        }
        r = residual_of(&a, &w, &h);
        it += 1;
    }
    let residual = r.norm();
    if residual >= tol {
        return Err(Error::NoConvergence {
            iters: it,
            residual,
        });
    }
    Ok(EmbedReport {
        params: PlrnnParams::new(a, w, h)?,
        residual,
        iterations: it,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plrnn::RegionCode;
    use crate::scyfi::{solve_cycle_candidate, Tolerances};
    use crate::RegionSequence;

    #[test]
    fn case1_norm_bound() {
        for seed in 0..20 {
            let p = generate_case1_params(8, 0.1, seed);
            let (na, nw) = p.norms();
            assert!(na + nw < 1.0);
            assert!(p.h.iter().all(|&x| x > 0.0));
            assert!(p.is_offdiag());
        }
    }

    #[test]
    fn case2_forces_constrained_units_positive() {
        let p = generate_case2_params(6, 3, 1.0, 4).unwrap();
        let tol = Tolerances::default();
        for idx in 0..64u64 {
            let seq = RegionSequence::new(vec![RegionCode::from_index(idx, 6)]);
            let c = solve_cycle_candidate(&p, &seq, &tol).unwrap();
            for s in 0..3 {
                assert!(c.points[0][s] > 0.0);
            }
        }
    }

    #[test]
    fn embedding_from_zero_start() {
        let z = DVector::from_vec(vec![0.7, -1.2, 0.4]);
        let r = embed_fixed_point_with(&z, 0, 0.0, 100_000, 1e-8).unwrap();
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn embedded_point_is_a_true_fixed_point() {
        let z = DVector::from_vec(vec![0.9, -0.5, 1.3, -0.8]);
        let p = embed_fixed_point(&z, 3, 0.5).unwrap();
        let seq = RegionSequence::new(vec![RegionCode::of(&z)]);
        let c = solve_cycle_candidate(&p, &seq, &Tolerances::default()).unwrap();
        assert!(c.consistent);
        assert!((&c.points[0] - &z).amax() < 1e-6);
    }
}
