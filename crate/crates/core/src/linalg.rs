//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Result of solving `a x = b` together with the 1-norm reciprocal condition number of `a`.
#[derive(Debug, Clone)]
pub struct Solved {
    pub x: DVector<f64>,
    pub rcond: f64,
}

/// Solve `a x = b` by LU with partial pivoting. Returns `Err(rcond)` when the
/// reciprocal condition number falls below `singular_tol` (or LU breaks down).
pub fn solve_checked(a: &DMatrix<f64>, b: &DVector<f64>, singular_tol: f64) -> Result<Solved, f64> {
    let lu = a.clone().lu();
    let inv = match lu.try_inverse() {
        Some(inv) => inv,
        None => return Err(0.0),
    };
    let denom = norm1(a) * norm1(&inv);
    let rcond = if denom.is_finite() && denom > 0.0 {
        1.0 / denom
    } else {
        0.0
    };
    if !(rcond >= singular_tol) {
        return Err(rcond);
    }
    let x = match lu.solve(b) {
        Some(x) => x,
        None => return Err(0.0),
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(rcond);
    }
    Ok(Solved { x, rcond })
}

/// Eigenvalues of a square matrix, sorted by (re, im).
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let n = m.nrows();
    let mut ev: Vec<Complex64> = match n {
        0 => Vec::new(),
        1 => vec![Complex64::new(m[(0, 0)], 0.0)],
        2 => {
            // closed form keeps 2-D results exact to rounding
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = tr * tr / 4.0 - det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                vec![
                    Complex64::new(tr / 2.0 - s, 0.0),
                    Complex64::new(tr / 2.0 + s, 0.0),
                ]
            } else {
                let s = (-disc).sqrt();
                vec![
                    Complex64::new(tr / 2.0, -s),
                    Complex64::new(tr / 2.0, s),
                ]
            }
        }
        _ => m.complex_eigenvalues().iter().cloned().collect(),
    };
    sort_complex(&mut ev);
    ev
}

pub fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
