//! Teacher-forcing strength that makes every Jacobian product contract, and
//! what happens to products just below and above it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use scyfi::linalg::spectral_radius;
use scyfi::train::{gtf_alpha_bound, gtf_jacobian_product};
use scyfi::{rng, PlrnnParams, RegionCode};

fn main() {
    let mut r = rng::stream(3, 0);
    let m = 3;
    let p = PlrnnParams {
        a: DVector::from_fn(m, |_, _| r.gen_range(0.9..1.3)),
        w: DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { r.gen_range(-0.8..0.8) }),
        h: DVector::zeros(m),
    };
    let b = gtf_alpha_bound(&p);
    println!("r = {:.4}, alpha* = {:.4}", b.r, b.alpha_star);
    for alpha in [0.0, b.alpha_star / 2.0, b.alpha_star + 0.01] {
        let worst = (0..500)
            .map(|_| {
                let n = r.gen_range(1..=50);
                let codes: Vec<RegionCode> = (0..n).map(|_| RegionCode::new((0..m).map(|_| r.gen()).collect())).collect();
                spectral_radius(&gtf_jacobian_product(&p, &codes, alpha))
            })
            .fold(0.0, f64::max);
        println!("alpha = {alpha:.4}: largest spectral radius over 500 products {worst:.4}");
    }
}
