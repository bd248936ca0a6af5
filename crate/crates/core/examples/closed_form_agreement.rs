//! The planar 2-cycle from its closed form and from the search, side by side.

use num_complex::Complex64;
use scyfi::pwl2d::{coexistence_example, cycle2};
use scyfi::scyfi::{find_all, SearchBudget, Tolerances};

fn main() {
    for a_r in [-1.5, -2.0, -2.5] {
        let p = coexistence_example(0.253, a_r);
        let v = cycle2(&p);
        let lib = find_all(&p, 2, &SearchBudget::auto(1e-3, 0), &Tolerances::default());
        println!("a_r = {a_r}: closed form exists = {}, stable = {}", v.exists, v.stable);
        for q in &v.points {
            println!("  closed form point ({:.12}, {:.12})", q[0], q[1]);
        }
        let disc = Complex64::new(v.trace * v.trace - 4.0 * v.det, 0.0).sqrt();
        println!("  closed form eigenvalues {:.12} {:.12}", (v.trace + disc) / 2.0, (v.trace - disc) / 2.0);
        for c in lib.cycles(2) {
            for z in &c.points {
                println!("  search point      ({:.12}, {:.12})", z[0], z[1]);
            }
            println!("  search eigenvalues {:.12} {:.12}", c.eigenvalues[0], c.eigenvalues[1]);
        }
    }
}
