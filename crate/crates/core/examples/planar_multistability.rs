//! Stable objects of the one-border planar map over an (a_l, a_r) grid:
//! closed forms against the cycle search, plus a character map of the
//! number of coexisting stable objects.

use scyfi::pwl2d::{self, coexistence_example, linspace, multistability_scan};
use scyfi::scyfi::{find_all, SearchBudget, Tolerances};

fn main() {
    let n = 40;
    let base = coexistence_example(0.0, 0.0);
    let axis = linspace(-3.0, 1.0, n);
    let cells = multistability_scan(&base, &axis, &axis);
    let budget = SearchBudget::auto(1e-3, 0);
    let tol = Tolerances::default();
    let agree = scyfi::cli::agreement(&base, &cells, &budget, &tol);
    println!("closed forms and search agree in {agree}/{} cells", cells.len());
    println!("cells with coexisting stable objects: {}", pwl2d::mab_cells(&cells).len());

    // rows: a_r from high to low, columns: a_l
    for j in (0..n).rev() {
        let row: String = (0..n)
            .map(|i| match cells[i * n + j].n_stable() {
                0 => '.',
                1 => '1',
                2 => '2',
                _ => '3',
            })
            .collect();
        println!("{:>6.2} {row}", axis[j]);
    }

    let d = coexistence_example(0.253, -2.83);
    let lib = find_all(&d, 3, &budget, &tol);
    for c in lib.iter().filter(|c| c.is_stable()) {
        println!("stable {}-cycle {} with spectral radius {:.4}", c.order, c.region_seq, c.max_abs_eig);
    }
}
