//! Linear solves until a first k-cycle is found, against blind enumeration
//! of region sequences, and the cost of locating the fixed point of large
//! contracting positive systems.

use scyfi::rng;
use scyfi::scyfi::{order_benchmark_systems, scaling_by_dimension, scaling_by_order, SearchBudget, Tolerances};

fn main() {
    let tol = Tolerances::default();
    let systems = order_benchmark_systems(2, 5, 6, 0, &tol);
    let seeds: Vec<u64> = (0..50).map(|s| rng::split(0, s)).collect();
    let rows = scaling_by_order(&systems, &(1..=6).collect::<Vec<_>>(), &seeds, &SearchBudget::fixed(100_000, 100, 0), &tol);
    println!("  k  search  enumeration  expected");
    for r in &rows {
        println!("{:>3}  {:>6}  {:>11}  {:>8.1}", r.k, r.scyfi_median, r.exhaustive_median, r.exhaustive_expected);
    }

    let dim = scaling_by_dimension(&[2, 8, 32, 128], &(0..20).collect::<Vec<_>>(), 0.1, &SearchBudget::fixed(1000, 100, 0), &tol);
    println!("\n   M  median  max");
    for r in &dim {
        println!("{:>4}  {:>6}  {:>3}", r.m_dim, r.scyfi_median, r.scyfi_max);
    }
}
