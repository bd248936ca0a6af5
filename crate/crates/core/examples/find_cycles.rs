//! All fixed points and cycles of a random 3-unit PLRNN, checked against
//! exhaustive enumeration.
//!
//! `cargo run --release --example find_cycles -- 7`

use scyfi::scyfi::{exhaustive_oracle, find_all, random_params, SearchBudget, Tolerances};
use scyfi::{cli, rng};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let p = random_params(3, &mut rng::stream(seed, 0), (-1.0, 1.0), (-2.0, 2.0), (-1.0, 1.0));
    let tol = Tolerances::default();
    let lib = find_all(&p, 4, &SearchBudget::auto(1e-3, seed), &tol);
    print!("{}", cli::summary_table(&lib, 4));
    for c in lib.iter() {
        let pts: Vec<String> = c.points.iter().map(|z| format!("{:.4}", z.transpose())).collect();
        println!("{}  {}  |lambda|max {:.4}  {}", c.region_seq, c.stability, c.max_abs_eig, pts.join(" -> ").replace('\n', ""));
    }
    let oracle = exhaustive_oracle(&p, 4, &tol).unwrap();
    match lib.matches(&oracle, 1e-8) {
        Ok(()) => println!("enumeration agrees ({} objects)", oracle.total()),
        Err(e) => println!("enumeration disagrees: {e}"),
    }
}
