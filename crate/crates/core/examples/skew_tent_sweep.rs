//! Sweep the right slope of the one-unit skew tent and list the detected
//! bifurcations with their refined locations.

use scyfi::scyfi::SearchBudget;
use scyfi::sweep::{run_sweep, Axis, ParamTarget, SweepSpec, System};
use scyfi::PlrnnParams;

fn main() {
    let a_l = 0.5;
    let spec = SweepSpec::new(
        System::Plrnn(PlrnnParams::skew_tent(a_l, a_l, 1.0)),
        vec![Axis {
            target: ParamTarget::W(0, 0),
            lo: -2.5,
            hi: 1.0,
            n_steps: 37,
        }],
        4,
        SearchBudget::auto(1e-3, 0),
    );
    let res = run_sweep(&spec).expect("valid sweep");
    for cell in &res.cells {
        let orders: Vec<String> = cell
            .library
            .iter()
            .map(|c| format!("{}{}", c.order, if c.is_stable() { "s" } else { "u" }))
            .collect();
        println!("a_r = {:>7.3}: {}", cell.coords[0] + a_l, orders.join(" "));
    }
    for e in &res.events {
        println!("{:>16} order {} at a_r = {:.8}", e.kind, e.order, e.loc.coords[0] + a_l);
    }
}
