//! Ask, before taking a gradient step, whether it would cross a bifurcation.

use nalgebra::DVector;
use scyfi::scyfi::{SearchBudget, Tolerances};
use scyfi::sweep::ParamTarget;
use scyfi::train::{bptt_gradient, lookahead_probe, GtfConfig, LossSpec};
use scyfi::PlrnnParams;

fn main() {
    // fixed point target at z = 4 asks for a_r = 0.75; start just short of it
    let p = PlrnnParams::skew_tent(0.5, 0.7, 1.0);
    let xs = vec![DVector::from_element(1, 4.0); 30];
    let loss = LossSpec::new(xs.clone()).unwrap();
    let g = bptt_gradient(&p, &xs[0], &loss, Some(&GtfConfig::new(0.0).unwrap())).unwrap().grad;
    let g = g.masked(&[ParamTarget::W(0, 0)]);
    println!("dL/dW = {:.4}", g.w[(0, 0)]);
    for lr in [1e-4, 1e-3, 1e-2, 1e-1] {
        let probe = lookahead_probe(&p, &g, lr, 2, &SearchBudget::fixed(20, 20, 0), &Tolerances::default());
        let kinds: Vec<&str> = probe.kinds.iter().map(|k| k.name()).collect();
        println!(
            "lr {lr:e}: new a_r {:.4}, crosses a bifurcation: {} {kinds:?}",
            0.5 + g.step(&p, lr).w[(0, 0)],
            probe.would_bifurcate
        );
    }
}
