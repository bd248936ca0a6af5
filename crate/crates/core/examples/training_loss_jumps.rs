//! Two-parameter training on a 2-cycle target from a chaotic start, with and
//! without teacher forcing. Plain BPTT meets exploding gradients and crosses
//! bifurcations; the forced run does not.

use nalgebra::DVector;
use rand::Rng;
use scyfi::rng;
use scyfi::scyfi::{find_all, SearchBudget, Tolerances};
use scyfi::sweep::{analyze_training_trace, EventThresholds, ParamTarget};
use scyfi::train::{train, Annealing, LossSpec, TrainConfig};
use scyfi::PlrnnParams;

fn main() {
    let tol = Tolerances::default();
    let teacher = PlrnnParams::restricted_planar(0.5, -2.4, 0.5, 0.2, 1.0, 0.0);
    let lib = find_all(&teacher, 2, &SearchBudget::fixed(100, 50, 0), &tol);
    let cycle = lib.cycles(2).iter().find(|c| c.is_stable()).unwrap();
    let xs: Vec<DVector<f64>> = (0..50).map(|t| cycle.points[t % 2].clone()).collect();
    let loss = LossSpec::new(xs.clone()).unwrap();

    for alpha in [0.0, 0.1] {
        for seed in 0..5 {
            let mut r = rng::stream(seed, 7);
            let a_l = r.gen_range(0.45..0.55);
            let a_r = r.gen_range(-2.4..-2.2);
            let start = PlrnnParams::restricted_planar(a_l, a_r - a_l, 0.5, 0.2, 1.0, 0.0);
            let cfg = TrainConfig {
                lr: 0.01,
                epochs: 300,
                grad_clip: None,
                alpha,
                annealing: Annealing::None,
                trainable: Some(vec![ParamTarget::A(0), ParamTarget::W(0, 0)]),
            };
            let trace = train(&start, &xs[0], &loss, &cfg);
            let snaps = trace.snapshots();
            let events = if snaps.len() > 1 {
                analyze_training_trace(&snaps, 2, &SearchBudget::fixed(100, 50, 0), &tol, &EventThresholds::default())
                    .unwrap()
                    .events
            } else {
                Vec::new()
            };
            let last = trace.records.last().unwrap();
            println!(
                "alpha {alpha} seed {seed}: {} epochs, final free loss {:.3e}, largest jump {:?}{}",
                trace.records.len(),
                last.free_loss,
                trace.largest_jump().map(|(e, d)| (e, format!("{d:.2e}"))),
                trace.truncated.as_deref().map(|m| format!(", stopped: {m}")).unwrap_or_default()
            );
            for e in &events {
                println!("    {} of a {}-cycle at epoch {:.3}", e.kind, e.order, e.loc.coords[0]);
            }
        }
    }
}
