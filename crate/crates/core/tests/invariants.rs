use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use scyfi::io::{read_library, write_library};
use scyfi::pwl2d::{curve_values, ObjectKind, Pwl2dParams};
use scyfi::scyfi::{cycle_jacobian, exhaustive_oracle, find_all, SearchBudget, Tolerances};
use scyfi::sweep::{run_sweep, Axis, EventKind, ParamTarget, SweepSpec, System};
use scyfi::train::{bptt_gradient, gtf_alpha_bound, gtf_jacobian_product, loss_value, GtfConfig, LossSpec};
use scyfi::linalg::spectral_radius;
use scyfi::{PlrnnParams, RegionCode, RegionSequence};

fn params(m: usize, scale: f64) -> impl Strategy<Value = PlrnnParams> {
    (
        prop::collection::vec(-1.0..1.0f64, m),
        prop::collection::vec(-scale..scale, m * m),
        prop::collection::vec(-1.0..1.0f64, m),
    )
        .prop_map(move |(a, w, h)| PlrnnParams {
            a: DVector::from_vec(a),
            w: DMatrix::from_vec(m, m, w),
            h: DVector::from_vec(h),
        })
}

fn sequence(bits: usize, k: usize) -> impl Strategy<Value = RegionSequence> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), bits), k)
        .prop_map(|codes| RegionSequence::new(codes.into_iter().map(RegionCode::new).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_rotation(seq in (1usize..4, 1usize..7).prop_flat_map(|(b, k)| sequence(b, k)), shift in 0usize..7) {
        let c = seq.canonical();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(seq.rotated(shift % seq.len()).canonical(), c.clone());
        prop_assert!(seq.equivalent(&c));
    }

    #[test]
    fn curve_polynomials_match_composed_jacobian(
        a_l in -3.0..3.0f64, a_r in -3.0..3.0f64, b_l in -1.0..1.0f64, b_r in -1.0..1.0f64,
        c in -1.0..1.0f64, d in -1.0..1.0f64,
    ) {
        let p = Pwl2dParams { a_l, a_r, b_l, b_r, c, d, h1: 1.0, h2: 0.0 };
        for kind in ObjectKind::ALL {
            let j = cycle_jacobian(&p, &kind.region_seq());
            let v = curve_values(&p, kind);
            let i = DMatrix::<f64>::identity(2, 2);
            let tol = 1e-9 * (1.0 + j.norm().powi(2));
            prop_assert!((v.p_at_1 - (&i - &j).determinant()).abs() < tol, "{:?}", kind);
            prop_assert!((v.p_at_minus1 - (&i + &j).determinant()).abs() < tol, "{:?}", kind);
            prop_assert!((v.det - j.determinant()).abs() < tol, "{:?}", kind);
        }
    }

    #[test]
    fn forced_products_contract_above_the_bound(
        p in (2usize..4).prop_flat_map(|m| params(m, 1.5)),
        codes in prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 1..40),
        margin in 1e-3..0.5f64,
    ) {
        let m = p.m();
        let bound = gtf_alpha_bound(&p);
        let alpha = (bound.alpha_star + margin).min(1.0);
        let codes: Vec<RegionCode> = codes.into_iter().map(|c| RegionCode::new(c[..m].to_vec())).collect();
        let prod = gtf_jacobian_product(&p, &codes, alpha);
        prop_assert!(spectral_radius(&prod) < 1.0);
    }

    #[test]
    fn bptt_matches_finite_differences(
        p in (1usize..4).prop_flat_map(|m| params(m, 0.8)),
        alpha in prop_oneof![Just(0.0), 0.05..0.95f64],
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let m = p.m();
        let mut r = scyfi::rng::stream(seed, 0);
        let xs: Vec<DVector<f64>> = (0..8).map(|_| DVector::from_fn(m, |_, _| r.gen_range(-1.0..1.0))).collect();
        let loss = LossSpec::new(xs.clone()).unwrap();
        let gtf = GtfConfig::new(alpha).unwrap();
        let z0 = xs[0].clone();
        let states = scyfi::train::trajectory(&p, &z0, &loss, Some(&gtf)).unwrap();
        let clear = states.iter().zip(&xs).all(|(z, x)| (z * (1.0 - alpha) + x * alpha).iter().all(|v| v.abs() > 1e-3));
        prop_assume!(clear);
        let g = bptt_gradient(&p, &z0, &loss, Some(&gtf)).unwrap().grad;
        let eps = 1e-6;
        for i in 0..m {
            let mut up = p.clone();
            let mut dn = p.clone();
            up.h[i] += eps;
            dn.h[i] -= eps;
            let fd = (loss_value(&up, &z0, &loss, Some(&gtf)).unwrap() - loss_value(&dn, &z0, &loss, Some(&gtf)).unwrap()) / (2.0 * eps);
            prop_assert!((fd - g.h[i]).abs() <= 1e-5 * (1.0 + fd.abs()), "h[{}]: {} vs {}", i, fd, g.h[i]);
            for j in 0..m {
                let mut up = p.clone();
                let mut dn = p.clone();
                up.w[(i, j)] += eps;
                dn.w[(i, j)] -= eps;
                let fd = (loss_value(&up, &z0, &loss, Some(&gtf)).unwrap() - loss_value(&dn, &z0, &loss, Some(&gtf)).unwrap()) / (2.0 * eps);
                prop_assert!((fd - g.w[(i, j)]).abs() <= 1e-5 * (1.0 + fd.abs()), "W[{},{}]", i, j);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn search_reproduces_the_oracle(p in (1usize..3).prop_flat_map(|m| params(m, 2.0)), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let lib = find_all(&p, 4, &SearchBudget::auto(1e-4, seed), &tol);
        let oracle = exhaustive_oracle(&p, 4, &tol).unwrap();
        prop_assert_eq!(lib.matches(&oracle, 1e-8), Ok(()));
    }

    #[test]
    fn library_round_trips(p in params(2, 2.0)) {
        let lib = find_all(&p, 3, &SearchBudget::fixed(100, 30, 0), &Tolerances::default());
        let mut buf = Vec::new();
        write_library(&mut buf, &lib).unwrap();
        let back = read_library(buf.as_slice()).unwrap();
        prop_assert_eq!(back.total(), lib.total());
        prop_assert_eq!(back.matches(&lib, 0.0), Ok(()));
    }
}

fn border_events(lo: f64, hi: f64) -> Vec<(EventKind, usize, f64)> {
    let spec = SweepSpec::new(
        System::Plrnn(PlrnnParams::skew_tent(0.5, 0.0, 1.0)),
        vec![Axis { target: ParamTarget::W(0, 0), lo, hi, n_steps: 25 }],
        2,
        SearchBudget::fixed(50, 20, 1),
    );
    let mut out: Vec<(EventKind, usize, f64)> = run_sweep(&spec)
        .unwrap()
        .events
        .into_iter()
        .map(|e| (e.kind, e.order, e.loc.coords[0]))
        .collect();
    out.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    out
}

#[test]
fn sweep_direction_does_not_change_events() {
    let fwd = border_events(-2.0, 1.0);
    let bwd = border_events(1.0, -2.0);
    assert_eq!(fwd.len(), bwd.len(), "{fwd:?} vs {bwd:?}");
    for (a, b) in fwd.iter().zip(&bwd) {
        assert_eq!((a.0, a.1), (b.0, b.1));
        assert!((a.2 - b.2).abs() < 1e-5, "{a:?} vs {b:?}");
    }
}
