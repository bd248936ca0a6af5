//! Acceptance runner. Prints one line per criterion and exits non-zero if a
//! criterion outside `EXPECTED_RED` fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use scyfi::cli::agreement;
use scyfi::linalg::{sort_complex, spectral_radius};
use scyfi::pwl2d::{self, coexistence_example, linspace, multistability_scan, ObjectKind, Pwl2dParams};
use scyfi::rng;
use scyfi::scyfi::{
    exhaustive_expectation, exhaustive_oracle, find_all, median, order_benchmark_systems, random_params,
    scaling_by_dimension, scaling_by_order, SearchBudget, Tolerances,
};
use scyfi::sweep::{analyze_training_trace, run_sweep, Axis, EventKind, EventThresholds, ParamTarget, SweepSpec, System};
use scyfi::train::{
    bptt_gradient, cycle_gradient, gtf_alpha_bound, gtf_jacobian_product, loss_value, train, trajectory, Annealing,
    GtfConfig, LossSpec, TrainConfig,
};
use scyfi::{PlrnnParams, RegionCode};

/// Criteria that cannot hold as stated; see the decisions ledger.
const EXPECTED_RED: &[u32] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// 1 ---------------------------------------------------------------------------

const ORACLE_TOL: f64 = 1e-8;

fn random_system(i: u64) -> PlrnnParams {
    let mut r = rng::stream(2024, i);
    match i % 3 {
        0 => PlrnnParams::skew_tent(r.gen_range(-1.0..1.0), r.gen_range(-3.0..1.0), r.gen_range(0.2..1.0)),
        k => random_params(k as usize + 1, &mut r, (-1.0, 1.0), (-2.0, 2.0), (-1.0, 1.0)),
    }
}

fn oracle_equivalence() -> Outcome {
    let tol = Tolerances::default();
    let mut bad = Vec::new();
    let mut total = 0;
    for i in 0..20 {
        let p = random_system(i);
        let lib = find_all(&p, 5, &SearchBudget::auto(1e-3, i), &tol);
        let oracle = exhaustive_oracle(&p, 5, &tol).expect("within guard");
        total += oracle.total();
        if let Err(e) = lib.matches(&oracle, ORACLE_TOL) {
            bad.push(format!("system {i} (M={}): {e}", p.m()));
        }
    }
    outcome(bad.is_empty(), format!("20 systems, {total} oracle objects, mismatches: {bad:?}"))
}

// 2 ---------------------------------------------------------------------------

const GRID_AGREEMENT: f64 = 0.99;

fn planar_grid() -> Outcome {
    let tol = Tolerances::default();
    let budget = SearchBudget::auto(1e-3, 0);
    let base = coexistence_example(0.0, 0.0);
    let axis = linspace(-3.0, 1.0, 50);
    let cells = multistability_scan(&base, &axis, &axis);
    let n_ok = agreement(&base, &cells, &budget, &tol);
    let frac = n_ok as f64 / cells.len() as f64;

    // every disagreeing cell must border a change of the closed-form inventory
    let kinds = |i: usize, j: usize| cells[i * 50 + j].stable_kinds();
    let mut interior = Vec::new();
    for c in &cells {
        let p = Pwl2dParams { a_l: c.a_l, a_r: c.a_r, ..base };
        if pwl2d::stable_kinds_in(&find_all(&p, 3, &budget, &tol)) == c.stable_kinds() {
            continue;
        }
        let own = kinds(c.i, c.j);
        let straddles = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)].iter().any(|(di, dj)| {
            let (i, j) = (c.i as i64 + di, c.j as i64 + dj);
            (0..50).contains(&i) && (0..50).contains(&j) && kinds(i as usize, j as usize) != own
        });
        if !straddles {
            interior.push((c.a_l, c.a_r));
        }
    }

    let d = coexistence_example(0.253, -2.83);
    let orders = |ks: &[ObjectKind]| {
        let mut o: Vec<usize> = ks.iter().map(|k| k.order()).collect();
        o.dedup();
        o
    };
    let analytic = pwl2d::oracle_stable_kinds(&d);
    let searched = pwl2d::stable_kinds_in(&find_all(&d, 3, &budget, &tol));
    let coexist = analytic == searched && orders(&analytic).contains(&2) && orders(&analytic).contains(&3);

    outcome(
        frac >= GRID_AGREEMENT && interior.is_empty() && coexist,
        format!(
            "agreement {n_ok}/{} = {frac:.4} (>= {GRID_AGREEMENT}), non-straddling disagreements {interior:?}, \
             coexistence point analytic {analytic:?} searched {searched:?}",
            cells.len()
        ),
    )
}

// 3 ---------------------------------------------------------------------------

const CLOSED_FORM_TOL: f64 = 1e-10;

fn exact_agreement() -> Outcome {
    let tol = Tolerances::default();
    let p = coexistence_example(0.253, -2.0);
    let v = pwl2d::cycle2(&p);
    if !v.exists {
        return outcome(false, "closed form reports no 2-cycle");
    }
    let lib = find_all(&p, 2, &SearchBudget::auto(1e-3, 0), &tol);
    let Some(c) = lib.cycles(2).first() else {
        return outcome(false, "search found no 2-cycle");
    };
    let point_err = v
        .points
        .iter()
        .map(|q| {
            c.points
                .iter()
                .map(|z| (z[0] - q[0]).abs().max((z[1] - q[1]).abs()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let disc = Complex64::new(v.trace * v.trace - 4.0 * v.det, 0.0).sqrt();
    let mut closed = vec![(v.trace + disc) / 2.0, (v.trace - disc) / 2.0];
    sort_complex(&mut closed);
    let eig_err = closed
        .iter()
        .zip(&c.eigenvalues)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    outcome(
        point_err < CLOSED_FORM_TOL && eig_err < CLOSED_FORM_TOL && c.eigenvalues.len() == 2,
        format!("point error {point_err:.2e}, eigenvalue error {eig_err:.2e} (< {CLOSED_FORM_TOL:.0e})"),
    )
}

// 4 ---------------------------------------------------------------------------

const LOCATION_TOL: f64 = 1e-6;

fn skew_tent_sweep() -> Outcome {
    let (lo, hi, n) = (-2.0, 1.0, 30);
    let spec = SweepSpec::new(
        System::Plrnn(PlrnnParams::skew_tent(0.5, 0.0, 1.0)),
        vec![Axis {
            target: ParamTarget::W(0, 0),
            lo,
            hi,
            n_steps: n,
        }],
        2,
        SearchBudget::auto(1e-3, 0),
    );
    let res = match run_sweep(&spec) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let step = (hi - lo) / (n - 1) as f64;
    let located = |kind: EventKind, order: usize, a_r: f64| {
        res.events.iter().find(|e| {
            e.kind == kind
                && e.order == order
                && (e.loc.coords[0] + 0.5 - a_r).abs() < LOCATION_TOL
                && e.loc.width * step < LOCATION_TOL
        })
    };
    let dtb = located(EventKind::Dtb, 1, 1.0).is_some();
    let dfb = located(EventKind::Dfb, 1, -1.0).is_some();
    let bcb = located(EventKind::Bcb, 2, -1.0).is_some();
    let widths: Vec<String> = res
        .events
        .iter()
        .map(|e| format!("{}@{:.7} width {:.1e}", e.kind, e.loc.coords[0] + 0.5, e.loc.width * step))
        .collect();
    outcome(dtb && dfb && bcb, format!("DTB at 1: {dtb}, DFB+BCB at -1: {dfb}/{bcb}; events {widths:?}"))
}

// 5 ---------------------------------------------------------------------------

const MC_TRIALS: usize = 100_000;

/// Allowed deviation of the sample median in standard errors, plus one for
/// the discrete step at the median.
const MEDIAN_SE: f64 = 4.0;

/// `P(first hit > n)` when `m` of `big_n` items are marked.
fn survival(big_n: usize, m: usize, n: usize) -> f64 {
    (0..m).map(|i| (big_n.saturating_sub(n + i)) as f64 / (big_n - i) as f64).product()
}

/// Asymptotic standard error of the sample median, `1 / (2 f sqrt(trials))`.
fn median_se(big_n: usize, m: usize, med: usize) -> f64 {
    let f = survival(big_n, m, med - 1) - survival(big_n, m, med);
    1.0 / (2.0 * f * (MC_TRIALS as f64).sqrt())
}

fn enumeration_formula() -> Outcome {
    let base = exhaustive_expectation(2, 1, 1).map(|e| e.expected).unwrap_or(f64::NAN);
    let mut r = rng::stream(5, 0);
    let mut rows = Vec::new();
    let mut ok = base == 2.5;
    for case in 0..10 {
        let bits = r.gen_range(1..=3usize);
        let k = r.gen_range(1..=(12 / bits).min(4));
        let n = 1usize << (bits * k);
        let m = r.gen_range(1..=8usize.min(n));
        let formula = exhaustive_expectation(bits, k, m as u64).expect("valid case").median;
        let mut crng = rng::stream(5, 1 + case);
        let firsts: Vec<f64> = (0..MC_TRIALS)
            .map(|_| (sample(&mut crng, n, m).iter().min().unwrap() + 1) as f64)
            .collect();
        let mc = median(&firsts);
        let slack = 1.0 + MEDIAN_SE * median_se(n, m, formula as usize);
        ok &= (mc - formula as f64).abs() <= slack;
        rows.push(format!("(M={bits},k={k},m={m}) formula {formula} mc {mc} +-{slack:.1}"));
    }
    outcome(ok, format!("E(M=2,k=1,m=1) = {base}; {}", rows.join(", ")))
}

// 6 ---------------------------------------------------------------------------

/// The search slope must be below this fraction of the enumeration slope.
const SLOPE_FRACTION: f64 = 0.5;
/// Cost ratio at k = 6 relative to k = 1.
const RATIO_SHRINK: f64 = 0.25;

fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        sxy += (i as f64 - xm) * (y - ym);
        sxx += (i as f64 - xm).powi(2);
    }
    sxy / sxx
}

fn scaling() -> Outcome {
    let tol = Tolerances::default();
    let systems = order_benchmark_systems(2, 5, 6, 0, &tol);
    let seeds: Vec<u64> = (0..50).map(|s| rng::split(0, s)).collect();
    let ks: Vec<usize> = (1..=6).collect();
    let rows = scaling_by_order(&systems, &ks, &seeds, &SearchBudget::fixed(100_000, 100, 0), &tol);
    let scyfi_log: Vec<f64> = rows.iter().map(|r| r.scyfi_median.ln()).collect();
    let base_log: Vec<f64> = rows.iter().map(|r| r.exhaustive_median.ln()).collect();
    let (s_slope, b_slope) = (ls_slope(&scyfi_log), ls_slope(&base_log));
    let ratio: Vec<f64> = rows.iter().map(|r| r.scyfi_median / r.exhaustive_median).collect();
    let missed: usize = rows.iter().map(|r| r.missed).sum();
    let order_ok = systems.len() == 5
        && missed == 0
        && s_slope < SLOPE_FRACTION * b_slope
        && ratio[5] < RATIO_SHRINK * ratio[0];

    let ms = [2, 4, 8, 16, 32, 64];
    let dim = scaling_by_dimension(&ms, &(0..50).collect::<Vec<_>>(), 0.1, &SearchBudget::fixed(1000, 100, 0), &tol);
    let case1_ok = dim.iter().all(|r| r.missed == 0 && r.scyfi_median <= 2.0);

    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("k{} {}/{}", r.k, r.scyfi_median, r.exhaustive_median))
        .collect();
    let case1: Vec<String> = dim.iter().map(|r| format!("M{} {}", r.m_dim, r.scyfi_median)).collect();
    outcome(
        order_ok && case1_ok,
        format!(
            "medians search/enumeration {table:?}, log-slopes {s_slope:.3} vs {b_slope:.3}, ratio k6/k1 {:.3}, \
             misses {missed}; Case I medians {case1:?}",
            ratio[5] / ratio[0]
        ),
    )
}

// 7 ---------------------------------------------------------------------------

const BLOWUP_FLOOR: f64 = 1e6;

fn fixed_point_of(p: &PlrnnParams, tol: &Tolerances) -> Option<scyfi::CycleObject> {
    find_all(p, 1, &SearchBudget::fixed(20, 20, 0), tol)
        .cycles(1)
        .iter()
        .find(|c| c.points[0][0] > 0.0)
        .cloned()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn unit_eigenvalue_blowup() -> Outcome {
    let tol = Tolerances::default();
    let theta = ParamTarget::W(0, 0);
    let mut cyc = Vec::new();
    let mut bptt = Vec::new();
    let targets = LossSpec::new(vec![DVector::from_element(1, 0.0); 100]).unwrap();
    let z0 = DVector::from_element(1, 1.0);
    for a_r in [0.9, 0.99, 0.999, 0.9999] {
        let p = PlrnnParams::skew_tent(0.5, a_r, 1.0);
        let g = fixed_point_of(&p, &tol)
            .and_then(|c| cycle_gradient(&p, &c, &theta, &tol).ok())
            .map(|d| d[0].norm())
            .unwrap_or(f64::NAN);
        cyc.push(g);
        bptt.push(
            bptt_gradient(&p, &z0, &targets, None)
                .map(|r| r.grad.get(&theta).unwrap().abs())
                .unwrap_or(f64::NAN),
        );
    }
    outcome(
        increasing(&cyc) && cyc[3] > BLOWUP_FLOOR && increasing(&bptt),
        format!("cycle gradient {}, BPTT (T = 100) {}", sci(&cyc), sci(&bptt)),
    )
}

// 8 ---------------------------------------------------------------------------

const VANISH_CEILING: f64 = 1e-8;

fn border_vanishing() -> Outcome {
    let tol = Tolerances::default();
    let mut rows = Vec::new();
    let mut ok = true;
    for theta in [ParamTarget::A(0), ParamTarget::W(0, 0)] {
        let mut g = Vec::new();
        for e in 1..=6 {
            let p = PlrnnParams::skew_tent(0.5, 0.5, 10f64.powi(-e));
            g.push(
                fixed_point_of(&p, &tol)
                    .and_then(|c| cycle_gradient(&p, &c, &theta, &tol).ok())
                    .map(|d| d[0][0].abs())
                    .unwrap_or(f64::NAN),
            );
        }
        ok &= g.windows(2).all(|w| w[1] < w[0]) && g[5] < VANISH_CEILING;
        rows.push(format!("{theta}: {}", sci(&g)));
    }
    outcome(ok, format!("a_r = 0.5, h = 1e-1..1e-6: {}", rows.join("; ")))
}

// 9 ---------------------------------------------------------------------------

fn random_codes(r: &mut impl Rng, m: usize, n: usize) -> Vec<RegionCode> {
    (0..n).map(|_| RegionCode::new((0..m).map(|_| r.gen()).collect())).collect()
}

fn gtf_contraction() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..10 {
        let mut r = rng::stream(9, i);
        let m = r.gen_range(2..=4);
        let a = DVector::from_fn(m, |_, _| r.gen_range(-1.0..1.0));
        let w = DMatrix::from_fn(m, m, |_, _| r.gen_range(-1.0..1.0));
        let p = PlrnnParams { a, w, h: DVector::zeros(m) };
        let s = r.gen_range(1.0..3.0) / gtf_alpha_bound(&p).r;
        let p = PlrnnParams { a: &p.a * s, w: &p.w * s, h: p.h };
        let alpha = gtf_alpha_bound(&p).alpha_star + 0.01;
        for _ in 0..200 {
            let n = r.gen_range(1..=50);
            let codes = random_codes(&mut r, m, n);
            worst = worst.max(spectral_radius(&gtf_jacobian_product(&p, &codes, alpha)));
        }
    }

    let mut expanding = 0;
    for i in 0..10 {
        let mut r = rng::stream(9, 100 + i);
        let m = r.gen_range(2..=4);
        let a = DVector::from_fn(m, |_, _| r.gen_range(1.05..1.5));
        let w = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { r.gen_range(-0.5..0.5) });
        let p = PlrnnParams { a, w, h: DVector::zeros(m) };
        let hit = (0..200).any(|_| {
            let n = r.gen_range(1..=50);
            let codes = random_codes(&mut r, m, n);
            spectral_radius(&gtf_jacobian_product(&p, &codes, 0.0)) > 1.0
        });
        expanding += hit as usize;
    }
    outcome(
        worst < 1.0 && expanding == 10,
        format!("max spectral radius at alpha* + 0.01: {worst:.4}; expanding systems with a product > 1 at alpha = 0: {expanding}/10"),
    )
}

// 10 --------------------------------------------------------------------------

const FD_STEP: f64 = 1e-6;
const FD_REL_TOL: f64 = 1e-5;
const BORDER_MARGIN: f64 = 1e-3;

fn flat(p: &PlrnnParams) -> Vec<f64> {
    p.a.iter().chain(p.w.iter()).chain(p.h.iter()).copied().collect()
}

fn unflat(m: usize, v: &[f64]) -> PlrnnParams {
    PlrnnParams {
        a: DVector::from_column_slice(&v[..m]),
        w: DMatrix::from_column_slice(m, m, &v[m..m + m * m]),
        h: DVector::from_column_slice(&v[m + m * m..]),
    }
}

fn gradient_check() -> Outcome {
    let mut worst = 0.0f64;
    let mut draws = 0;
    let mut case = 0u64;
    let mut seed = 0u64;
    while case < 20 {
        seed += 1;
        let alpha = if case % 2 == 0 { 0.0 } else { 0.5 };
        let mut r = rng::stream(10, seed);
        let m = 1 + (case % 3) as usize;
        let p = PlrnnParams {
            a: DVector::from_fn(m, |_, _| r.gen_range(-0.9..0.9)),
            w: DMatrix::from_fn(m, m, |_, _| r.gen_range(-0.8..0.8)),
            h: DVector::from_fn(m, |_, _| r.gen_range(-1.0..1.0)),
        };
        let xs: Vec<DVector<f64>> = (0..12).map(|_| DVector::from_fn(m, |_, _| r.gen_range(-1.0..1.0))).collect();
        let z0 = xs[0].clone();
        let loss = LossSpec::new(xs.clone()).unwrap();
        let gtf = GtfConfig::new(alpha).unwrap();
        draws += 1;
        let states = trajectory(&p, &z0, &loss, Some(&gtf)).unwrap();
        let near_border = states
            .iter()
            .zip(&xs)
            .any(|(z, x)| (z * (1.0 - alpha) + x * alpha).iter().any(|v| v.abs() < BORDER_MARGIN));
        if near_border {
            continue;
        }
        let g = bptt_gradient(&p, &z0, &loss, Some(&gtf)).unwrap().grad;
        let analytic: Vec<f64> = flat(&PlrnnParams { a: g.a, w: g.w, h: g.h });
        let base = flat(&p);
        let fd: Vec<f64> = (0..base.len())
            .map(|i| {
                let mut up = base.clone();
                let mut dn = base.clone();
                up[i] += FD_STEP;
                dn[i] -= FD_STEP;
                let lu = loss_value(&unflat(m, &up), &z0, &loss, Some(&gtf)).unwrap();
                let ld = loss_value(&unflat(m, &dn), &z0, &loss, Some(&gtf)).unwrap();
                (lu - ld) / (2.0 * FD_STEP)
            })
            .collect();
        let diff: f64 = analytic.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = fd.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        worst = worst.max(diff / scale);
        case += 1;
    }
    outcome(
        worst < FD_REL_TOL,
        format!("20 cases ({draws} drawn, margin {BORDER_MARGIN}), worst relative error {worst:.2e} (< {FD_REL_TOL:.0e})"),
    )
}

// 11 --------------------------------------------------------------------------

struct DemoRun {
    border_events: usize,
    colocated: bool,
}

fn demo_run(alpha: f64, seed: u64) -> DemoRun {
    let tol = Tolerances::default();
    // teacher with a stable 2-cycle, students start in the chaotic band
    let teacher = PlrnnParams::restricted_planar(0.5, -2.4, 0.5, 0.2, 1.0, 0.0);
    let lib = find_all(&teacher, 2, &SearchBudget::fixed(100, 50, 0), &tol);
    let cycle = lib.cycles(2).iter().find(|c| c.is_stable()).expect("teacher 2-cycle");
    let xs: Vec<DVector<f64>> = (0..50).map(|t| cycle.points[t % 2].clone()).collect();
    let loss = LossSpec::new(xs.clone()).unwrap();
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
    if snaps.len() < 2 {
        return DemoRun { border_events: 0, colocated: false };
    }
    let an = analyze_training_trace(&snaps, 2, &SearchBudget::fixed(100, 50, 0), &tol, &EventThresholds::default())
        .expect("trace analysis");
    let border_events = an.events.iter().filter(|e| e.kind.is_border_or_infinity()).count();
    let colocated = trace.largest_jump().is_some_and(|(e, _)| {
        an.events
            .iter()
            .any(|ev| (ev.loc.coords[0].floor() - e as f64).abs() <= 1.0)
    });
    DemoRun { border_events, colocated }
}

fn training_demo() -> Outcome {
    let plain: Vec<DemoRun> = (0..5).map(|s| demo_run(0.0, s)).collect();
    let forced: Vec<DemoRun> = (0..5).map(|s| demo_run(0.1, s)).collect();
    let n_plain: usize = plain.iter().map(|d| d.border_events).sum();
    let n_forced: usize = forced.iter().map(|d| d.border_events).sum();
    let coloc = plain.iter().filter(|d| d.colocated).count();
    outcome(
        coloc >= 1 && n_forced < n_plain,
        format!(
            "alpha = 0: {coloc}/5 runs with an event within one epoch of the largest jump; \
             DTB/BCB events alpha = 0: {n_plain}, alpha = 0.1: {n_forced}"
        ),
    )
}

// -----------------------------------------------------------------------------

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "oracle equivalence", oracle_equivalence),
        (2, "planar grid agreement", planar_grid),
        (3, "closed-form 2-cycle", exact_agreement),
        (4, "skew tent sweep", skew_tent_sweep),
        (5, "enumeration cost formula", enumeration_formula),
        (6, "search cost scaling", scaling),
        (7, "unit eigenvalue blow-up", unit_eigenvalue_blowup),
        (8, "border collision vanishing", border_vanishing),
        (9, "GTF contraction", gtf_contraction),
        (10, "gradient check", gradient_check),
        (11, "training demo", training_demo),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == id.to_string()) {
            continue;
        }
        let t0 = Instant::now();
        let o = run();
        let secs = t0.elapsed().as_secs_f64();
        let tag = match (o.pass, EXPECTED_RED.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, see ledger)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {name}: {tag} [{secs:.1}s] {}", o.detail);
        if !o.pass && !EXPECTED_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
