//! The `scyfi` command line tool.
//!
//! Exit codes: 0 success, 1 a requested check failed, 2 bad input,
//! 3 budget or enumeration guard, 4 internal numerical failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::io::{self as fio, load_system, SweepSpecFile};
use crate::plrnn::{PiecewiseLinearMap, PlrnnParams};
use crate::pwl2d::{self, linspace, oracle_stable_kinds, stable_kinds_in, Pwl2dParams};
use crate::scyfi::{
    exhaustive_oracle, find_all, order_benchmark_systems, required_initializations,
    scaling_by_dimension, scaling_by_order, scaling_embedded, CycleLibrary, OuterBudget,
    SearchBudget, Stability, Tolerances,
};
use crate::sweep::{analyze_training_trace, diagram_rows, run_sweep, EventKind, EventThresholds, ParamTarget, System};
use crate::train::{gtf_alpha_bound, train, Annealing, LossSpec, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "scyfi", version, about = "Fixed points, cycles and bifurcations of piecewise-linear RNNs")]
pub struct Cli {
    /// Worker threads (falls back to SCYFI_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct BudgetArgs {
    /// Fixed number of random initialisations per order (default: sized from --eps).
    #[arg(long)]
    pub nout: Option<u64>,
    /// Maximum flip steps per initialisation.
    #[arg(long, default_value_t = 100)]
    pub nin: usize,
    /// Probability of missing a given sequence when --nout is not set.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Largest automatic outer budget before refusing to run.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        match self.nout {
            Some(n) => SearchBudget::fixed(n, self.nin, self.seed),
            None => SearchBudget::auto(self.eps, self.seed)
                .with_n_in(self.nin)
                .with_cap(self.cap),
        }
    }

    /// Refuse automatic budgets that the cap would truncate.
    fn checked(&self, bits: usize, k_max: usize) -> Result<SearchBudget> {
        let b = self.budget();
        if let OuterBudget::Auto { miss_prob, cap } = b.n_out {
            for k in 1..=k_max {
                let needed = required_initializations(bits, k, miss_prob);
                if needed > cap {
                    return Err(Error::BudgetExceeded { k, needed, cap });
                }
            }
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScalingMode {
    CycleOrder,
    Dimension,
    Embedded,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find all fixed points and cycles up to order --kmax.
    Find {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Write the library as JSON lines here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run a parameter sweep described by a JSON spec file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for events.jsonl and grid.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the search with exhaustive enumeration or the planar closed forms.
    OracleCheck {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Planar maps only: scan an N x N (a_l, a_r) grid.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value = "-3:1", allow_hyphen_values = true)]
        al: String,
        #[arg(long, default_value = "-3:1", allow_hyphen_values = true)]
        ar: String,
        /// Output directory for the oracle scan CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Measure search cost against blind enumeration.
    Scaling {
        #[arg(long, value_enum)]
        mode: ScalingMode,
        /// System size for cycle-order mode.
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        /// Comma-separated sizes for dimension and embedded modes.
        #[arg(long, default_value = "2,4,8,16,32,64")]
        ms: String,
        #[arg(long, default_value_t = 5)]
        systems: usize,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        #[arg(long, default_value_t = 0.1)]
        case_eps: f64,
        #[arg(long, default_value_t = 0.2)]
        init_scale: f64,
        #[arg(long, default_value_t = 100_000)]
        nout: u64,
        #[arg(long, default_value_t = 100)]
        nin: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output path (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a PLRNN with SGD and write the trace with per-epoch snapshots.
    Train {
        #[arg(long)]
        params: PathBuf,
        /// JSON array of observations, one array of M numbers per time step.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        clip: Option<f64>,
        /// Anneal alpha linearly to zero.
        #[arg(long)]
        anneal: bool,
        /// Comma-separated coordinates such as `A[0],W[0,1],h[1]`.
        #[arg(long)]
        trainable: Option<String>,
    },
    /// Find cycles at every snapshot of a training run and classify the changes.
    AnalyzeTrace {
        /// Run directory written by `train`.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        kmax: usize,
        /// Comma-separated projection direction for the diagram.
        #[arg(long)]
        direction: Option<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Teacher-forcing strength above which every Jacobian product contracts.
    AlphaBound {
        #[arg(long)]
        params: PathBuf,
        /// Check this alpha against the bound.
        #[arg(long)]
        alpha: Option<f64>,
    },
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    CheckFailed,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse().map_err(|_| Error::Field {
                field: what.into(),
                msg: format!("cannot parse `{x}`"),
            })
        })
        .collect()
}

fn parse_range(s: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Field {
            field: what.into(),
            msg: format!("expected LO:HI, got `{s}`"),
        })?;
    match parts.as_slice() {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(Error::Field {
            field: what.into(),
            msg: format!("expected LO:HI, got `{s}`"),
        }),
    }
}

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

/// One-line summary such as `1 stable fixed point, 0 cycles`.
pub fn summary_line(lib: &CycleLibrary) -> String {
    let fps = lib.cycles(1);
    let mut parts = Vec::new();
    for s in [Stability::Stable, Stability::Unstable, Stability::Marginal] {
        let n = fps.iter().filter(|c| c.stability == s).count();
        if n > 0 {
            parts.push(format!("{n} {s} {}", if n == 1 { "fixed point" } else { "fixed points" }));
        }
    }
    if parts.is_empty() {
        parts.push("0 fixed points".into());
    }
    let cycles = lib.total() - fps.len();
    parts.push(plural(cycles, "cycle", "cycles"));
    parts.join(", ")
}

/// Summary line followed by a per-order table.
pub fn summary_table(lib: &CycleLibrary, k_max: usize) -> String {
    let mut s = summary_line(lib);
    s.push_str("\norder  stable  unstable  marginal  solves\n");
    for k in 1..=k_max {
        let c = lib.cycles(k);
        let n = |st| c.iter().filter(|o| o.stability == st).count();
        s.push_str(&format!(
            "{k:>5}  {:>6}  {:>8}  {:>8}  {:>6}\n",
            n(Stability::Stable),
            n(Stability::Unstable),
            n(Stability::Marginal),
            lib.evaluations.get(&k).copied().unwrap_or(0)
        ));
    }
    if !lib.degenerate.is_empty() {
        s.push_str(&format!("{} degenerate sequences\n", lib.degenerate.len()));
    }
    s
}

fn cmd_find(params: &Path, k_max: usize, out: Option<&Path>, budget: &BudgetArgs, w: &mut dyn Write) -> Result<Outcome> {
    let sys = load_system(params)?;
    let b = budget.checked(sys.n_switches(), k_max)?;
    let lib = find_all(&sys, k_max, &b, &Tolerances::default());
    if let Some(path) = out {
        fio::write_library(fio::create_file(path)?, &lib)?;
    }
    write!(w, "{}", summary_table(&lib, k_max))?;
    Ok(Outcome::Ok)
}

fn cmd_sweep(spec: &Path, out: &Path, w: &mut dyn Write) -> Result<Outcome> {
    let spec = SweepSpecFile::load(spec)?;
    let res = run_sweep(&spec)?;
    fio::write_sweep_outputs(out, &res.cells, &res.events)?;
    writeln!(w, "{} cells, {}", res.cells.len(), plural(res.events.len(), "event", "events"))?;
    for kind in [
        EventKind::Dtb,
        EventKind::Bcb,
        EventKind::Dfb,
        EventKind::Cb,
        EventKind::Appear,
        EventKind::Disappear,
        EventKind::StabilityChange,
    ] {
        let n = res.events.iter().filter(|e| e.kind == kind).count();
        if n > 0 {
            writeln!(w, "{kind:>16}: {n}")?;
        }
    }
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle_check(
    params: &Path,
    k_max: usize,
    grid: Option<usize>,
    al: &str,
    ar: &str,
    out: Option<&Path>,
    budget: &BudgetArgs,
    w: &mut dyn Write,
) -> Result<Outcome> {
    let tol = Tolerances::default();
    match load_system(params)? {
        System::Plrnn(p) => {
            let oracle = exhaustive_oracle(&p, k_max, &tol)?;
            let b = budget.checked(p.m(), k_max)?;
            let lib = find_all(&p, k_max, &b, &tol);
            match lib.matches(&oracle, 1e-8) {
                Ok(()) => {
                    writeln!(w, "agree: {} objects up to order {k_max}", oracle.total())?;
                    Ok(Outcome::Ok)
                }
                Err(msg) => {
                    writeln!(w, "disagree: {msg}")?;
                    Ok(Outcome::CheckFailed)
                }
            }
        }
        System::Pwl2d(base) => {
            let b = budget.checked(1, 3)?;
            let Some(n) = grid else {
                let lib = find_all(&base, 3, &b, &tol);
                let (s, o) = (stable_kinds_in(&lib), oracle_stable_kinds(&base));
                let names = |v: &[pwl2d::ObjectKind]| v.iter().map(|k| k.name()).collect::<Vec<_>>().join(" ");
                writeln!(w, "search: [{}]\noracle: [{}]", names(&s), names(&o))?;
                return Ok(if s == o { Outcome::Ok } else { Outcome::CheckFailed });
            };
            let (al_lo, al_hi) = parse_range(al, "al")?;
            let (ar_lo, ar_hi) = parse_range(ar, "ar")?;
            let cells = pwl2d::multistability_scan(&base, &linspace(al_lo, al_hi, n), &linspace(ar_lo, ar_hi, n));
            let agree = agreement(&base, &cells, &b, &tol);
            if let Some(dir) = out {
                fs::create_dir_all(dir)?;
                fio::write_oracle_scan(fio::create_file(&dir.join("oracle.csv"))?, &cells)?;
            }
            let frac = agree as f64 / cells.len() as f64;
            writeln!(w, "stable inventories agree in {agree}/{} cells ({:.2}%)", cells.len(), 100.0 * frac)?;
            Ok(if frac >= 0.99 { Outcome::Ok } else { Outcome::CheckFailed })
        }
    }
}

/// Number of scan cells where the searched stable inventory equals the closed form.
pub fn agreement(base: &Pwl2dParams, cells: &[pwl2d::ScanCell], budget: &SearchBudget, tol: &Tolerances) -> usize {
    use rayon::prelude::*;
    cells
        .par_iter()
        .filter(|c| {
            let p = Pwl2dParams { a_l: c.a_l, a_r: c.a_r, ..*base };
            let mut expect = c.stable_kinds();
            expect.sort();
            stable_kinds_in(&find_all(&p, 3, budget, tol)) == expect
        })
        .count()
}

#[allow(clippy::too_many_arguments)]
fn cmd_scaling(
    mode: ScalingMode,
    m: usize,
    k_max: usize,
    ms: &str,
    systems: usize,
    seeds: u64,
    case_eps: f64,
    init_scale: f64,
    nout: u64,
    nin: usize,
    seed: u64,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<Outcome> {
    let tol = Tolerances::default();
    let budget = SearchBudget::fixed(nout, nin, seed);
    let seed_list: Vec<u64> = (0..seeds).map(|s| crate::rng::split(seed, s)).collect();
    let mut buf = Vec::new();
    match mode {
        ScalingMode::CycleOrder => {
            if m * k_max > 24 {
                return Err(Error::BudgetGuard { bits: m * k_max, limit: 24 });
            }
            let sys = order_benchmark_systems(m, systems, k_max, seed, &tol);
            let ks: Vec<usize> = (1..=k_max).collect();
            fio::write_csv(&mut buf, scaling_by_order(&sys, &ks, &seed_list, &budget, &tol))?;
        }
        ScalingMode::Dimension => {
            let ms: Vec<usize> = parse_list(ms, "ms")?;
            fio::write_csv(&mut buf, scaling_by_dimension(&ms, &seed_list, case_eps, &budget, &tol))?;
        }
        ScalingMode::Embedded => {
            let ms: Vec<usize> = parse_list(ms, "ms")?;
            fio::write_csv(&mut buf, scaling_embedded(&ms, &seed_list, init_scale, &budget, &tol))?;
        }
    }
    match out {
        Some(path) => fio::create_file(path)?.write_all(&buf)?,
        None => w.write_all(&buf)?,
    }
    Ok(Outcome::Ok)
}

fn load_data(path: &Path) -> Result<Vec<DVector<f64>>> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Field {
        field: "data".into(),
        msg: e.to_string(),
    })?;
    Ok(rows.into_iter().map(DVector::from_vec).collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    params: &Path,
    data: &Path,
    out: &Path,
    epochs: usize,
    lr: f64,
    alpha: f64,
    clip: Option<f64>,
    anneal: bool,
    trainable: Option<&str>,
    w: &mut dyn Write,
) -> Result<Outcome> {
    let p = PlrnnParams::load(params)?;
    let xs = load_data(data)?;
    let loss = LossSpec::new(xs)?;
    if loss.dim() != p.m() {
        return Err(Error::Dimension {
            what: "data",
            expected: p.m(),
            found: loss.dim(),
        });
    }
    crate::train::GtfConfig::new(alpha)?;
    let trainable = trainable
        .map(|s| {
            split_targets(s)
                .iter()
                .map(|t| t.parse::<ParamTarget>())
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    if let Some(ts) = &trainable {
        let sys = System::Plrnn(p.clone());
        for t in ts {
            sys.get(t)?;
        }
    }
    let cfg = TrainConfig {
        lr,
        epochs,
        grad_clip: clip,
        alpha,
        annealing: if anneal { Annealing::Linear } else { Annealing::None },
        trainable,
    };
    let z0 = loss.targets[0].clone();
    let trace = train(&p, &z0, &loss, &cfg);
    fio::write_trace(out, &trace)?;
    let last = trace.records.last();
    writeln!(
        w,
        "{} epochs, final loss {}",
        trace.records.len(),
        last.map_or(f64::NAN, |r| r.free_loss)
    )?;
    if let Some((e, d)) = trace.largest_jump() {
        writeln!(w, "largest loss jump {d:.6e} after epoch {e}")?;
    }
    if let Some(msg) = &trace.truncated {
        writeln!(w, "stopped early: {msg}")?;
    }
    Ok(Outcome::Ok)
}

/// Split `A[0],W[0,1]` at commas outside brackets.
fn split_targets(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

fn cmd_analyze_trace(
    trace: &Path,
    out: &Path,
    k_max: usize,
    direction: Option<&str>,
    budget: &BudgetArgs,
    w: &mut dyn Write,
) -> Result<Outcome> {
    let (lines, snaps) = fio::read_trace(trace)?;
    let m = snaps.first().map(|p| p.m()).unwrap_or(0);
    let dir = direction
        .map(|d| parse_list::<f64>(d, "direction").map(DVector::from_vec))
        .transpose()?;
    if let Some(d) = &dir {
        if d.len() != m {
            return Err(Error::Dimension {
                what: "direction",
                expected: m,
                found: d.len(),
            });
        }
    }
    let b = budget.checked(m, k_max)?;
    let tol = Tolerances::default();
    let analysis = analyze_training_trace(&snaps, k_max, &b, &tol, &EventThresholds::default())?;
    fs::create_dir_all(out)?;
    fio::write_events(fio::create_file(&out.join("events.jsonl"))?, &analysis.events)?;
    let epochs: Vec<f64> = lines.iter().map(|l| l.epoch as f64).collect();
    let rows = diagram_rows(&epochs, &analysis.libraries, dir.as_ref());
    fio::write_diagram(fio::create_file(&out.join("diagram.csv"))?, &rows)?;
    writeln!(w, "{} epochs, {}", snaps.len(), plural(analysis.events.len(), "event", "events"))?;
    for e in &analysis.events {
        writeln!(w, "epoch {:.4}: {} of a {}-cycle", e.loc.coords[0], e.kind, e.order)?;
    }
    Ok(Outcome::Ok)
}

fn cmd_alpha_bound(params: &Path, alpha: Option<f64>, w: &mut dyn Write) -> Result<Outcome> {
    let p = PlrnnParams::load(params)?;
    let b = gtf_alpha_bound(&p);
    writeln!(w, "{}", serde_json::to_string(&b)?)?;
    match alpha {
        None => Ok(Outcome::Ok),
        Some(a) => {
            crate::train::GtfConfig::new(a)?;
            if a > b.alpha_star {
                writeln!(w, "alpha = {a} exceeds the bound")?;
                Ok(Outcome::Ok)
            } else {
                writeln!(w, "alpha = {a} does not exceed the bound {}", b.alpha_star)?;
                Ok(Outcome::CheckFailed)
            }
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("SCYFI_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| Error::Field {
                field: "SCYFI_THREADS".into(),
                msg: format!("not a thread count: `{v}`"),
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        // the global pool can only be built once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Run a parsed command, writing human-readable output to `w`.
pub fn execute(cli: Cli, w: &mut dyn Write) -> Result<Outcome> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Find { params, kmax, out, budget } => cmd_find(&params, kmax, out.as_deref(), &budget, w),
        Command::Sweep { spec, out } => cmd_sweep(&spec, &out, w),
        Command::OracleCheck {
            params,
            kmax,
            grid,
            al,
            ar,
            out,
            budget,
        } => cmd_oracle_check(&params, kmax, grid, &al, &ar, out.as_deref(), &budget, w),
        Command::Scaling {
            mode,
            m,
            kmax,
            ms,
            systems,
            seeds,
            case_eps,
            init_scale,
            nout,
            nin,
            seed,
            out,
        } => cmd_scaling(
            mode,
            m,
            kmax,
            &ms,
            systems,
            seeds,
            case_eps,
            init_scale,
            nout,
            nin,
            seed,
            out.as_deref(),
            w,
        ),
        Command::Train {
            params,
            data,
            out,
            epochs,
            lr,
            alpha,
            clip,
            anneal,
            trainable,
        } => cmd_train(&params, &data, &out, epochs, lr, alpha, clip, anneal, trainable.as_deref(), w),
        Command::AnalyzeTrace {
            trace,
            out,
            kmax,
            direction,
            budget,
        } => cmd_analyze_trace(&trace, &out, kmax, direction.as_deref(), &budget, w),
        Command::AlphaBound { params, alpha } => cmd_alpha_bound(&params, alpha, w),
    }
}

/// Parse the process arguments, run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::CheckFailed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
