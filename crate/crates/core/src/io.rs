//! File formats: JSON-lines libraries, events and traces; CSV grids, scans and
//! diagrams; sweep spec files. Every writer has a matching reader.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plrnn::{PlrnnParams, RegionCode, RegionSequence};
use crate::pwl2d::{ObjectKind, Pwl2dParams, ScanCell};
use crate::scyfi::{CycleLibrary, CycleObject, SearchBudget, Stability, Tolerances};
use crate::sweep::{Axis, BifurcationEvent, DiagramRow, EventThresholds, SweepCell, SweepSpec, System};
use crate::train::TrainingTrace;

/// Serialize each item as one JSON line.
pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, items: impl IntoIterator<Item = T>) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a JSON-lines stream, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

pub fn write_csv<T: Serialize, W: Write>(w: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// One line of a cycle library file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub order: usize,
    pub points: Vec<Vec<f64>>,
    pub codes: Vec<RegionCode>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub stability: Stability,
    pub max_abs_eig: f64,
}

impl From<&CycleObject> for CycleRecord {
    fn from(c: &CycleObject) -> Self {
        Self {
            order: c.order,
            points: c.points.iter().map(|p| p.iter().copied().collect()).collect(),
            codes: c.region_seq.codes().to_vec(),
            eigenvalues: c.eigenvalues.iter().map(|e| [e.re, e.im]).collect(),
            stability: c.stability,
            max_abs_eig: c.max_abs_eig,
        }
    }
}

impl From<CycleRecord> for CycleObject {
    fn from(r: CycleRecord) -> Self {
        Self {
            order: r.order,
            points: r.points.into_iter().map(DVector::from_vec).collect(),
            region_seq: RegionSequence::new(r.codes),
            eigenvalues: r.eigenvalues.iter().map(|e| Complex64::new(e[0], e[1])).collect(),
            stability: r.stability,
            max_abs_eig: r.max_abs_eig,
        }
    }
}

pub fn write_library<W: Write>(w: W, lib: &CycleLibrary) -> Result<()> {
    write_jsonl(w, lib.iter().map(CycleRecord::from))
}

/// Rebuild a library from its JSON-lines export.
pub fn read_library<R: Read>(r: R) -> Result<CycleLibrary> {
    let records: Vec<CycleRecord> = read_jsonl(r)?;
    let mut lib = CycleLibrary::new();
    for rec in records {
        let c = CycleObject::from(rec);
        lib.by_order.entry(c.order).or_default().push(c);
    }
    for v in lib.by_order.values_mut() {
        v.sort_by(|a, b| a.region_seq.cmp(&b.region_seq));
    }
    Ok(lib)
}

pub fn write_events<W: Write>(w: W, events: &[BifurcationEvent]) -> Result<()> {
    write_jsonl(w, events)
}

pub fn read_events<R: Read>(r: R) -> Result<Vec<BifurcationEvent>> {
    read_jsonl(r)
}

/// One row of the sweep grid inventory. `j` and `y` are empty for 1-D sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub i: usize,
    pub j: Option<usize>,
    pub x: f64,
    pub y: Option<f64>,
    pub n_stable: usize,
    pub n_unstable: usize,
    /// Orders present, `;`-separated.
    pub orders: String,
    /// Stable orders present, `;`-separated.
    pub stable_orders: String,
    pub on_manifold: bool,
}

fn join_orders(orders: impl Iterator<Item = usize>) -> String {
    let mut v: Vec<usize> = orders.collect();
    v.sort_unstable();
    v.dedup();
    v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")
}

impl From<&SweepCell> for GridRow {
    fn from(c: &SweepCell) -> Self {
        let lib = &c.library;
        Self {
            i: c.index[0],
            j: c.index.get(1).copied(),
            x: c.coords[0],
            y: c.coords.get(1).copied(),
            n_stable: lib.n_with(Stability::Stable),
            n_unstable: lib.total() - lib.n_with(Stability::Stable),
            orders: join_orders(lib.iter().map(|o| o.order)),
            stable_orders: join_orders(lib.iter().filter(|o| o.is_stable()).map(|o| o.order)),
            on_manifold: c.on_manifold(),
        }
    }
}

pub fn write_grid<W: Write>(w: W, cells: &[SweepCell]) -> Result<()> {
    write_csv(w, cells.iter().map(GridRow::from))
}

/// One row per object and cell of an analytic scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub a_l: f64,
    pub a_r: f64,
    pub object_kind: ObjectKind,
    pub exists: bool,
    pub stable: bool,
    pub n_coexisting_stable: usize,
}

pub fn oracle_rows(cells: &[ScanCell]) -> Vec<OracleRow> {
    cells
        .iter()
        .flat_map(|c| {
            let n = c.n_stable();
            c.verdicts.iter().map(move |v| OracleRow {
                a_l: c.a_l,
                a_r: c.a_r,
                object_kind: v.object_kind,
                exists: v.exists,
                stable: v.stable,
                n_coexisting_stable: n,
            })
        })
        .collect()
}

pub fn write_oracle_scan<W: Write>(w: W, cells: &[ScanCell]) -> Result<()> {
    write_csv(w, oracle_rows(cells))
}

pub fn write_diagram<W: Write>(w: W, rows: &[DiagramRow]) -> Result<()> {
    write_csv(w, rows)
}

/// One line of `trace.jsonl`; `snapshot` is relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub epoch: usize,
    pub loss: f64,
    pub free_loss: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    pub snapshot: String,
}

/// Write `trace.jsonl` and one parameter file per epoch under `dir/snapshots`.
pub fn write_trace(dir: &Path, trace: &TrainingTrace) -> Result<()> {
    fs::create_dir_all(dir.join("snapshots"))?;
    let mut lines = Vec::with_capacity(trace.records.len());
    for r in &trace.records {
        let rel = format!("snapshots/epoch_{:05}.json", r.epoch);
        if let Some(p) = &r.params {
            p.save(&dir.join(&rel))?;
        }
        lines.push(TraceLine {
            epoch: r.epoch,
            loss: r.loss,
            free_loss: r.free_loss,
            grad_norm: r.grad_norm,
            alpha: r.alpha,
            snapshot: rel,
        });
    }
    write_jsonl(create(&dir.join("trace.jsonl"))?, lines)
}

/// Read a run directory back: trace lines and the snapshots they reference.
pub fn read_trace(dir: &Path) -> Result<(Vec<TraceLine>, Vec<PlrnnParams>)> {
    let lines: Vec<TraceLine> = read_jsonl(File::open(dir.join("trace.jsonl"))?)?;
    let snaps = lines
        .iter()
        .map(|l| PlrnnParams::load(&dir.join(&l.snapshot)))
        .collect::<Result<_>>()?;
    Ok((lines, snaps))
}

/// JSON description of a sweep.
///
/// ```json
/// {"system": "pwl2d", "params": {"a_l": 0.2, ...},
///  "axes": [{"target": "a_r", "lo": -1.5, "hi": 1.5, "n_steps": 30}],
///  "k_max": 2, "n_out": 50, "n_in": 20, "seed": 0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpecFile {
    /// `"plrnn"` or `"pwl2d"`.
    pub system: String,
    pub params: serde_json::Value,
    pub axes: Vec<Axis>,
    pub k_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_out: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_in: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<EventThresholds>,
}

impl SweepSpecFile {
    pub fn into_spec(self) -> Result<SweepSpec> {
        let base = match self.system.as_str() {
            "plrnn" => System::Plrnn(PlrnnParams::from_json_value(self.params)?),
            "pwl2d" => System::Pwl2d(serde_json::from_value::<Pwl2dParams>(self.params).map_err(|e| {
                Error::Field {
                    field: "params".into(),
                    msg: e.to_string(),
                }
            })?),
            other => {
                return Err(Error::Field {
                    field: "system".into(),
                    msg: format!("unknown system `{other}` (expected plrnn or pwl2d)"),
                })
            }
        };
        let budget = match self.n_out {
            Some(n) => SearchBudget::fixed(n, self.n_in.unwrap_or(100), self.seed),
            None => {
                let b = SearchBudget::auto(1e-3, self.seed);
                match self.n_in {
                    Some(n) => b.with_n_in(n),
                    None => b,
                }
            }
        };
        let spec = SweepSpec {
            base,
            axes: self.axes,
            k_max: self.k_max,
            budget,
            tol: Tolerances::default(),
            thresholds: self.thresholds.unwrap_or_default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<SweepSpec> {
        let text = fs::read_to_string(path)?;
        let file: SweepSpecFile = serde_json::from_str(&text)?;
        file.into_spec()
    }
}

/// Load either a PLRNN parameter file (`{"M", "A", "W", "h"}`) or a planar
/// one-border map (`{"a_l", "a_r", ...}`).
pub fn load_system(path: &Path) -> Result<System> {
    let text = fs::read_to_string(path)?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    if raw.get("a_l").is_some() || raw.get("a_r").is_some() {
        serde_json::from_value::<Pwl2dParams>(raw)
            .map(System::Pwl2d)
            .map_err(|e| Error::Field {
                field: "params".into(),
                msg: e.to_string(),
            })
    } else {
        PlrnnParams::from_json_value(raw).map(System::Plrnn)
    }
}

/// Paths written by a sweep run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutputs {
    pub events: PathBuf,
    pub grid: PathBuf,
}

pub fn write_sweep_outputs(
    dir: &Path,
    cells: &[SweepCell],
    events: &[BifurcationEvent],
) -> Result<SweepOutputs> {
    fs::create_dir_all(dir)?;
    let out = SweepOutputs {
        events: dir.join("events.jsonl"),
        grid: dir.join("grid.csv"),
    };
    write_events(create(&out.events)?, events)?;
    write_grid(create(&out.grid)?, cells)?;
    Ok(out)
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    create(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scyfi::find_all;

    #[test]
    fn library_round_trip() {
        let p = PlrnnParams::skew_tent(0.5, -2.0, 1.0);
        let lib = find_all(&p, 3, &SearchBudget::fixed(50, 20, 1), &Tolerances::default());
        let mut buf = Vec::new();
        write_library(&mut buf, &lib).unwrap();
        let back = read_library(buf.as_slice()).unwrap();
        assert_eq!(back.by_order, lib.by_order);
    }

    #[test]
    fn spec_file_rejects_unknown_system() {
        let f = SweepSpecFile {
            system: "lorenz".into(),
            params: serde_json::json!({}),
            axes: vec![],
            k_max: 1,
            n_out: None,
            n_in: None,
            seed: 0,
            thresholds: None,
        };
        let err = f.into_spec().unwrap_err().to_string();
        assert!(err.contains("system"), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![OracleRow {
            a_l: 0.25,
            a_r: -2.5,
            object_kind: ObjectKind::CycleRL2,
            exists: true,
            stable: false,
            n_coexisting_stable: 1,
        }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let back: Vec<OracleRow> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert!(String::from_utf8(buf).unwrap().starts_with("a_l,a_r,object_kind,exists,stable,n_coexisting_stable"));
    }
}
