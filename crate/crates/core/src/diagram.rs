//! Two-parameter `(q, beta)` stability grids, tongue-tip predictions and
//! diagram export.
//!
//! Cells are pure functions of the parameters, so the sweep parallelizes
//! over amplitude columns (the flexural orbit is shared by every spectral
//! value in a column) and results are assembled by index.  Failed cells are
//! marked, never silently zeroed.

use crate::error::{Error, Result};
use crate::flexural::{solve_flexural, SolveOptions, Trajectory};
use crate::floquet::{classify, monodromy_numeric, StabilityClass, DEFAULT_CLASS_TOL};
use crate::params::BridgeParams;
use crate::piecewise::bar_delta;
use crate::projection::ProjectionKernel;
use crate::slackening::SlackeningModel;
use crate::system::{KernelSystem, ModeSystem};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::time::Instant;

/// A uniformly spaced axis `min..=max` with `n` points (`n = 1` pins `min`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n == 0 || !min.is_finite() || !max.is_finite() || (n > 1 && !(max > min)) {
            return Err(Error::Config(format!(
                "degenerate axis: {min}..{max} with {n} points"
            )));
        }
        Ok(AxisSpec { min, max, n })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.min + step * i as f64).collect()
    }

    pub fn step(&self) -> f64 {
        if self.n <= 1 {
            0.0
        } else {
            (self.max - self.min) / (self.n - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub q: AxisSpec,
    pub beta: AxisSpec,
}

/// Which engine computes the discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// Augmented integration of the projected system.
    Numeric,
    /// Exact Meissner product of the piecewise stand-in (diagonal modes).
    ClosedForm,
}

/// Grid cell classification, including the failure marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellClass {
    Stable,
    Unstable,
    BoundaryPeriodic,
    BoundaryAntiperiodic,
    Failed,
}

impl From<StabilityClass> for CellClass {
    fn from(c: StabilityClass) -> Self {
        match c {
            StabilityClass::Stable => CellClass::Stable,
            StabilityClass::Unstable => CellClass::Unstable,
            StabilityClass::BoundaryPeriodic => CellClass::BoundaryPeriodic,
            StabilityClass::BoundaryAntiperiodic => CellClass::BoundaryAntiperiodic,
        }
    }
}

impl CellClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellClass::Stable => "stable",
            CellClass::Unstable => "unstable",
            CellClass::BoundaryPeriodic => "boundary_periodic",
            CellClass::BoundaryAntiperiodic => "boundary_antiperiodic",
            CellClass::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMeta {
    pub params: BridgeParams,
    pub model: String,
    pub engine: EngineKind,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub class_tol: f64,
    pub failed_cells: usize,
    /// Largest normalized `|det - 1|` seen on any cell (numeric engine).
    pub max_det_drift: f64,
    pub wall_time_s: f64,
}

/// A rectangular grid of discriminants and classes; `delta` and `class` are
/// row-major with one row per `beta` and one column per `q`.
#[derive(Debug, Clone)]
pub struct StabilityGrid {
    pub q_axis: Vec<f64>,
    pub beta_axis: Vec<f64>,
    pub delta: Vec<f64>,
    pub class: Vec<CellClass>,
    pub meta: GridMeta,
}

impl StabilityGrid {
    pub fn index(&self, beta_i: usize, q_i: usize) -> usize {
        beta_i * self.q_axis.len() + q_i
    }

    pub fn delta_at(&self, beta_i: usize, q_i: usize) -> f64 {
        self.delta[self.index(beta_i, q_i)]
    }

    pub fn class_at(&self, beta_i: usize, q_i: usize) -> CellClass {
        self.class[self.index(beta_i, q_i)]
    }

    /// Contiguous unstable `beta` intervals in column `q_i`.
    pub fn unstable_runs(&self, q_i: usize) -> Vec<(f64, f64)> {
        let mut runs = Vec::new();
        let mut start: Option<f64> = None;
        for (bi, &b) in self.beta_axis.iter().enumerate() {
            let unstable = self.class_at(bi, q_i) == CellClass::Unstable;
            match (unstable, start) {
                (true, None) => start = Some(b),
                (false, Some(s)) => {
                    runs.push((s, self.beta_axis[bi - 1]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, *self.beta_axis.last().unwrap()));
        }
        runs
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    pub class_tol: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Solve the flexural orbit once per column and share it across the
    /// column (observationally invisible; the switch exists for the audit).
    pub reuse_trajectory: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solve: SolveOptions {
                audit_energy: false,
                ..SolveOptions::default()
            },
            class_tol: DEFAULT_CLASS_TOL,
            jobs: None,
            reuse_trajectory: true,
        }
    }
}

struct Cell {
    delta: f64,
    class: CellClass,
    det_drift: f64,
}

fn numeric_column(
    sys: &dyn ModeSystem,
    q: f64,
    betas: &[f64],
    opts: &SweepOptions,
) -> Vec<Cell> {
    let traj: Option<Trajectory> = if opts.reuse_trajectory {
        solve_flexural(sys, q, &opts.solve).ok()
    } else {
        None
    };
    if opts.reuse_trajectory && traj.is_none() {
        // trajectory failed: the whole column fails
        return betas
            .iter()
            .map(|_| Cell {
                delta: f64::NAN,
                class: CellClass::Failed,
                det_drift: 0.0,
            })
            .collect();
    }
    betas
        .iter()
        .map(|&beta| {
            match monodromy_numeric(sys, beta, q, &opts.solve, traj.as_ref(), opts.class_tol) {
                Ok(out) => Cell {
                    delta: out.verdict.delta,
                    class: out.verdict.class.into(),
                    det_drift: out.det_drift,
                },
                Err(_) => Cell {
                    delta: f64::NAN,
                    class: CellClass::Failed,
                    det_drift: 0.0,
                },
            }
        })
        .collect()
}

fn run_columns<S: Fn(usize, f64) -> Vec<Cell> + Sync>(
    qs: &[f64],
    jobs: Option<usize>,
    solve_column: S,
) -> Result<Vec<Vec<Cell>>> {
    let work = || -> Vec<Vec<Cell>> {
        qs.par_iter()
            .enumerate()
            .map(|(qi, &q)| solve_column(qi, q))
            .collect()
    };
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

fn assemble(
    qs: Vec<f64>,
    betas: Vec<f64>,
    columns: Vec<Vec<Cell>>,
    params: &BridgeParams,
    model: String,
    engine: EngineKind,
    opts: &SweepOptions,
    started: Instant,
) -> StabilityGrid {
    let (nq, nb) = (qs.len(), betas.len());
    let mut delta = vec![f64::NAN; nq * nb];
    let mut class = vec![CellClass::Failed; nq * nb];
    let mut failed = 0usize;
    let mut max_drift: f64 = 0.0;
    for (qi, col) in columns.iter().enumerate() {
        for (bi, cell) in col.iter().enumerate() {
            let idx = bi * nq + qi;
            delta[idx] = cell.delta;
            class[idx] = cell.class;
            if cell.class == CellClass::Failed {
                failed += 1;
            }
            max_drift = max_drift.max(cell.det_drift);
        }
    }
    StabilityGrid {
        q_axis: qs,
        beta_axis: betas,
        delta,
        class,
        meta: GridMeta {
            params: *params,
            model,
            engine,
            rel_tol: opts.solve.tol.rel,
            abs_tol: opts.solve.tol.abs,
            class_tol: opts.class_tol,
            failed_cells: failed,
            max_det_drift: max_drift,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    }
}

/// Sweeps the projected system numerically over the grid.
pub fn sweep_numeric(
    params: &BridgeParams,
    kernel: &ProjectionKernel,
    spec: &GridSpec,
    opts: &SweepOptions,
) -> Result<StabilityGrid> {
    let started = Instant::now();
    let qs = spec.q.values();
    let betas = spec.beta.values();
    let sys = KernelSystem::new(params, kernel);
    let columns = run_columns(&qs, opts.jobs, |_qi, q| {
        numeric_column(&sys, q, &betas, opts)
    })?;
    Ok(assemble(
        qs,
        betas,
        columns,
        params,
        kernel.model().describe(),
        EngineKind::Numeric,
        opts,
        started,
    ))
}

/// Sweeps an arbitrary mode system numerically (used for the stand-in
/// system by the engine comparison).
pub fn sweep_numeric_system(
    params: &BridgeParams,
    sys: &dyn ModeSystem,
    model: String,
    spec: &GridSpec,
    opts: &SweepOptions,
) -> Result<StabilityGrid> {
    let started = Instant::now();
    let qs = spec.q.values();
    let betas = spec.beta.values();
    let columns = run_columns(&qs, opts.jobs, |_qi, q| {
        numeric_column(sys, q, &betas, opts)
    })?;
    Ok(assemble(
        qs,
        betas,
        columns,
        params,
        model,
        EngineKind::Numeric,
        opts,
        started,
    ))
}

/// Sweeps the piecewise stand-in system with the exact Meissner product.
pub fn sweep_closed_form(
    params: &BridgeParams,
    m: f64,
    r0: f64,
    spec: &GridSpec,
    opts: &SweepOptions,
) -> Result<StabilityGrid> {
    if params.j != params.k {
        return Err(Error::Config(
            "closed-form sweeps need diagonal modes (j = k)".into(),
        ));
    }
    let started = Instant::now();
    let qs = spec.q.values();
    let betas = spec.beta.values();
    let columns = run_columns(&qs, opts.jobs, |_qi, q| {
        betas
            .iter()
            .map(|&beta| match bar_delta(params, m, r0, q, beta) {
                Ok(delta) => match classify(delta, opts.class_tol) {
                    Ok(v) => Cell {
                        delta,
                        class: v.class.into(),
                        det_drift: 0.0,
                    },
                    Err(_) => Cell {
                        delta,
                        class: CellClass::Failed,
                        det_drift: 0.0,
                    },
                },
                Err(_) => Cell {
                    delta: f64::NAN,
                    class: CellClass::Failed,
                    det_drift: 0.0,
                },
            })
            .collect()
    })?;
    Ok(assemble(
        qs,
        betas,
        columns,
        params,
        format!("mmk-bar(m={m}, r0={r0})"),
        EngineKind::ClosedForm,
        opts,
        started,
    ))
}

/// Engine dispatch for one model over one grid.
///
/// The closed-form engine requires the piecewise-linear hanger law and
/// diagonal modes; the numeric engine runs the projected system (closed
/// projection forms are used automatically where available).
pub fn sweep_grid(
    params: &BridgeParams,
    model: &SlackeningModel,
    spec: &GridSpec,
    engine: EngineKind,
    opts: &SweepOptions,
) -> Result<StabilityGrid> {
    match engine {
        EngineKind::ClosedForm => match *model {
            SlackeningModel::Mmk { m, r0 } => sweep_closed_form(params, m, r0, spec, opts),
            ref other => Err(Error::Config(format!(
                "closed-form engine needs the mmk model, got {}",
                other.describe()
            ))),
        },
        EngineKind::Numeric => {
            let kernel =
                ProjectionKernel::preferring_closed_form(model.clone(), params.j, params.k)?;
            sweep_numeric(params, &kernel, spec, opts)
        }
    }
}

/// Tongue tip prediction on the `beta` axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TongueTip {
    pub n: u32,
    pub beta: f64,
    /// Even `j` halves the coefficient period, erasing odd-index tongues.
    pub vanished: bool,
}

/// Spectral values the instability tongues stem from:
/// `beta_N = (alpha j^4 + 2m) N^2 / (4 k^2) - 2 gamma m / k^2`.
pub fn tongue_tips(params: &BridgeParams, m: f64, n_max: u32) -> Vec<TongueTip> {
    let k2 = params.k_sq();
    (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            TongueTip {
                n,
                beta: (params.alpha_j4() + 2.0 * m) * nf * nf / (4.0 * k2)
                    - 2.0 * params.gamma * m / k2,
                vanished: params.j % 2 == 0 && n % 2 == 1,
            }
        })
        .collect()
}

/// Result of running both engines on the same grid of the stand-in system.
#[derive(Debug, Clone, Serialize)]
pub struct EngineComparison {
    pub max_abs_discrepancy: f64,
    pub max_abs_cell: (f64, f64),
    /// Discrepancy normalized by `max(1, |delta|)`; the meaningful measure
    /// where the discriminant is exponentially large.
    pub max_rel_discrepancy: f64,
    pub max_rel_cell: (f64, f64),
    pub max_abs_delta: f64,
    pub max_det_drift: f64,
    pub failed_cells: usize,
}

/// Runs the exact and the numeric engine over the same grid of the
/// stand-in system and reports the worst discrepancy.
pub fn compare_engines(
    params: &BridgeParams,
    m: f64,
    r0: f64,
    spec: &GridSpec,
    opts: &SweepOptions,
) -> Result<EngineComparison> {
    let closed = sweep_closed_form(params, m, r0, spec, opts)?;
    let bar = crate::piecewise::BarSystem::from_params(params, m, r0)?;
    let numeric = sweep_numeric_system(
        params,
        &bar,
        format!("mmk-bar(m={m}, r0={r0})"),
        spec,
        opts,
    )?;

    let mut cmp = EngineComparison {
        max_abs_discrepancy: 0.0,
        max_abs_cell: (f64::NAN, f64::NAN),
        max_rel_discrepancy: 0.0,
        max_rel_cell: (f64::NAN, f64::NAN),
        max_abs_delta: 0.0,
        max_det_drift: numeric.meta.max_det_drift,
        failed_cells: closed.meta.failed_cells + numeric.meta.failed_cells,
    };
    for bi in 0..closed.beta_axis.len() {
        for qi in 0..closed.q_axis.len() {
            let dc = closed.delta_at(bi, qi);
            let dn = numeric.delta_at(bi, qi);
            if dc.is_nan() || dn.is_nan() {
                continue;
            }
            let cell = (closed.q_axis[qi], closed.beta_axis[bi]);
            let abs = (dc - dn).abs();
            let rel = abs / dc.abs().max(1.0);
            cmp.max_abs_delta = cmp.max_abs_delta.max(dc.abs());
            if abs > cmp.max_abs_discrepancy {
                cmp.max_abs_discrepancy = abs;
                cmp.max_abs_cell = cell;
            }
            if rel > cmp.max_rel_discrepancy {
                cmp.max_rel_discrepancy = rel;
                cmp.max_rel_cell = cell;
            }
        }
    }
    Ok(cmp)
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// 17 significant digits, the shortest exact round-trip for f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{:.16e}", x)
    }
}

/// CSV export: header `q,beta,delta,class`, row-major over `beta` then `q`.
pub fn write_csv<W: Write>(grid: &StabilityGrid, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "q,beta,delta,class")?;
    for (bi, &beta) in grid.beta_axis.iter().enumerate() {
        for (qi, &q) in grid.q_axis.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(q),
                fmt_f64(beta),
                fmt_f64(grid.delta_at(bi, qi)),
                grid.class_at(bi, qi).as_str()
            )?;
        }
    }
    Ok(())
}

// Plain PGM tones for the three-way diagram plus the failure marker.
const TONE_WHITE: u8 = 255; // |delta| <= 2
const TONE_LIGHT: u8 = 200; // delta > 2
const TONE_DARK: u8 = 90; // delta < -2
const TONE_FAILED: u8 = 0;

/// Plain (P2) portable graymap with the diagram tone convention: light grey
/// where `delta > 2`, dark grey where `delta < -2`, white elsewhere, black
/// for failed cells.  Rows run from the top of the `beta` axis down.
pub fn write_pgm<W: Write>(grid: &StabilityGrid, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "P2")?;
    writeln!(out, "# q in [{}, {}]", fmt_f64(*grid.q_axis.first().unwrap()), fmt_f64(*grid.q_axis.last().unwrap()))?;
    writeln!(out, "# beta in [{}, {}]", fmt_f64(*grid.beta_axis.first().unwrap()), fmt_f64(*grid.beta_axis.last().unwrap()))?;
    writeln!(out, "{} {}", grid.q_axis.len(), grid.beta_axis.len())?;
    writeln!(out, "255")?;
    for bi in (0..grid.beta_axis.len()).rev() {
        let mut row = String::with_capacity(grid.q_axis.len() * 4);
        for qi in 0..grid.q_axis.len() {
            let tone = match grid.class_at(bi, qi) {
                CellClass::Failed => TONE_FAILED,
                CellClass::Unstable => {
                    if grid.delta_at(bi, qi) > 2.0 {
                        TONE_LIGHT
                    } else {
                        TONE_DARK
                    }
                }
                _ => TONE_WHITE,
            };
            if qi > 0 {
                row.push(' ');
            }
            row.push_str(&tone.to_string());
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GridSummary<'a> {
    meta: &'a GridMeta,
    q_axis: [f64; 2],
    beta_axis: [f64; 2],
    nq: usize,
    nbeta: usize,
    failed_cells: usize,
    /// Unstable beta intervals in the first column, the tip detections.
    first_column_unstable_runs: Vec<(f64, f64)>,
}

/// JSON summary: metadata, grid shape, failure count and the unstable runs
/// of the lowest-amplitude column.
pub fn write_json_summary<W: Write>(grid: &StabilityGrid, out: &mut W) -> std::io::Result<()> {
    let summary = GridSummary {
        meta: &grid.meta,
        q_axis: [*grid.q_axis.first().unwrap(), *grid.q_axis.last().unwrap()],
        beta_axis: [
            *grid.beta_axis.first().unwrap(),
            *grid.beta_axis.last().unwrap(),
        ],
        nq: grid.q_axis.len(),
        nbeta: grid.beta_axis.len(),
        failed_cells: grid.meta.failed_cells,
        first_column_unstable_runs: grid.unstable_runs(0),
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serialization");
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Pgm,
    JsonSummary,
}

/// Writes the grid to `path` in the requested format.
pub fn export(grid: &StabilityGrid, format: ExportFormat, path: &str) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    match format {
        ExportFormat::Csv => write_csv(grid, &mut out).map_err(io_err),
        ExportFormat::Pgm => write_pgm(grid, &mut out).map_err(io_err),
        ExportFormat::JsonSummary => write_json_summary(grid, &mut out).map_err(io_err),
    }
}
