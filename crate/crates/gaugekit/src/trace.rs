//! Per-iterate metrics and their CSV form.
//!
//! A trace file starts with one `#` line holding everything needed to rerun
//! it, followed by the columns
//! `iter,objective,obj_dev,infeas,false_zeros,false_nonzeros,wall_ms`.
//! Without a reference signal the deviation and support columns are empty.

use std::io::{BufRead, Write};
use std::time::Instant;

use gaugekit_core::linalg::sub;
use gaugekit_core::{CpConfig, ProblemSpec, SolverTrace, ToleranceConfig, TraceRecord, RNG_NAME};
use serde::{Deserialize, Serialize};

use crate::error::{format_err, Result};

pub const COLUMNS: [&str; 7] = [
    "iter",
    "objective",
    "obj_dev",
    "infeas",
    "false_zeros",
    "false_nonzeros",
    "wall_ms",
];

/// Support tolerance of the sparsity metrics.
pub const SUPPORT_TOL: f64 = 1e-4;

/// Run parameters written on the first line of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub side: String,
    pub seed: Option<u64>,
    pub cp: CpConfig,
    pub tol: ToleranceConfig,
    pub support_tol: f64,
}

impl TraceMeta {
    pub fn header_line(&self) -> String {
        let seed = self
            .seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# gaugekit {} side={} seed={} rng={} alpha_x={:?} alpha_y={:?} max_iters={} stop_tol={:?} \
             trace_every={} feas_tol={:?} opt_tol={:?} bisect_tol={:?} max_inner_iters={} support_tol={:?}",
            env!("CARGO_PKG_VERSION"),
            self.side,
            seed,
            RNG_NAME,
            self.cp.alpha_x,
            self.cp.alpha_y,
            self.cp.max_iters,
            self.cp.stop_tol,
            self.cp.trace_every,
            self.tol.feas_tol,
            self.tol.opt_tol,
            self.tol.bisect_tol,
            self.tol.max_inner_iters,
            self.support_tol,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Row {
    iter: usize,
    objective: f64,
    obj_dev: Option<f64>,
    infeas: f64,
    false_zeros: Option<usize>,
    false_nonzeros: Option<usize>,
    wall_ms: f64,
}

/// Writes the metadata line and the records. `with_reference` controls
/// whether the reference-based columns are filled.
pub fn write_trace<W: Write>(
    mut w: W,
    meta: &TraceMeta,
    records: &[TraceRecord],
    with_reference: bool,
) -> Result<()> {
    writeln!(w, "{}", meta.header_line()).map_err(csv::Error::from)?;
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        let keep = |v| if with_reference { Some(v) } else { None };
        out.serialize(Row {
            iter: r.iter,
            objective: r.objective,
            obj_dev: keep(r.obj_dev),
            infeas: r.infeas,
            false_zeros: with_reference.then_some(r.false_zeros),
            false_nonzeros: with_reference.then_some(r.false_nonzeros),
            wall_ms: r.wall_ms,
        })?;
    }
    if records.is_empty() {
        out.write_record(COLUMNS)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a trace back: the metadata line and the records, with empty
/// reference cells read as `NaN` and `0`.
pub fn read_trace<R: BufRead>(mut r: R) -> Result<(String, Vec<TraceRecord>)> {
    let mut header = String::new();
    r.read_line(&mut header).map_err(csv::Error::from)?;
    if !header.starts_with('#') {
        return Err(format_err("trace is missing its metadata line"));
    }
    let mut reader = csv::Reader::from_reader(r);
    let mut records = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        records.push(TraceRecord {
            iter: row.iter,
            objective: row.objective,
            obj_dev: row.obj_dev.unwrap_or(f64::NAN),
            infeas: row.infeas,
            false_zeros: row.false_zeros.unwrap_or(0),
            false_nonzeros: row.false_nonzeros.unwrap_or(0),
            wall_ms: row.wall_ms,
        });
    }
    Ok((header.trim_end().to_string(), records))
}

/// `(false zeros, false nonzeros)` of `x` against the support of `reference`.
pub fn support_errors(x: &[f64], reference: &[f64], tol: f64) -> (usize, usize) {
    x.iter().zip(reference).fold((0, 0), |(fz, fnz), (xi, ri)| {
        let on = xi.abs() > tol;
        match (*ri != 0.0, on) {
            (true, false) => (fz + 1, fnz),
            (false, true) => (fz, fnz + 1),
            _ => (fz, fnz),
        }
    })
}

/// Computes trace records for a problem, timing from construction.
pub struct Recorder<'a> {
    problem: &'a ProblemSpec,
    reference: Option<&'a [f64]>,
    reference_objective: f64,
    support_tol: f64,
    start: Instant,
    trace: SolverTrace,
    error: Option<gaugekit_core::Error>,
}

impl<'a> Recorder<'a> {
    pub fn new(
        problem: &'a ProblemSpec,
        reference: Option<&'a [f64]>,
        support_tol: f64,
    ) -> Result<Self> {
        let reference_objective = match reference {
            Some(r) => problem.objective.eval(r)?,
            None => f64::NAN,
        };
        Ok(Self {
            problem,
            reference,
            reference_objective,
            support_tol,
            start: Instant::now(),
            trace: SolverTrace::new(),
            error: None,
        })
    }

    /// Metrics of `x` without recording them.
    pub fn measure(&self, iter: usize, x: &[f64]) -> gaugekit_core::Result<TraceRecord> {
        let p = self.problem;
        let objective = p.objective.eval(x)?;
        let r = sub(&p.b, &p.a.apply(x));
        let infeas = (p.constraint.eval(&r)? - p.sigma).max(0.0);
        let (obj_dev, (false_zeros, false_nonzeros)) = match self.reference {
            Some(xr) => (
                (objective - self.reference_objective).abs() / self.reference_objective,
                support_errors(x, xr, self.support_tol),
            ),
            None => (f64::NAN, (0, 0)),
        };
        Ok(TraceRecord {
            iter,
            objective,
            obj_dev,
            infeas,
            false_zeros,
            false_nonzeros,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Records the metrics of `x`. The first failure is kept and reported by
    /// [`Recorder::finish`]; later calls are ignored.
    pub fn record(&mut self, iter: usize, x: &[f64]) {
        if self.error.is_some() {
            return;
        }
        let pushed = self.measure(iter, x).and_then(|rec| self.trace.push(rec));
        if let Err(e) = pushed {
            self.error = Some(e);
        }
    }

    pub fn has_reference(&self) -> bool {
        self.reference.is_some()
    }

    pub fn finish(self) -> Result<SolverTrace> {
        match self.error {
            Some(e) => Err(e.into()),
            None => Ok(self.trace),
        }
    }

    /// The trace so far, even after a failure.
    pub fn partial(self) -> SolverTrace {
        self.trace
    }
}
