//! The sparse robust regression experiment: Chambolle–Pock on the primal and
//! on the perspective dual of `min ‖x‖₁ s.t. Σ h_η(b − Ax) ≤ σ`, with the
//! primal point of the dual run recovered by rescaling its multiplier.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use gaugekit_core::solvers::{solve_perspective_dual, solve_primal};
use gaugekit_core::{
    generate_sparse_robust_instance, CpConfig, Instance, InstanceSeedSpec, SolverTrace,
    ToleranceConfig, TraceRecord,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{format_err, Error, Result};
use crate::format::{write_json, ExtReal, ProblemFile};
use crate::trace::{write_trace, Recorder, TraceMeta, SUPPORT_TOL};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GAUGEKIT_THREADS";

pub const PRIMAL: &str = "primal";
pub const PERSPECTIVE_DUAL: &str = "perspective-dual";

/// Iteration budget and stopping rule of one side. Steps default to
/// `0.99/‖A‖` each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideConfig {
    pub max_iters: usize,
    pub stop_tol: f64,
    pub trace_every: usize,
    pub steps: Option<(f64, f64)>,
}

impl SideConfig {
    pub fn new(max_iters: usize, stop_tol: f64, trace_every: usize) -> Self {
        Self {
            max_iters,
            stop_tol,
            trace_every,
            steps: None,
        }
    }

    fn resolve(&self, op_norm: f64) -> CpConfig {
        let mut cfg = CpConfig::for_norm(op_norm, self.max_iters, self.stop_tol);
        if let Some((ax, ay)) = self.steps {
            cfg.alpha_x = ax;
            cfg.alpha_y = ay;
        }
        cfg.trace_every = self.trace_every;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSeedSpec,
    pub primal: SideConfig,
    pub dual: SideConfig,
    pub tol: ToleranceConfig,
    pub support_tol: f64,
    /// Number of runs; every run uses the same seed.
    pub repeat: usize,
    /// Where traces go; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSeedSpec, side: SideConfig) -> Self {
        Self {
            instance,
            primal: side,
            dual: side,
            tol: ToleranceConfig::default(),
            support_tol: SUPPORT_TOL,
            repeat: 1,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        self.tol.validate()?;
        if self.repeat == 0 {
            return Err(format_err("repeat must be at least 1"));
        }
        if let Some(dir) = &self.out_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(())
    }
}

/// One side of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SideRun {
    pub side: &'static str,
    pub cp: CpConfig,
    pub trace: SolverTrace,
    /// Final primal point; for the dual side, the rescaled multiplier.
    pub x: Vec<f64>,
    /// `‖x‖₁` on the primal side, `ν_d = ‖Aᵀy‖_∞` on the dual side.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the run stopped on a non-finite iterate.
    pub diverged: Option<String>,
}

impl SideRun {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.trace.records().last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub repeat: usize,
    pub instance: Instance,
    pub primal: SideRun,
    pub dual: SideRun,
}

impl ExperimentRun {
    /// `‖x_primal‖₁ · ν_d`.
    pub fn duality_product(&self) -> f64 {
        self.primal.value * self.dual.value
    }
}

fn primal_side(inst: &Instance, cfg: &ExperimentConfig) -> Result<SideRun> {
    let p = &inst.problem;
    let cp = cfg.primal.resolve(p.a.norm());
    let mut rec = Recorder::new(p, Some(&inst.true_signal), cfg.support_tol)?;
    let out = solve_primal(p, &cp, &cfg.tol, |it, x, _| rec.record(it, x));
    match out {
        Ok(out) => {
            let trace = rec.finish()?;
            Ok(SideRun {
                side: PRIMAL,
                cp,
                trace,
                value: p.objective.eval(&out.x)?,
                x: out.x,
                iterations: out.iterations,
                converged: out.converged,
                diverged: None,
            })
        }
        Err(e @ gaugekit_core::Error::Diverged { .. }) => {
            Ok(diverged_side(PRIMAL, cp, rec.partial(), p.n(), e))
        }
        Err(e) => Err(e.into()),
    }
}

fn dual_side(inst: &Instance, cfg: &ExperimentConfig) -> Result<SideRun> {
    let p = &inst.problem;
    let cp = cfg.dual.resolve(p.a.norm());
    let kappa = p
        .objective
        .as_gauge()
        .ok_or_else(|| format_err("the experiment needs a gauge objective"))?;
    let m = p.m();
    let mut rec = Recorder::new(p, Some(&inst.true_signal), cfg.support_tol)?;
    let out = solve_perspective_dual(p, &cp, &cfg.tol, |it, v, q| {
        // iterates with ν_d = 0 have no rescaled primal point and are skipped
        let nu = kappa
            .polar_eval(&p.a.apply_adjoint(&v[..m]))
            .unwrap_or(f64::NAN);
        if nu > 0.0 && nu.is_finite() {
            let x: Vec<f64> = q.iter().map(|v| v / nu).collect();
            rec.record(it, &x);
        }
    });
    match out {
        Ok(out) => {
            let trace = rec.finish()?;
            Ok(SideRun {
                side: PERSPECTIVE_DUAL,
                cp,
                trace,
                x: out.rescaled_primal()?,
                value: out.nu_d,
                iterations: out.iterations,
                converged: out.converged,
                diverged: None,
            })
        }
        Err(e @ gaugekit_core::Error::Diverged { .. }) => {
            Ok(diverged_side(PERSPECTIVE_DUAL, cp, rec.partial(), p.n(), e))
        }
        Err(e) => Err(e.into()),
    }
}

fn diverged_side(
    side: &'static str,
    cp: CpConfig,
    trace: SolverTrace,
    n: usize,
    e: gaugekit_core::Error,
) -> SideRun {
    let iterations = match &e {
        gaugekit_core::Error::Diverged { iter, .. } => *iter,
        _ => 0,
    };
    SideRun {
        side,
        cp,
        trace,
        x: vec![f64::NAN; n],
        value: f64::NAN,
        iterations,
        converged: false,
        diverged: Some(e.to_string()),
    }
}

/// Runs both sides once, without writing anything.
pub fn run_once(cfg: &ExperimentConfig, repeat: usize) -> Result<ExperimentRun> {
    let instance = generate_sparse_robust_instance(&cfg.instance)?;
    if !instance.valid {
        return Err(format_err(
            "generated instance violates the standing assumption h(b) > sigma",
        ));
    }
    let primal = primal_side(&instance, cfg)?;
    let dual = dual_side(&instance, cfg)?;
    Ok(ExperimentRun {
        repeat,
        instance,
        primal,
        dual,
    })
}

/// Trace file of one side; repeats beyond the first are numbered.
pub fn trace_path(dir: &Path, side: &str, repeat: usize, total: usize) -> PathBuf {
    let stem = side.replace('-', "_");
    if total > 1 {
        dir.join(format!("{stem}_{repeat}.csv"))
    } else {
        dir.join(format!("{stem}.csv"))
    }
}

fn write_side(path: &Path, run: &SideRun, cfg: &ExperimentConfig) -> Result<()> {
    let meta = TraceMeta {
        side: run.side.to_string(),
        seed: Some(cfg.instance.rng_seed),
        cp: run.cp,
        tol: cfg.tol,
        support_tol: cfg.support_tol,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(BufWriter::new(file), &meta, run.trace.records(), true)
}

/// Summary of one side, as printed by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct SideSummary {
    pub side: &'static str,
    pub iterations: usize,
    pub converged: bool,
    pub value: ExtReal,
    pub obj_dev: Option<ExtReal>,
    pub infeas: Option<ExtReal>,
    pub false_zeros: Option<usize>,
    pub false_nonzeros: Option<usize>,
    pub diverged: Option<String>,
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub repeat: usize,
    pub seed: u64,
    pub duality_product: ExtReal,
    pub primal: SideSummary,
    pub dual: SideSummary,
}

fn side_summary(run: &SideRun, trace: Option<PathBuf>) -> SideSummary {
    let last = run.last();
    SideSummary {
        side: run.side,
        iterations: run.iterations,
        converged: run.converged,
        value: ExtReal(run.value),
        obj_dev: last.map(|r| ExtReal(r.obj_dev)),
        infeas: last.map(|r| ExtReal(r.infeas)),
        false_zeros: last.map(|r| r.false_zeros),
        false_nonzeros: last.map(|r| r.false_nonzeros),
        diverged: run.diverged.clone(),
        trace,
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
}

/// Runs every repeat in parallel, writes the traces and the instance, and
/// returns the summaries. A divergence on any side is reported as an error
/// after the partial traces are written.
pub fn run_sparse_robust_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunSummary>> {
    cfg.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| format_err(format!("thread pool: {e}")))?;
    let runs: Vec<Result<ExperimentRun>> = pool.install(|| {
        (0..cfg.repeat)
            .into_par_iter()
            .map(|k| run_once(cfg, k))
            .collect()
    });

    let mut summaries = Vec::with_capacity(cfg.repeat);
    let mut diverged = None;
    for run in runs {
        let run = run?;
        let mut paths = [None, None];
        if let Some(dir) = &cfg.out_dir {
            if run.repeat == 0 {
                let spec = &cfg.instance;
                write_json(
                    &dir.join("instance.json"),
                    &ProblemFile::from_instance(&run.instance, spec),
                )?;
            }
            for (slot, side) in paths.iter_mut().zip([&run.primal, &run.dual]) {
                let path = trace_path(dir, side.side, run.repeat, cfg.repeat);
                write_side(&path, side, cfg)?;
                *slot = Some(path);
            }
        }
        for side in [&run.primal, &run.dual] {
            if let (None, Some(reason)) = (&diverged, &side.diverged) {
                diverged = Some(reason.clone());
            }
        }
        let [p, d] = paths;
        summaries.push(RunSummary {
            repeat: run.repeat,
            seed: cfg.instance.rng_seed,
            duality_product: ExtReal(run.duality_product()),
            primal: side_summary(&run.primal, p),
            dual: side_summary(&run.dual, d),
        });
    }
    if let Some(reason) = diverged {
        return Err(gaugekit_core::Error::Diverged { iter: 0, reason }.into());
    }
    Ok(summaries)
}
