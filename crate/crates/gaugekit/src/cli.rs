//! Command-line surface.
//!
//! Every command prints JSON on stdout (or writes it with `--out`) and
//! returns its exit code: 0 on success, 2 when certification fails, 3 when a
//! solver diverges and 4 when an operation is unavailable for the given kind.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaugekit_core::duality::{build_gauge_dual, build_perspective_dual, DualConstraintForm};
use gaugekit_core::recovery::{
    active_support, recover_bpdn_least_squares, recover_from_lagrange_dual, recover_primal_gauge,
    recover_primal_perspective, Recovered, SupportSet, DEFAULT_SUPPORT_TOL,
};
use gaugekit_core::solvers::{solve_gauge_dual, solve_perspective_dual, solve_primal};
use gaugekit_core::{
    check_gauge_optimality, check_perspective_optimality, generate_sparse_robust_instance,
    CpConfig, InstanceSeedSpec, OptimalityReport, ProblemSpec, ToleranceConfig,
};
use serde::Serialize;

use crate::error::{format_err, Error, Result, EXIT_NOT_CERTIFIED, EXIT_OK};
use crate::experiment::{run_sparse_robust_experiment, ExperimentConfig, SideConfig};
use crate::format::{
    read_json, write_json, ExtReal, FnJson, PointFile, ProblemFile, ReportJson, SolutionFile,
};
use crate::trace::{write_trace, Recorder, TraceMeta, SUPPORT_TOL};

#[derive(Debug, Parser)]
#[command(
    name = "gaugekit",
    version,
    about = "Gauge and perspective duality: dualize, solve, certify, recover"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded sparse robust regression instance.
    Generate(GenerateArgs),
    /// Print the gauge or perspective dual of a problem.
    Dualize(DualizeArgs),
    /// Solve one side of a problem with Chambolle–Pock.
    Solve(SolveArgs),
    /// Check the optimality conditions for a primal-dual pair.
    Certify(CertifyArgs),
    /// Recover a primal solution from a dual point.
    Recover(RecoverArgs),
    /// Evaluate a function or one of its transforms at a point.
    Transform(TransformArgs),
    /// Run the primal and perspective-dual solvers on a generated instance.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long, default_value_t = 120)]
    pub m: usize,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Number of spikes in the planted signal.
    #[arg(long, default_value_t = 20)]
    pub nnz: usize,
    #[arg(long, default_value_t = 5)]
    pub outliers: usize,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSeedSpec {
        InstanceSeedSpec {
            m: self.m,
            n: self.n,
            nnz: self.nnz,
            n_outliers: self.outliers,
            sigma: self.sigma,
            eta: self.eta,
            rng_seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TolArgs {
    #[arg(long, default_value_t = ToleranceConfig::default().feas_tol)]
    pub feas_tol: f64,
    #[arg(long, default_value_t = ToleranceConfig::default().opt_tol)]
    pub opt_tol: f64,
}

impl TolArgs {
    fn config(&self) -> Result<ToleranceConfig> {
        let tol = ToleranceConfig {
            feas_tol: self.feas_tol,
            opt_tol: self.opt_tol,
            ..ToleranceConfig::default()
        };
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DualForm {
    /// Gauge dual when both functions are gauges, perspective dual otherwise.
    Auto,
    Gauge,
    Perspective,
}

#[derive(Debug, Args)]
pub struct DualizeArgs {
    /// Problem JSON, as a path or inline.
    pub problem: String,
    #[arg(long = "mode", visible_alias = "form", value_enum, default_value_t = DualForm::Auto)]
    pub form: DualForm,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Primal,
    GaugeDual,
    PerspectiveDual,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Primal => "primal",
            Side::GaugeDual => "gauge-dual",
            Side::PerspectiveDual => "perspective-dual",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub problem: String,
    #[arg(long, value_enum, default_value_t = Side::Primal)]
    pub side: Side,
    #[arg(long, default_value_t = 100_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub stop_tol: f64,
    /// Recorded in the trace metadata; defaults to the instance seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write a CSV trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub trace_every: usize,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Dual scalars that override those read from a file.
#[derive(Debug, Args)]
pub struct ScalarArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
}

impl ScalarArgs {
    fn apply(&self, sol: &mut SolutionFile) {
        sol.alpha = self.alpha.or(sol.alpha);
        sol.mu = self.mu.or(sol.mu);
    }
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub problem: String,
    /// Solution JSON with `x`, `y` and, for perspective pairs, `mu`.
    pub solution: Option<String>,
    /// Primal point: a JSON array or an object with an `x` field.
    #[arg(long)]
    pub x: Option<String>,
    /// Dual point: a JSON array or an object with a `y` field.
    #[arg(long)]
    pub y: Option<String>,
    #[command(flatten)]
    pub scalars: ScalarArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Least squares on the active support, picked by the problem kind.
    Auto,
    /// Least squares on the active support of `Aᵀy`.
    Lstsq,
    /// `multiplier/ν_d` from a dual solve.
    Lagrange,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    pub problem: String,
    /// Dual point JSON with `y` and, for perspective duals, `mu`.
    #[arg(conflicts_with = "dual_flag")]
    pub dual: Option<String>,
    #[arg(long = "dual", id = "dual_flag")]
    pub dual_flag: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    #[command(flatten)]
    pub scalars: ScalarArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// `f(x)`
    Eval,
    /// `f*(x)`
    Conjugate,
    /// `f^π(x, λ)`
    Perspective,
    /// `f♯(z, ξ)`
    PolarPerspective,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Function JSON, e.g. `{"kind":"huber","eta":1}`.
    pub function: String,
    /// Point JSON, e.g. `{"x":[2]}` or `{"z":[1,-2],"xi":-1}`.
    pub point: String,
    #[arg(long, value_enum, default_value_t = Which::Eval)]
    pub which: Which,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub stop_tol: f64,
    #[arg(long, default_value_t = 10)]
    pub trace_every: usize,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[arg(long, default_value_t = SUPPORT_TOL)]
    pub support_tol: f64,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Directory for the traces and the instance.
    #[arg(long, default_value = "gaugekit-out")]
    pub out_dir: PathBuf,
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            let text = serde_json::to_string_pretty(value)?;
            writeln!(std::io::stdout().lock(), "{text}").map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn load_problem(arg: &str) -> Result<(ProblemFile, ProblemSpec)> {
    let file: ProblemFile = read_json(arg)?;
    let p = file.to_problem()?;
    Ok((file, p))
}

fn generate(args: &GenerateArgs) -> Result<i32> {
    let spec = args.instance.spec();
    let inst = generate_sparse_robust_instance(&spec)?;
    if !inst.valid {
        eprintln!("warning: instance violates the standing assumption h(b) > sigma");
    }
    emit(&args.out, &ProblemFile::from_instance(&inst, &spec))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
#[serde(tag = "dual", rename_all = "snake_case")]
enum DualJson {
    /// `min κ°(Aᵀy) s.t. ⟨b,y⟩ − σρ°(y) ≥ 1`
    Gauge {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        sigma: f64,
        objective_polar: FnJson,
        constraint_polar: FnJson,
    },
    /// `min f♯(Aᵀy, α) s.t. ⟨b,y⟩ − σ g♯(y, μ) ≥ 1 − α − μ`
    Perspective {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        sigma: f64,
        form: &'static str,
        objective: FnJson,
        constraint: FnJson,
        objective_is_gauge: bool,
    },
}

fn rows(p: &ProblemSpec) -> Vec<Vec<f64>> {
    (0..p.m()).map(|i| p.a.row(i).to_vec()).collect()
}

fn dualize(args: &DualizeArgs) -> Result<i32> {
    let (_, p) = load_problem(&args.problem)?;
    let gauge = match args.form {
        DualForm::Auto => p.is_gauge_problem(),
        DualForm::Gauge => true,
        DualForm::Perspective => false,
    };
    let out = if gauge {
        let d = build_gauge_dual(&p)?;
        DualJson::Gauge {
            a: rows(&p),
            b: d.b.clone(),
            sigma: d.sigma,
            objective_polar: FnJson::from_gauge(&d.kappa_polar),
            constraint_polar: FnJson::from_gauge(&d.rho_polar),
        }
    } else {
        let d = build_perspective_dual(&p)?;
        DualJson::Perspective {
            a: rows(&p),
            b: d.b.clone(),
            sigma: d.sigma,
            form: match d.form {
                DualConstraintForm::Sharp => "sharp",
                DualConstraintForm::ConjugatePerspective => "conjugate_perspective",
            },
            objective: FnJson::from_perspective(&d.objective),
            constraint: FnJson::from_perspective(&d.constraint),
            objective_is_gauge: d.objective_is_gauge,
        }
    };
    emit(&args.out, &out)?;
    Ok(EXIT_OK)
}

fn solve(args: &SolveArgs) -> Result<i32> {
    let (file, p) = load_problem(&args.problem)?;
    let tol = args.tol.config()?;
    let mut cp = CpConfig::for_norm(p.a.norm(), args.iters, args.stop_tol);
    cp.trace_every = if args.trace.is_some() {
        args.trace_every
    } else {
        0
    };
    let mut rec = Recorder::new(&p, file.true_signal.as_deref(), SUPPORT_TOL)?;
    let m = p.m();

    let mut sol = SolutionFile {
        side: Some(args.side.name().into()),
        ..SolutionFile::default()
    };
    let solved: gaugekit_core::Result<()> = (|| {
        match args.side {
            Side::Primal => {
                let out = solve_primal(&p, &cp, &tol, |it, x, _| rec.record(it, x))?;
                sol.nu_p = Some(ExtReal(p.objective.eval(&out.x)?));
                sol.iterations = Some(out.iterations);
                sol.converged = Some(out.converged);
                sol.x = Some(out.x);
            }
            Side::GaugeDual | Side::PerspectiveDual => {
                let kappa = p.objective.as_gauge().cloned();
                let monitor = |it: usize, v: &[f64], q: &[f64]| {
                    let nu = kappa
                        .as_ref()
                        .and_then(|k| k.polar_eval(&p.a.apply_adjoint(&v[..m])).ok());
                    if let Some(nu) = nu.filter(|nu| *nu > 0.0 && nu.is_finite()) {
                        rec.record(it, &q.iter().map(|v| v / nu).collect::<Vec<_>>());
                    }
                };
                let out = if args.side == Side::GaugeDual {
                    solve_gauge_dual(&p, &cp, &tol, monitor)?
                } else {
                    solve_perspective_dual(&p, &cp, &tol, monitor)?
                };
                let x = out.rescaled_primal()?;
                sol.nu_p = Some(ExtReal(p.objective.eval(&x)?));
                sol.nu_d = Some(ExtReal(out.nu_d));
                sol.y = Some(out.v[..m].to_vec());
                if args.side == Side::PerspectiveDual {
                    sol.alpha = Some(0.0);
                    sol.mu = Some(out.v[m]);
                    sol.xi = Some(out.v[m + 1]);
                }
                sol.iterations = Some(out.iterations);
                sol.converged = Some(out.converged);
                sol.x = Some(x);
                sol.multiplier = Some(out.multiplier);
            }
        }
        Ok(())
    })();

    if let Some(path) = &args.trace {
        let with_reference = rec.has_reference();
        let trace = rec.partial();
        let meta = TraceMeta {
            side: args.side.name().into(),
            seed: args.seed.or(file.instance.map(|i| i.rng_seed)),
            cp,
            tol,
            support_tol: SUPPORT_TOL,
        };
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        write_trace(BufWriter::new(f), &meta, trace.records(), with_reference)?;
    }
    solved?;
    emit(&args.out, &sol)?;
    Ok(EXIT_OK)
}

fn report(
    p: &ProblemSpec,
    sol: &SolutionFile,
    x: &[f64],
    y: &[f64],
    tol: &ToleranceConfig,
) -> Result<OptimalityReport> {
    let perspective = sol.mu.is_some() || !p.is_gauge_problem();
    Ok(if perspective {
        let mu = sol
            .mu
            .ok_or_else(|| format_err("perspective certification needs mu"))?;
        check_perspective_optimality(p, x, y, sol.alpha.unwrap_or(0.0), mu, tol)?
    } else {
        check_gauge_optimality(p, x, y, tol)?
    })
}

/// Reads a vector given either as a bare array or as the `key` field of an
/// object.
fn read_vector(arg: &str, key: &str) -> Result<Vec<f64>> {
    let v: serde_json::Value = read_json(arg)?;
    let v = match v {
        serde_json::Value::Object(mut o) => o
            .remove(key)
            .ok_or_else(|| format_err(format!("{arg}: no `{key}` field")))?,
        v => v,
    };
    Ok(serde_json::from_value(v)?)
}

fn certify(args: &CertifyArgs) -> Result<i32> {
    let (_, p) = load_problem(&args.problem)?;
    let mut sol: SolutionFile = match &args.solution {
        Some(s) => read_json(s)?,
        None => SolutionFile::default(),
    };
    if let Some(x) = &args.x {
        sol.x = Some(read_vector(x, "x")?);
    }
    if let Some(y) = &args.y {
        sol.y = Some(read_vector(y, "y")?);
    }
    args.scalars.apply(&mut sol);
    let tol = args.tol.config()?;
    let x = sol
        .x
        .as_deref()
        .ok_or_else(|| format_err("solution has no primal point x"))?;
    let y = sol
        .y
        .as_deref()
        .ok_or_else(|| format_err("solution has no dual point y"))?;
    let rep = report(&p, &sol, x, y, &tol)?;
    emit(&args.out, &ReportJson::from(&rep))?;
    Ok(if rep.certified {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFIED
    })
}

fn recover(args: &RecoverArgs) -> Result<i32> {
    let (_, p) = load_problem(&args.problem)?;
    let arg = args
        .dual
        .as_ref()
        .or(args.dual_flag.as_ref())
        .ok_or_else(|| format_err("no dual point given"))?;
    let mut dual: SolutionFile = read_json(arg)?;
    args.scalars.apply(&mut dual);
    let tol = args.tol.config()?;
    let y = dual
        .y
        .as_deref()
        .ok_or_else(|| format_err("dual point has no y"))?;
    let alpha = dual.alpha.unwrap_or(0.0);
    let rec = match (args.method, dual.mu) {
        (Method::Auto | Method::Lstsq, Some(mu)) => {
            recover_primal_perspective(&p, y, alpha, mu, &tol)?
        }
        (Method::Auto, None) => recover_primal_gauge(&p, y, &tol)?,
        (Method::Lstsq, None) => {
            let support = active_support(&p.a.apply_adjoint(y), DEFAULT_SUPPORT_TOL);
            recover_bpdn_least_squares(&p, y, &support, &tol)?
        }
        (Method::Lagrange, _) => {
            let z = dual
                .multiplier
                .as_deref()
                .ok_or_else(|| format_err("lagrange recovery needs `multiplier`"))?;
            let nu = dual
                .nu_d
                .ok_or_else(|| format_err("lagrange recovery needs `nu_d`"))?
                .0;
            let x = recover_from_lagrange_dual(z, nu)?;
            let report = report(&p, &dual, &x, y, &tol)?;
            let on: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
            let signs = on.iter().map(|&i| x[i].signum()).collect();
            let support = SupportSet::new(on, signs, x.len())?;
            Recovered { x, report, support }
        }
    };
    let out = SolutionFile {
        side: Some("recovered".into()),
        nu_p: Some(ExtReal(p.objective.eval(&rec.x)?)),
        x: Some(rec.x),
        y: Some(y.to_vec()),
        alpha: dual.alpha,
        mu: dual.mu,
        report: Some(ReportJson::from(&rec.report)),
        ..SolutionFile::default()
    };
    emit(&args.out, &out)?;
    Ok(if rec.report.certified {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFIED
    })
}

/// Value of one transform of `f` at a point.
pub fn transform_value(f: &FnJson, point: &PointFile, which: Which) -> Result<f64> {
    let g = f.to_problem_fn(point.x.len())?.to_perspective();
    let scalar = || {
        point
            .s
            .ok_or_else(|| format_err("this transform needs the trailing scalar (lambda or xi)"))
    };
    Ok(match which {
        Which::Eval => g.eval(&point.x)?,
        Which::Conjugate => g.conjugate_eval(&point.x)?,
        Which::Perspective => g.perspective_eval(&point.x, scalar()?)?,
        Which::PolarPerspective => g.perspective_polar_eval(&point.x, scalar()?)?,
    })
}

fn transform(args: &TransformArgs) -> Result<i32> {
    let f: FnJson = read_json(&args.function)?;
    let point: PointFile = read_json(&args.point)?;
    emit(&None, &ExtReal(transform_value(&f, &point, args.which)?))?;
    Ok(EXIT_OK)
}

fn experiment(args: &ExperimentArgs) -> Result<i32> {
    let side = SideConfig::new(args.iters, args.stop_tol, args.trace_every);
    let cfg = ExperimentConfig {
        tol: args.tol.config()?,
        support_tol: args.support_tol,
        repeat: args.repeat,
        out_dir: Some(args.out_dir.clone()),
        ..ExperimentConfig::new(args.instance.spec(), side)
    };
    let summaries = run_sparse_robust_experiment(&cfg)?;
    emit(&None, &summaries)?;
    Ok(EXIT_OK)
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Dualize(a) => dualize(a),
        Command::Solve(a) => solve(a),
        Command::Certify(a) => certify(a),
        Command::Recover(a) => recover(a),
        Command::Transform(a) => transform(a),
        Command::Experiment(a) => experiment(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    fn value(f: &str, p: &str, which: Which) -> Result<f64> {
        transform_value(
            &serde_json::from_str(f).unwrap(),
            &serde_json::from_str(p).unwrap(),
            which,
        )
    }

    #[test]
    fn transforms() {
        let huber = r#"{"kind":"huber","eta":1}"#;
        assert_eq!(value(huber, r#"{"x":[2]}"#, Which::Eval).unwrap(), 1.5);
        assert_eq!(
            value(huber, r#"{"x":[0.5]}"#, Which::Conjugate).unwrap(),
            0.125
        );
        assert_eq!(
            value(huber, r#"{"x":[2],"lambda":2}"#, Which::Perspective).unwrap(),
            1.0
        );
        let l1 = r#"{"kind":"l1"}"#;
        assert_eq!(
            value(l1, r#"{"z":[1,-2],"xi":-1}"#, Which::PolarPerspective).unwrap(),
            2.0
        );
        assert_eq!(
            value(l1, r#"{"z":[1,-2],"xi":1}"#, Which::PolarPerspective).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            value(l1, r#"{"x":[1]}"#, Which::Perspective),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn side_names_match_value_enum() {
        for side in [Side::Primal, Side::GaugeDual, Side::PerspectiveDual] {
            assert_eq!(side.to_possible_value().unwrap().get_name(), side.name());
        }
    }
}
