//! JSON problem, function, point and solution files.
//!
//! Functions carry no dimension of their own; it comes from where they are
//! used (`n` for objectives, `m` for constraints, the point length for
//! transforms). Extended reals are numbers when finite and the strings
//! `"+inf"`, `"-inf"` or `"nan"` otherwise.

use std::fmt;
use std::path::Path;

use gaugekit_core::{
    BregmanFamily, Cone, DenseMap, GaugeKind, GaugeSpec, Instance, InstanceSeedSpec,
    OptimalityReport, PerspectiveFn, PerspectiveKind, PlqSpec, ProblemFn, ProblemSpec, RNG_NAME,
};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{format_err, Error, Result};

/// A real number that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            v if v.is_finite() => s.serialize_f64(v),
            v if v.is_nan() => s.serialize_str("nan"),
            v if v > 0.0 => s.serialize_str("+inf"),
            _ => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"+inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                match v {
                    "+inf" | "inf" => Ok(ExtReal(f64::INFINITY)),
                    "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                    "nan" => Ok(ExtReal(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConeJson {
    NonNegative,
    NonPositive,
    Zero,
    Whole,
    SecondOrder,
    NegSecondOrder,
    Polyhedral {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
    },
    Generated {
        #[serde(rename = "G")]
        g: Vec<Vec<f64>>,
    },
}

/// A coordinate block of a separable function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    pub dim: usize,
    #[serde(rename = "fn")]
    pub f: FnJson,
}

/// Function description, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FnJson {
    L1,
    L2,
    Linf,
    Scaled {
        c: f64,
        base: Box<FnJson>,
    },
    Cone {
        cone: ConeJson,
    },
    /// Separable sum; a gauge when every block is one.
    Sum {
        blocks: Vec<BlockJson>,
    },
    Max {
        blocks: Vec<BlockJson>,
    },
    #[serde(alias = "huber_sum")]
    Huber {
        eta: f64,
    },
    Plq {
        #[serde(rename = "W")]
        w_mat: Vec<Vec<f64>>,
        w: Vec<f64>,
        #[serde(rename = "L")]
        l_mat: Vec<Vec<f64>>,
    },
    Quadratic,
    /// A gauge handled through the perspective calculus.
    Gauge {
        #[serde(rename = "base", alias = "gauge")]
        gauge: Box<FnJson>,
    },
    Bregman {
        family: String,
        anchor: Vec<f64>,
    },
}

/// Row-major dense matrix with `cols` columns.
pub fn matrix_from_rows(rows: &[Vec<f64>], cols: usize) -> Result<DenseMap> {
    let mut entries = Vec::with_capacity(rows.len() * cols);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(format_err(format!(
                "matrix row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        entries.extend_from_slice(r);
    }
    Ok(DenseMap::new(rows.len(), cols, entries)?)
}

fn matrix_to_rows(a: &DenseMap) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

fn family_from_name(name: &str) -> Result<BregmanFamily> {
    match name {
        "gaussian" => Ok(BregmanFamily::Gaussian),
        "poisson" => Ok(BregmanFamily::Poisson),
        "bernoulli" => Ok(BregmanFamily::Bernoulli),
        other => Err(format_err(format!("unknown Bregman family {other:?}"))),
    }
}

impl ConeJson {
    fn to_cone(&self, dim: usize) -> Result<Cone> {
        Ok(match self {
            Self::NonNegative => Cone::NonNegative,
            Self::NonPositive => Cone::NonPositive,
            Self::Zero => Cone::Zero,
            Self::Whole => Cone::Whole,
            Self::SecondOrder => Cone::SecondOrder,
            Self::NegSecondOrder => Cone::NegSecondOrder,
            Self::Polyhedral { w } => Cone::Polyhedral(matrix_from_rows(w, dim)?),
            Self::Generated { g } => Cone::Generated(matrix_from_rows(g, dim)?),
        })
    }

    fn from_cone(c: &Cone) -> Self {
        match c {
            Cone::NonNegative => Self::NonNegative,
            Cone::NonPositive => Self::NonPositive,
            Cone::Zero => Self::Zero,
            Cone::Whole => Self::Whole,
            Cone::SecondOrder => Self::SecondOrder,
            Cone::NegSecondOrder => Self::NegSecondOrder,
            Cone::Polyhedral(w) => Self::Polyhedral {
                w: matrix_to_rows(w),
            },
            Cone::Generated(g) => Self::Generated {
                g: matrix_to_rows(g),
            },
        }
    }
}

impl FnJson {
    /// Builds the function on `ℝ^dim`.
    pub fn to_problem_fn(&self, dim: usize) -> Result<ProblemFn> {
        let gauge = |g: GaugeSpec| Ok(ProblemFn::Gauge(g));
        match self {
            Self::L1 => gauge(GaugeSpec::l1(dim)),
            Self::L2 => gauge(GaugeSpec::l2(dim)),
            Self::Linf => gauge(GaugeSpec::linf(dim)),
            Self::Scaled { c, base } => gauge(GaugeSpec::scaled(*c, base.to_gauge(dim)?)?),
            Self::Cone { cone } => gauge(GaugeSpec::cone(cone.to_cone(dim)?, dim)?),
            Self::Sum { blocks } => {
                let parts = Self::blocks(blocks, dim)?;
                if parts.iter().all(|p| matches!(p, ProblemFn::Gauge(_))) {
                    let gs = parts
                        .into_iter()
                        .filter_map(|p| p.as_gauge().cloned())
                        .collect();
                    gauge(GaugeSpec::separable_sum(gs)?)
                } else {
                    let fs = parts.iter().map(ProblemFn::to_perspective).collect();
                    Ok(ProblemFn::Convex(PerspectiveFn::separable_sum(fs)?))
                }
            }
            Self::Max { blocks } => {
                let gs = blocks
                    .iter()
                    .map(|b| b.f.to_gauge(b.dim))
                    .collect::<Result<Vec<_>>>()?;
                Self::blocks(blocks, dim)?;
                gauge(GaugeSpec::separable_max(gs)?)
            }
            Self::Huber { eta } => Ok(ProblemFn::Convex(PerspectiveFn::huber_sum(*eta, dim)?)),
            Self::Plq { w_mat, w, l_mat } => {
                let spec = PlqSpec::new(
                    matrix_from_rows(w_mat, dim)?,
                    w.clone(),
                    matrix_from_rows(l_mat, dim)?,
                )?;
                Ok(ProblemFn::Convex(PerspectiveFn::plq(spec)))
            }
            Self::Quadratic => Ok(ProblemFn::Convex(PerspectiveFn::quadratic(dim))),
            Self::Gauge { gauge } => Ok(ProblemFn::Convex(PerspectiveFn::gauge(
                gauge.to_gauge(dim)?,
            ))),
            Self::Bregman { family, anchor } => {
                if anchor.len() != dim {
                    return Err(format_err(format!(
                        "Bregman anchor has length {}, expected {dim}",
                        anchor.len()
                    )));
                }
                Ok(ProblemFn::Convex(PerspectiveFn::bregman(
                    family_from_name(family)?,
                    anchor.clone(),
                )?))
            }
        }
    }

    fn blocks(blocks: &[BlockJson], dim: usize) -> Result<Vec<ProblemFn>> {
        let total: usize = blocks.iter().map(|b| b.dim).sum();
        if total != dim {
            return Err(format_err(format!(
                "block dimensions add up to {total}, expected {dim}"
            )));
        }
        blocks.iter().map(|b| b.f.to_problem_fn(b.dim)).collect()
    }

    fn to_gauge(&self, dim: usize) -> Result<GaugeSpec> {
        match self.to_problem_fn(dim)? {
            ProblemFn::Gauge(g) => Ok(g),
            ProblemFn::Convex(_) => Err(format_err(format!("{} is not a gauge", self.kind_name()))),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::L1 => "l1",
            Self::L2 => "l2",
            Self::Linf => "linf",
            Self::Scaled { .. } => "scaled",
            Self::Cone { .. } => "cone",
            Self::Sum { .. } => "sum",
            Self::Max { .. } => "max",
            Self::Huber { .. } => "huber",
            Self::Plq { .. } => "plq",
            Self::Quadratic => "quadratic",
            Self::Gauge { .. } => "gauge",
            Self::Bregman { .. } => "bregman",
        }
    }

    pub fn from_gauge(g: &GaugeSpec) -> Self {
        let blocks = |gs: &[GaugeSpec]| {
            gs.iter()
                .map(|b| BlockJson {
                    dim: b.dimension(),
                    f: Self::from_gauge(b),
                })
                .collect()
        };
        match g.kind() {
            GaugeKind::L1 => Self::L1,
            GaugeKind::L2 => Self::L2,
            GaugeKind::LInf => Self::Linf,
            GaugeKind::ConeIndicator(c) => Self::Cone {
                cone: ConeJson::from_cone(c),
            },
            GaugeKind::Scaled { c, base } => Self::Scaled {
                c: *c,
                base: Box::new(Self::from_gauge(base)),
            },
            GaugeKind::SeparableSum(gs) => Self::Sum { blocks: blocks(gs) },
            GaugeKind::SeparableMax(gs) => Self::Max { blocks: blocks(gs) },
        }
    }

    pub fn from_perspective(f: &PerspectiveFn) -> Self {
        match f.kind() {
            PerspectiveKind::HuberSum { eta } => Self::Huber { eta: *eta },
            PerspectiveKind::Plq(p) => Self::Plq {
                w_mat: matrix_to_rows(p.w_mat()),
                w: p.w_vec().to_vec(),
                l_mat: matrix_to_rows(p.l_mat()),
            },
            PerspectiveKind::Gauge(g) => Self::Gauge {
                gauge: Box::new(Self::from_gauge(g)),
            },
            PerspectiveKind::Quadratic => Self::Quadratic,
            PerspectiveKind::SeparableSum(parts) => Self::Sum {
                blocks: parts
                    .iter()
                    .map(|p| BlockJson {
                        dim: p.dimension(),
                        f: Self::from_perspective(p),
                    })
                    .collect(),
            },
            PerspectiveKind::Bregman { family, anchor } => Self::Bregman {
                family: family.name().to_string(),
                anchor: anchor.clone(),
            },
        }
    }

    pub fn from_problem_fn(f: &ProblemFn) -> Self {
        match f {
            ProblemFn::Gauge(g) => Self::from_gauge(g),
            ProblemFn::Convex(c) => Self::from_perspective(c),
        }
    }
}

/// How a generated instance was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub nnz: usize,
    pub n_outliers: usize,
    pub eta: f64,
    pub rng_seed: u64,
    pub rng: RngName,
}

/// Name of the generator behind [`InstanceMeta::rng_seed`]; only one exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RngName;

impl Serialize for RngName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(RNG_NAME)
    }
}

impl<'de> Deserialize<'de> for RngName {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == RNG_NAME {
            Ok(RngName)
        } else {
            Err(de::Error::custom(format!(
                "unsupported generator {s:?}, expected {RNG_NAME:?}"
            )))
        }
    }
}

/// `minimize objective(x) subject to constraint(b − Ax) ≤ sigma`, optionally
/// with the planted signal of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub sigma: f64,
    pub objective: FnJson,
    pub constraint: FnJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_signal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceMeta>,
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<ProblemSpec> {
        if self.a.len() != self.m || self.b.len() != self.m {
            return Err(format_err(format!(
                "m = {} but A has {} rows and b has {} entries",
                self.m,
                self.a.len(),
                self.b.len()
            )));
        }
        if let Some(x) = &self.true_signal {
            if x.len() != self.n {
                return Err(format_err(format!(
                    "true_signal has length {}, expected {}",
                    x.len(),
                    self.n
                )));
            }
        }
        let a = matrix_from_rows(&self.a, self.n)?;
        Ok(ProblemSpec::new(
            a,
            self.b.clone(),
            self.sigma,
            self.objective.to_problem_fn(self.n)?,
            self.constraint.to_problem_fn(self.m)?,
        )?)
    }

    pub fn from_problem(p: &ProblemSpec) -> Self {
        Self {
            m: p.m(),
            n: p.n(),
            a: matrix_to_rows(&p.a),
            b: p.b.clone(),
            sigma: p.sigma,
            objective: FnJson::from_problem_fn(&p.objective),
            constraint: FnJson::from_problem_fn(&p.constraint),
            true_signal: None,
            instance: None,
        }
    }

    pub fn from_instance(inst: &Instance, spec: &InstanceSeedSpec) -> Self {
        Self {
            true_signal: Some(inst.true_signal.clone()),
            instance: Some(InstanceMeta {
                nnz: spec.nnz,
                n_outliers: spec.n_outliers,
                eta: spec.eta,
                rng_seed: spec.rng_seed,
                rng: RngName,
            }),
            ..Self::from_problem(&inst.problem)
        }
    }
}

/// A point `x` with an optional trailing scalar: `λ` for perspectives, `ξ` for
/// perspective-polars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFile {
    #[serde(alias = "z", alias = "y")]
    pub x: Vec<f64>,
    #[serde(default, alias = "lambda", alias = "xi", alias = "mu")]
    pub s: Option<f64>,
}

/// Output of `solve` and `recover`, input of `certify` and `recover`.
///
/// Every field is optional so that a bare `{"y": [...]}` is a valid dual
/// point for recovery.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_p: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_d: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Multiplier of the Lagrange dual of the dual, before division by `ν_d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportJson>,
}

/// Serializable form of an [`OptimalityReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub primal_activity_residual: ExtReal,
    pub dual_activity_residual: ExtReal,
    pub objective_alignment_residual: ExtReal,
    pub constraint_alignment_residual: ExtReal,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub certified: bool,
    pub duality_product: ExtReal,
}

impl From<&OptimalityReport> for ReportJson {
    fn from(r: &OptimalityReport) -> Self {
        Self {
            primal_activity_residual: ExtReal(r.primal_activity_residual),
            dual_activity_residual: ExtReal(r.dual_activity_residual),
            objective_alignment_residual: ExtReal(r.objective_alignment_residual),
            constraint_alignment_residual: ExtReal(r.constraint_alignment_residual),
            primal_feasible: r.primal_feasible,
            dual_feasible: r.dual_feasible,
            certified: r.certified,
            duality_product: ExtReal(r.duality_product),
        }
    }
}

/// Reads JSON from a file, or parses the argument itself when it starts like
/// a JSON object or array.
pub fn read_json<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::io(arg, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
