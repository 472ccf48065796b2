//! Problem data shared by every other module: the dense linear map, problem
//! specifications, tolerances and the seeded sparse-robust instance generator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{check_dim, Error, Result};
use crate::gauges::GaugeSpec;
use crate::linalg::{dot, norm2, sqrt};
use crate::perspective::PerspectiveFn;

/// Name of the pseudo-random generator used for every seeded draw.
pub const RNG_NAME: &str = "xoshiro256++";

/// Inlier noise standard deviation as a multiple of `sigma`.
pub const INLIER_NOISE_SCALE: f64 = 0.1;

/// Magnitude of a gross outlier; the sign is drawn uniformly.
pub const OUTLIER_MAGNITUDE: f64 = 5.0;

/// Power iterations used for the cached operator-norm estimate.
const NORM_CACHE_ITERS: usize = 1000;

/// A dense real matrix `A: ℝⁿ → ℝᵐ` stored row-major, with a cached estimate
/// of its largest singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMap {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    norm: f64,
}

impl DenseMap {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, entries.len())?;
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        let mut map = Self {
            rows,
            cols,
            entries,
            norm: 0.0,
        };
        map.norm = estimate_operator_norm(&map, NORM_CACHE_ITERS);
        Ok(map)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            entries.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            entries,
            norm: if n > 0 { 1.0 } else { 0.0 },
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = d[i];
        }
        let norm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            rows: n,
            cols: n,
            entries,
            norm,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Cached estimate of ‖A‖₂.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.apply_adjoint_into(y, &mut out);
        out
    }

    pub fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += yi * a;
                }
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut entries = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
            norm: self.norm,
        }
    }

    /// The sub-matrix made of the listed columns.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            for &j in cols {
                entries.push(self.get(i, j));
            }
        }
        let mut map = Self {
            rows: self.rows,
            cols: cols.len(),
            entries,
            norm: 0.0,
        };
        map.norm = estimate_operator_norm(&map, NORM_CACHE_ITERS);
        map
    }

    /// `AᵀA` as a dense `n × n` row-major matrix.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..n {
                if r[a] != 0.0 {
                    for b in 0..n {
                        g[a * n + b] += r[a] * r[b];
                    }
                }
            }
        }
        g
    }
}

/// Power-method estimate of the largest singular value of `a`.
///
/// Iterates on `AᵀA` from a fixed pseudo-random start, so the estimate is
/// deterministic and nondecreasing in `iters`. Returns 0 for a zero matrix.
pub fn estimate_operator_norm(a: &DenseMap, iters: usize) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x05ee_d0f9_a09e);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![0.0; a.rows()];
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..iters.max(1) {
        a.apply_into(&v, &mut av);
        a.apply_adjoint_into(&av, &mut w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        lambda = nw;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
    }
    sqrt(lambda)
}

/// Numeric tolerances shared by checks and inner solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub bisect_tol: f64,
    pub max_inner_iters: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            opt_tol: 1e-6,
            bisect_tol: 1e-10,
            max_inner_iters: 5000,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.feas_tol > 0.0
            && self.opt_tol > 0.0
            && self.bisect_tol > 0.0
            && self.max_inner_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "tolerances must be strictly positive".into(),
            ))
        }
    }
}

/// Objective or constraint function of a problem: either a closed gauge or a
/// nonnegative closed convex function with perspective transforms.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemFn {
    Gauge(GaugeSpec),
    Convex(PerspectiveFn),
}

impl ProblemFn {
    pub fn dimension(&self) -> usize {
        match self {
            Self::Gauge(g) => g.dimension(),
            Self::Convex(f) => f.dimension(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Gauge(g) => g.eval(x),
            Self::Convex(f) => f.eval(x),
        }
    }

    /// The gauge behind this function, if it is one (including wrapped gauges).
    pub fn as_gauge(&self) -> Option<&GaugeSpec> {
        match self {
            Self::Gauge(g) => Some(g),
            Self::Convex(f) => f.as_gauge(),
        }
    }

    /// View as a perspective-capable function.
    pub fn to_perspective(&self) -> PerspectiveFn {
        match self {
            Self::Gauge(g) => PerspectiveFn::gauge(g.clone()),
            Self::Convex(f) => f.clone(),
        }
    }
}

/// `minimize obj(x) subject to cons(b − Ax) ≤ sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: DenseMap,
    pub b: Vec<f64>,
    pub sigma: f64,
    pub objective: ProblemFn,
    pub constraint: ProblemFn,
}

impl ProblemSpec {
    pub fn new(
        a: DenseMap,
        b: Vec<f64>,
        sigma: f64,
        objective: ProblemFn,
        constraint: ProblemFn,
    ) -> Result<Self> {
        check_dim(a.rows(), b.len())?;
        check_dim(a.cols(), objective.dimension())?;
        check_dim(a.rows(), constraint.dimension())?;
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(Self {
            a,
            b,
            sigma,
            objective,
            constraint,
        })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.a.apply(x);
        self.b.iter().zip(&ax).map(|(b, v)| b - v).collect()
    }

    /// Standing assumption `g(b) > sigma`; otherwise `x = 0` is trivially optimal.
    pub fn check_standing_assumption(&self) -> Result<()> {
        let gb = self.constraint.eval(&self.b)?;
        if gb > self.sigma {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "constraint value at b ({gb}) does not exceed sigma ({}); x = 0 is feasible",
                self.sigma
            )))
        }
    }

    pub fn is_gauge_problem(&self) -> bool {
        self.objective.as_gauge().is_some() && self.constraint.as_gauge().is_some()
    }
}

/// Parameters of a seeded sparse robust-regression instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSeedSpec {
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    pub n_outliers: usize,
    pub sigma: f64,
    pub eta: f64,
    pub rng_seed: u64,
}

impl InstanceSeedSpec {
    /// The sparse robust regression setup used for the reference experiment.
    pub fn reference(rng_seed: u64) -> Self {
        Self {
            m: 120,
            n: 512,
            nnz: 20,
            n_outliers: 5,
            sigma: 0.2,
            eta: 1.0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("m and n must be positive".into()));
        }
        if self.nnz > self.n {
            return Err(Error::InvalidParameter(format!(
                "nnz {} exceeds n {}",
                self.nnz, self.n
            )));
        }
        if self.n_outliers > self.m {
            return Err(Error::InvalidParameter(format!(
                "n_outliers {} exceeds m {}",
                self.n_outliers, self.m
            )));
        }
        if !(self.sigma >= 0.0) || !(self.eta > 0.0) {
            return Err(Error::InvalidParameter(
                "sigma must be >= 0 and eta > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A generated instance together with the planted signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub problem: ProblemSpec,
    pub true_signal: Vec<f64>,
    /// False when the standing assumption `g(b) > sigma` fails.
    pub valid: bool,
}

/// Sparse robust regression: `min ‖x‖₁ s.t. Σ h_η(b − Ax) ≤ σ` with a Gaussian
/// `A` (entries `N(0, 1/m)`), a ±1 spike train and noise with gross outliers.
pub fn generate_sparse_robust_instance(spec: &InstanceSeedSpec) -> Result<Instance> {
    spec.validate()?;
    let InstanceSeedSpec {
        m,
        n,
        nnz,
        n_outliers,
        sigma,
        eta,
        rng_seed,
    } = *spec;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(rng_seed);

    let scale = 1.0 / sqrt(m as f64);
    let entries: Vec<f64> = (0..m * n)
        .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
        .collect();
    let a = DenseMap::new(m, n, entries)?;

    let mut x = vec![0.0; n];
    for i in sample(&mut rng, n, nnz).into_iter() {
        x[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }

    let noise_std = INLIER_NOISE_SCALE * sigma;
    let mut noise: Vec<f64> = (0..m)
        .map(|_| {
            noise_std * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        })
        .collect();
    for i in sample(&mut rng, m, n_outliers).into_iter() {
        noise[i] = if rng.random::<bool>() {
            OUTLIER_MAGNITUDE
        } else {
            -OUTLIER_MAGNITUDE
        };
    }

    let mut b = a.apply(&x);
    for (bi, e) in b.iter_mut().zip(&noise) {
        *bi += e;
    }

    let problem = ProblemSpec::new(
        a,
        b,
        sigma,
        ProblemFn::Gauge(GaugeSpec::l1(n)),
        ProblemFn::Convex(PerspectiveFn::huber_sum(eta, m)?),
    )?;
    let valid = problem.check_standing_assumption().is_ok();
    Ok(Instance {
        problem,
        true_signal: x,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_distr::Uniform;

    #[test]
    fn operator_norm_of_identity_and_diagonal() {
        assert_eq!(estimate_operator_norm(&DenseMap::identity(3), 50), 1.0);
        let d = DenseMap::from_rows(&[&[3.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_relative_eq!(estimate_operator_norm(&d, 200), 3.0, epsilon = 1e-6);
        let z = DenseMap::new(2, 3, vec![0.0; 6]).unwrap();
        assert_eq!(estimate_operator_norm(&z, 10), 0.0);
    }

    #[test]
    fn operator_norm_nondecreasing_in_iterations() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let a = DenseMap::new(7, 9, (0..63).map(|_| rng.sample(StandardNormal)).collect()).unwrap();
        let mut prev = 0.0;
        for k in 1..40 {
            let e = estimate_operator_norm(&a, k);
            assert!(e >= prev * (1.0 - 1e-14), "iter {k}: {e} < {prev}");
            prev = e;
        }
    }

    #[test]
    fn adjoint_consistency_on_random_probes() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let a =
            DenseMap::new(6, 10, (0..60).map(|_| rng.sample(StandardNormal)).collect()).unwrap();
        let u = Uniform::new(-1.0, 1.0).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..10).map(|_| rng.sample(u)).collect();
            let y: Vec<f64> = (0..6).map(|_| rng.sample(u)).collect();
            let lhs = dot(&a.apply(&x), &y);
            let rhs = dot(&x, &a.apply_adjoint(&y));
            let scale = 1.0 + a.norm() * norm2(&x) * norm2(&y);
            assert!((lhs - rhs).abs() <= 1e-12 * scale);
            assert!(norm2(&a.apply(&x)) <= (1.0 + 1e-8) * a.norm() * norm2(&x));
        }
    }

    #[test]
    fn reference_instance_shape() {
        let inst = generate_sparse_robust_instance(&InstanceSeedSpec::reference(7)).unwrap();
        assert_eq!(inst.problem.m(), 120);
        assert_eq!(inst.problem.n(), 512);
        assert_eq!(inst.true_signal.iter().filter(|v| **v != 0.0).count(), 20);
        assert!(inst
            .true_signal
            .iter()
            .all(|v| [-1.0, 0.0, 1.0].contains(v)));
        assert!(inst.valid);
        let r = inst.problem.residual(&inst.true_signal);
        assert_eq!(r.iter().filter(|v| v.abs() == OUTLIER_MAGNITUDE).count(), 5);
    }

    #[test]
    fn same_seed_gives_identical_instances() {
        let spec = InstanceSeedSpec {
            m: 10,
            n: 30,
            nnz: 4,
            n_outliers: 2,
            sigma: 0.2,
            eta: 1.0,
            rng_seed: 99,
        };
        let a = generate_sparse_robust_instance(&spec).unwrap();
        let b = generate_sparse_robust_instance(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate_sparse_robust_instance(&InstanceSeedSpec {
            rng_seed: 100,
            ..spec
        })
        .unwrap();
        assert_ne!(a.problem.b, c.problem.b);
    }

    #[test]
    fn zero_signal_instance_is_flagged_invalid() {
        let spec = InstanceSeedSpec {
            m: 5,
            n: 8,
            nnz: 0,
            n_outliers: 0,
            sigma: 0.0,
            eta: 1.0,
            rng_seed: 1,
        };
        let inst = generate_sparse_robust_instance(&spec).unwrap();
        assert!(inst.problem.b.iter().all(|v| *v == 0.0));
        assert!(!inst.valid);
        assert!(inst.problem.check_standing_assumption().is_err());
    }

    #[test]
    fn invalid_seed_spec_rejected() {
        let spec = InstanceSeedSpec {
            m: 5,
            n: 8,
            nnz: 9,
            n_outliers: 0,
            sigma: 0.1,
            eta: 1.0,
            rng_seed: 1,
        };
        assert!(matches!(
            generate_sparse_robust_instance(&spec),
            Err(Error::InvalidParameter(_))
        ));
        let spec = InstanceSeedSpec {
            nnz: 2,
            n_outliers: 6,
            ..spec
        };
        assert!(generate_sparse_robust_instance(&spec).is_err());
    }

    #[test]
    fn tolerance_defaults() {
        let t = ToleranceConfig::default();
        assert_eq!(
            (t.feas_tol, t.opt_tol, t.bisect_tol, t.max_inner_iters),
            (1e-8, 1e-6, 1e-10, 5000)
        );
        assert!(t.validate().is_ok());
        assert!(ToleranceConfig { opt_tol: 0.0, ..t }.validate().is_err());
    }
}
