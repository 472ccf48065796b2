//! Recovering primal solutions from dual ones.
//!
//! Every routine that returns a primal point runs it through the matching
//! optimality checker first and fails with [`Error::NotCertified`] otherwise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::duality::{check_gauge_optimality, check_perspective_optimality, OptimalityReport};
use crate::error::{capability, check_dim, Error, Result};
use crate::gauges::{sign0, GaugeKind};
use crate::linalg::{dot, nnls, norm2, norm_inf, sqrt, Cholesky};
use crate::model::{DenseMap, ProblemSpec, ToleranceConfig};
use crate::perspective::PerspectiveKind;
use crate::solvers::restricted_least_squares;

/// Default relative tolerance for reading a support off a dual iterate.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-5;

/// Sorted indices with a sign attached to each.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
    signs: Vec<i8>,
    n: usize,
}

impl SupportSet {
    /// Signs are read through their sign bit, so any nonzero value works.
    pub fn new(indices: Vec<usize>, signs: Vec<f64>, n: usize) -> Result<Self> {
        check_dim(indices.len(), signs.len())?;
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "support indices must be sorted and unique".into(),
            ));
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(Error::InvalidParameter("support index out of range".into()));
        }
        if signs.iter().any(|s| *s == 0.0 || s.is_nan()) {
            return Err(Error::InvalidParameter(
                "support signs must be nonzero".into(),
            ));
        }
        let signs = signs
            .iter()
            .map(|s| if *s > 0.0 { 1 } else { -1 })
            .collect();
        Ok(Self { indices, signs, n })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> Vec<f64> {
        self.signs.iter().map(|&s| f64::from(s)).collect()
    }

    pub fn sign(&self, k: usize) -> f64 {
        f64::from(self.signs[k])
    }

    pub fn ambient_dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    fn retain(&self, keep: impl Fn(usize) -> bool) -> Self {
        let (indices, signs) = self
            .indices
            .iter()
            .zip(&self.signs)
            .filter(|(i, _)| keep(**i))
            .map(|(i, s)| (*i, *s))
            .unzip();
        Self {
            indices,
            signs,
            n: self.n,
        }
    }
}

/// Indices where `|z_i| ≥ ‖z‖∞(1 − tol)`, signed like `z`. A zero vector
/// has an empty support, which callers treat as a degenerate dual.
pub fn active_support(z: &[f64], tol: f64) -> SupportSet {
    let top = norm_inf(z);
    if top == 0.0 || !top.is_finite() {
        return SupportSet {
            indices: vec![],
            signs: vec![],
            n: z.len(),
        };
    }
    let cut = top * (1.0 - tol);
    let (indices, signs) = z
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= cut)
        .map(|(i, v)| (i, if *v > 0.0 { 1 } else { -1 }))
        .unzip();
    SupportSet {
        indices,
        signs,
        n: z.len(),
    }
}

/// A recovered primal point together with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovered {
    pub x: Vec<f64>,
    pub report: OptimalityReport,
    /// Support actually used, after any sign-driven shrink.
    pub support: SupportSet,
}

fn not_certified(what: &str, report: &OptimalityReport) -> Error {
    Error::NotCertified(format!("{what}: {}", report.summary()))
}

fn is_l1_l2(p: &ProblemSpec) -> bool {
    matches!(
        p.objective.as_gauge().map(|g| g.kind()),
        Some(GaugeKind::L1)
    ) && matches!(
        p.constraint.as_gauge().map(|g| g.kind()),
        Some(GaugeKind::L2)
    )
}

fn sign_violations(x: &[f64], support: &SupportSet) -> Vec<usize> {
    support
        .indices()
        .iter()
        .enumerate()
        .filter(|(k, &i)| x[i] * support.sign(*k) < 0.0)
        .map(|(_, &i)| i)
        .collect()
}

/// Least-squares recovery for `min ‖x‖₁ s.t. ‖b − Ax‖₂ ≤ σ`.
///
/// Solves `min ‖b − Ax − σy/‖y‖‖` with `x` restricted to `support`; entries
/// whose sign disagrees with the support are dropped once and the solve is
/// repeated.
pub fn recover_bpdn_least_squares(
    p: &ProblemSpec,
    y: &[f64],
    support: &SupportSet,
    tol: &ToleranceConfig,
) -> Result<Recovered> {
    check_dim(p.m(), y.len())?;
    check_dim(p.n(), support.ambient_dimension())?;
    if !is_l1_l2(p) {
        return Err(capability(
            "recovery",
            "least-squares recovery needs an l1 objective and l2 constraint",
        ));
    }
    let ny = norm2(y);
    if ny == 0.0 {
        return Err(Error::DegenerateDual(
            "zero dual point: the primal problem is infeasible".into(),
        ));
    }
    let rhs: Vec<f64> =
        p.b.iter()
            .zip(y)
            .map(|(b, y)| b - p.sigma * y / ny)
            .collect();
    let mut support = support.clone();
    let mut x = restricted_least_squares(&p.a, &rhs, &support, 1e-10)?;
    let bad = sign_violations(&x, &support);
    if !bad.is_empty() {
        support = support.retain(|i| !bad.contains(&i));
        x = restricted_least_squares(&p.a, &rhs, &support, 1e-10)?;
        if !sign_violations(&x, &support).is_empty() {
            return Err(Error::NotCertified(
                "sign pattern still violated after support shrink".into(),
            ));
        }
    }
    let report = check_gauge_optimality(p, &x, y, tol)?;
    if !report.certified {
        return Err(not_certified("least-squares recovery", &report));
    }
    Ok(Recovered { x, report, support })
}

/// Recovers a primal solution of a gauge problem from an optimal dual `y`.
///
/// Handles an `l2` constraint with an `l1` or `l2` objective. Other
/// constraints go through [`recover_primal_perspective`].
pub fn recover_primal_gauge(
    p: &ProblemSpec,
    y: &[f64],
    tol: &ToleranceConfig,
) -> Result<Recovered> {
    check_dim(p.m(), y.len())?;
    let (Some(kappa), Some(rho)) = (p.objective.as_gauge(), p.constraint.as_gauge()) else {
        return Err(capability(
            "recovery",
            "gauge recovery needs a gauge problem; use the perspective route",
        ));
    };
    if !matches!(rho.kind(), GaugeKind::L2) {
        return Err(capability(
            "recovery",
            "gauge recovery supports l2 constraints only",
        ));
    }
    match kappa.kind() {
        GaugeKind::L1 => {
            let support = active_support(&p.a.apply_adjoint(y), DEFAULT_SUPPORT_TOL);
            if support.is_empty() {
                return Err(Error::DegenerateDual("A^T y vanishes".into()));
            }
            recover_bpdn_least_squares(p, y, &support, tol)
        }
        GaugeKind::L2 => {
            // x is a nonnegative multiple of Aᵀy; fit the multiple
            let ny = norm2(y);
            if ny == 0.0 {
                return Err(Error::DegenerateDual(
                    "zero dual point: the primal problem is infeasible".into(),
                ));
            }
            let dir = p.a.apply_adjoint(y);
            let adir = p.a.apply(&dir);
            let rhs: Vec<f64> =
                p.b.iter()
                    .zip(y)
                    .map(|(b, y)| b - p.sigma * y / ny)
                    .collect();
            let den = dot(&adir, &adir);
            let t = if den > 0.0 {
                (dot(&adir, &rhs) / den).max(0.0)
            } else {
                0.0
            };
            let x: Vec<f64> = dir.iter().map(|d| t * d).collect();
            let report = check_gauge_optimality(p, &x, y, tol)?;
            if !report.certified {
                return Err(not_certified("gauge recovery", &report));
            }
            let support = active_support(&x, 1.0);
            Ok(Recovered { x, report, support })
        }
        _ => Err(capability(
            "recovery",
            "gauge recovery supports l1 and l2 objectives only",
        )),
    }
}

/// Recovers `x` for an `l1` objective and a Huber misfit from a dual point
/// `(y, α, μ)` with `μ < 0`.
///
/// `(b − Ax, 1)/σ` is written as a convex combination of the gradients of the
/// active pieces of `max{‖y‖∞/η, −(η/2μ)‖y‖²}`. The weight of the quadratic
/// piece is fixed by the last coordinate; the remaining weights and the
/// on-support magnitudes of `x` come from one nonnegative least-squares solve.
pub fn recover_primal_perspective(
    p: &ProblemSpec,
    y: &[f64],
    alpha: f64,
    mu: f64,
    tol: &ToleranceConfig,
) -> Result<Recovered> {
    check_dim(p.m(), y.len())?;
    let eta = match p.constraint.to_perspective().kind() {
        PerspectiveKind::HuberSum { eta } => *eta,
        _ => {
            return Err(capability(
                "recovery",
                "perspective recovery supports Huber misfits only",
            ))
        }
    };
    if !matches!(
        p.objective.as_gauge().map(|g| g.kind()),
        Some(GaugeKind::L1)
    ) {
        return Err(capability(
            "recovery",
            "perspective recovery supports l1 objectives only",
        ));
    }
    if mu >= 0.0 {
        return Err(capability(
            "recovery",
            "perspective recovery with mu = 0 is not supported",
        ));
    }
    if p.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "perspective recovery needs sigma > 0".into(),
        ));
    }
    let (m, sigma) = (p.m(), p.sigma);
    let yy = dot(y, y);
    if yy == 0.0 {
        return Err(Error::DegenerateDual("zero dual point".into()));
    }
    let quad = -eta * yy / (2.0 * mu);
    let lin = norm_inf(y) / eta;
    let gs = quad.max(lin);
    let rel = DEFAULT_SUPPORT_TOL;
    if quad < gs * (1.0 - rel) {
        return Err(Error::NotCertified(
            "quadratic piece inactive: (b - Ax, 1) cannot lie in the subdifferential, so the dual point is not optimal".into(),
        ));
    }
    let theta_q = 2.0 * mu * mu / (sigma * eta * yy);
    if theta_q > 1.0 + 1e-6 {
        return Err(Error::NotCertified(format!(
            "quadratic weight {theta_q} exceeds one: dual point not optimal"
        )));
    }
    let lin_set: Vec<usize> = (0..m)
        .filter(|&i| y[i].abs() / eta >= gs * (1.0 - rel))
        .collect();
    let support = active_support(&p.a.apply_adjoint(y), rel);
    if support.is_empty() {
        return Err(Error::DegenerateDual("A^T y vanishes".into()));
    }

    // unknowns: t (magnitudes on support, then signed) followed by hull weights
    let (k, j) = (support.len(), lin_set.len());
    let cols = k + j;
    let rows = m + 1;
    let mut c = vec![0.0; rows * cols];
    let mut d = vec![0.0; rows];
    for (col, (&idx, s)) in support.indices().iter().zip(support.signs()).enumerate() {
        for r in 0..m {
            c[r * cols + col] = p.a.get(r, idx) * s;
        }
    }
    for (jj, &i) in lin_set.iter().enumerate() {
        c[i * cols + k + jj] = sigma / eta * sign0(y[i]);
        c[m * cols + k + jj] = 1.0;
    }
    for r in 0..m {
        d[r] = p.b[r] + sigma * theta_q * eta / mu * y[r];
    }
    d[m] = (1.0 - theta_q).max(0.0);
    let sol = nnls(rows, cols, &c, &d);
    let mut x = vec![0.0; p.n()];
    for (col, (&idx, s)) in support.indices().iter().zip(support.signs()).enumerate() {
        x[idx] = s * sol[col];
    }
    let report = check_perspective_optimality(p, &x, y, alpha, mu, tol)?;
    if !report.certified {
        return Err(not_certified("perspective recovery", &report));
    }
    Ok(Recovered { x, report, support })
}

/// `z/ν`: rescales a solution of the Lagrange dual of the gauge dual.
pub fn recover_from_lagrange_dual(z: &[f64], nu: f64) -> Result<Vec<f64>> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::DegenerateDual(format!(
            "Lagrange dual value {nu} is not positive and finite"
        )));
    }
    Ok(z.iter().map(|v| v / nu).collect())
}

/// Exact solution of `min ‖x‖₁ s.t. ‖b − Ax‖₂ ≤ σ` with its dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct BpdnSolution {
    pub x: Vec<f64>,
    /// Gauge dual solution, scaled so `⟨b,y⟩ − σ‖y‖ = 1`.
    pub y: Vec<f64>,
    pub nu_p: f64,
    pub nu_d: f64,
    pub support: SupportSet,
    /// Lasso multiplier `‖Aᵀ(b − Ax)‖∞` at the solution.
    pub lambda: f64,
}

struct Restricted {
    x0: Vec<f64>,
    dir: Vec<f64>,
    r0_sq: f64,
    q: f64,
}

/// Least-squares solution `x0` on the support, `G⁻¹s` and `sᵀG⁻¹s`.
fn restricted_parts(a: &DenseMap, b: &[f64], support: &SupportSet) -> Option<Restricted> {
    let a_s = a.select_columns(support.indices());
    let k = support.len();
    let chol = Cholesky::new(k, &a_s.gram())?;
    let x0 = chol.solve(&a_s.apply_adjoint(b));
    let dir = chol.solve(&support.signs());
    let r0 = {
        let ax = a_s.apply(&x0);
        b.iter().zip(&ax).map(|(b, v)| b - v).collect::<Vec<_>>()
    };
    let q = dot(&support.signs(), &dir);
    (q > 0.0).then(|| Restricted {
        x0,
        dir,
        r0_sq: dot(&r0, &r0),
        q,
    })
}

fn finish_solution(p: &ProblemSpec, x: Vec<f64>, support: SupportSet) -> BpdnSolution {
    let r = p.residual(&x);
    let scale = 1.0 / (dot(&p.b, &r) - p.sigma * norm2(&r));
    let y: Vec<f64> = r.iter().map(|v| v * scale).collect();
    let lambda = norm_inf(&p.a.apply_adjoint(&r));
    let nu_d = lambda * scale;
    let nu_p = x.iter().map(|v| v.abs()).sum();
    BpdnSolution {
        x,
        y,
        nu_p,
        nu_d,
        support,
        lambda,
    }
}

/// Closed-form solution on a fixed signed support, or `None` when the support
/// cannot reach the constraint boundary or the signs come out wrong.
/// Optimality off the support is not checked here; `nu_p·nu_d = 1` tells.
pub fn bpdn_restricted_solution(p: &ProblemSpec, support: &SupportSet) -> Option<BpdnSolution> {
    if support.is_empty() || support.ambient_dimension() != p.n() {
        return None;
    }
    let parts = restricted_parts(&p.a, &p.b, support)?;
    let slack = p.sigma * p.sigma - parts.r0_sq;
    if slack < 0.0 {
        return None;
    }
    let lambda = sqrt(slack / parts.q);
    let mut x = vec![0.0; p.n()];
    for (k, &i) in support.indices().iter().enumerate() {
        x[i] = parts.x0[k] - lambda * parts.dir[k];
        if x[i] * support.sign(k) < 0.0 {
            return None;
        }
    }
    Some(finish_solution(p, x, support.clone()))
}

/// Exact BPDN solution by following the lasso path
/// `x(λ) = argmin ½‖b − Ax‖² + λ‖x‖₁` from `λ = ‖Aᵀb‖∞` down to the point
/// where `‖b − Ax(λ)‖ = σ`.
///
/// Along a segment with signed support `S`, `‖b − Ax(λ)‖² = ‖r₀‖² + λ²sᵀG⁻¹s`,
/// so the crossing is found in closed form. Fails with
/// [`Error::DegenerateDual`] when `‖b‖ ≤ σ` (the optimum is `x = 0` and the
/// dual is unbounded) or when no `x` meets the constraint.
pub fn solve_bpdn_exact(p: &ProblemSpec, tol: &ToleranceConfig) -> Result<BpdnSolution> {
    if !is_l1_l2(p) || p.sigma <= 0.0 {
        return Err(capability(
            "recovery",
            "exact solves need an l1 objective, l2 constraint and sigma > 0",
        ));
    }
    let (n, sigma) = (p.n(), p.sigma);
    if norm2(&p.b) <= sigma {
        return Err(Error::DegenerateDual(
            "||b|| <= sigma: x = 0 is optimal and the dual is unbounded".into(),
        ));
    }
    let atb = p.a.apply_adjoint(&p.b);
    let mut lambda = norm_inf(&atb);
    let first = (0..n)
        .max_by(|&i, &j| atb[i].abs().total_cmp(&atb[j].abs()))
        .unwrap_or(0);
    let mut active: Vec<(usize, f64)> = vec![(first, sign0(atb[first]))];
    let eps = 1e-12;
    for _ in 0..(20 * n + 100) {
        active.sort_by_key(|(i, _)| *i);
        let support = SupportSet::new(
            active.iter().map(|(i, _)| *i).collect(),
            active.iter().map(|(_, s)| *s).collect(),
            n,
        )?;
        let parts = restricted_parts(&p.a, &p.b, &support).ok_or_else(|| {
            Error::DegenerateDual("active columns became linearly dependent".into())
        })?;
        // on this segment x_S(λ) = x0 − λ·dir and c_j(λ) = c0_j + λ·e_j
        let a_s = p.a.select_columns(support.indices());
        let r0: Vec<f64> = {
            let ax = a_s.apply(&parts.x0);
            p.b.iter().zip(&ax).map(|(b, v)| b - v).collect()
        };
        let c0 = p.a.apply_adjoint(&r0);
        let e = p.a.apply_adjoint(&a_s.apply(&parts.dir));

        let mut next = 0.0_f64;
        let mut event: Option<(usize, bool, f64)> = None;
        for j in 0..n {
            if support.contains(j) {
                continue;
            }
            for s in [1.0, -1.0] {
                // c0_j + λ e_j = s λ  →  λ = c0_j / (s − e_j)
                let den = s - e[j];
                if den.abs() < eps {
                    continue;
                }
                let l = c0[j] / den;
                if l < lambda * (1.0 - 1e-12) && l > next {
                    next = l;
                    event = Some((j, true, s));
                }
            }
        }
        for (k, &i) in support.indices().iter().enumerate() {
            if parts.dir[k].abs() < eps {
                continue;
            }
            let l = parts.x0[k] / parts.dir[k];
            if l < lambda * (1.0 - 1e-12) && l > next {
                next = l;
                event = Some((i, false, 0.0));
            }
        }

        let slack = sigma * sigma - parts.r0_sq;
        if slack >= 0.0 {
            let cross = sqrt(slack / parts.q);
            if cross >= next {
                let mut x = vec![0.0; n];
                for (k, &i) in support.indices().iter().enumerate() {
                    x[i] = parts.x0[k] - cross * parts.dir[k];
                }
                let sol = finish_solution(p, x, support);
                let gap = (sol.nu_p * sol.nu_d - 1.0).abs();
                if gap > tol.opt_tol {
                    return Err(Error::NotCertified(format!(
                        "exact path solution has duality gap {gap:.3e}"
                    )));
                }
                return Ok(sol);
            }
        }
        match event {
            Some((j, true, s)) => active.push((j, s)),
            Some((j, false, _)) => active.retain(|(i, _)| *i != j),
            None => {
                return Err(Error::DegenerateDual(
                    "no x satisfies the constraint".into(),
                ))
            }
        }
        lambda = next;
        if active.is_empty() {
            return Err(Error::DegenerateDual(
                "lasso path emptied its support".into(),
            ));
        }
    }
    Err(Error::Diverged {
        iter: 20 * n + 100,
        reason: "lasso path did not reach the constraint".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauges::GaugeSpec;
    use crate::model::ProblemFn;
    use crate::perspective::PerspectiveFn;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn analytic() -> ProblemSpec {
        ProblemSpec::new(
            DenseMap::from_rows(&[&[1.0, 0.0]]).unwrap(),
            vec![1.0],
            0.5,
            ProblemFn::Gauge(GaugeSpec::l1(2)),
            ProblemFn::Gauge(GaugeSpec::l2(1)),
        )
        .unwrap()
    }

    fn random_bpdn(m: usize, n: usize, sigma: f64, seed: u64) -> ProblemSpec {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let a: Vec<f64> = (0..m * n)
            .map(|_| rng.random_range(-1.0..1.0) / sqrt(m as f64))
            .collect();
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        ProblemSpec::new(
            DenseMap::new(m, n, a).unwrap(),
            b,
            sigma,
            ProblemFn::Gauge(GaugeSpec::l1(n)),
            ProblemFn::Gauge(GaugeSpec::l2(m)),
        )
        .unwrap()
    }

    #[test]
    fn support_examples() {
        let s = active_support(&[2.0, -2.0, 0.5], 1e-6);
        assert_eq!(s.indices(), &[0, 1]);
        assert_eq!(s.signs(), vec![1.0, -1.0]);
        assert_eq!(
            active_support(&[1.0, 0.999999, 0.0], 1e-4).indices(),
            &[0, 1]
        );
        let s = active_support(&[3.0, 0.0], 1e-6);
        assert_eq!((s.indices(), s.signs()), (&[0usize][..], vec![1.0]));
        assert!(active_support(&[0.0, 0.0], 1e-6).is_empty());
        assert!(SupportSet::new(vec![1, 0], vec![1.0, 1.0], 2).is_err());
        assert!(SupportSet::new(vec![2], vec![1.0], 2).is_err());
    }

    #[test]
    fn least_squares_on_analytic_instance() {
        let p = analytic();
        let s = active_support(&p.a.apply_adjoint(&[2.0]), 1e-5);
        let r = recover_bpdn_least_squares(&p, &[2.0], &s, &ToleranceConfig::default()).unwrap();
        assert_abs_diff_eq!(r.x[0], 0.5, epsilon = 1e-9);
        assert_eq!(r.x[1], 0.0);
        assert!(recover_bpdn_least_squares(&p, &[0.0], &s, &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn wrong_dual_is_reported() {
        let p = analytic();
        match recover_primal_gauge(&p, &[3.0], &ToleranceConfig::default()) {
            Err(Error::NotCertified(_)) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_sigma_forces_zero_residual() {
        let p = ProblemSpec::new(
            DenseMap::from_rows(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]).unwrap(),
            vec![1.0, 2.0],
            0.0,
            ProblemFn::Gauge(GaugeSpec::l1(3)),
            ProblemFn::Gauge(GaugeSpec::l2(2)),
        )
        .unwrap();
        // x = (0, 1, 1) has ‖x‖₁ = 2; y = (0, 1/2) gives Aᵀy = (0, 1/2, 1/2)… scale so ⟨b,y⟩ = 1
        let y = [0.0, 0.5];
        let r = recover_primal_gauge(&p, &y, &ToleranceConfig::default()).unwrap();
        assert!(norm2(&p.residual(&r.x)) < 1e-8);
        assert_abs_diff_eq!(
            r.x.iter().map(|v| v.abs()).sum::<f64>(),
            2.0,
            epsilon = 1e-8
        );
    }

    #[test]
    fn exact_solver_matches_analytic_instance() {
        let sol = solve_bpdn_exact(&analytic(), &ToleranceConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.x[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.y[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.nu_p * sol.nu_d, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_solutions_certify_and_feed_recovery() {
        let tol = ToleranceConfig::default();
        for seed in 0..5 {
            let p = random_bpdn(8, 20, 0.1, seed);
            let sol = solve_bpdn_exact(&p, &tol).unwrap();
            let rep = check_gauge_optimality(&p, &sol.x, &sol.y, &tol).unwrap();
            assert!(rep.certified, "seed {seed}: {}", rep.summary());
            let rec = recover_primal_gauge(&p, &sol.y, &tol).unwrap();
            for (a, b) in rec.x.iter().zip(&sol.x) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-7);
            }
            // residual is σ·y/‖y‖
            let r = p.residual(&rec.x);
            assert_abs_diff_eq!(norm2(&r), p.sigma, epsilon = 1e-7);
            let again = bpdn_restricted_solution(&p, &sol.support).unwrap();
            assert_abs_diff_eq!(again.nu_p, sol.nu_p, epsilon = 1e-12);
        }
    }

    #[test]
    fn lagrange_rescaling() {
        assert_eq!(
            recover_from_lagrange_dual(&[1.0, 0.0], 2.0).unwrap(),
            vec![0.5, 0.0]
        );
        assert_eq!(
            recover_from_lagrange_dual(&[1.5, -2.0], 1.0).unwrap(),
            vec![1.5, -2.0]
        );
        let a = recover_from_lagrange_dual(&[3.0, 6.0], 4.0).unwrap();
        let b = recover_from_lagrange_dual(&[0.75, 1.5], 1.0).unwrap();
        assert_eq!(a, b);
        assert!(recover_from_lagrange_dual(&[1.0], 0.0).is_err());
        assert!(recover_from_lagrange_dual(&[1.0], -1.0).is_err());
    }

    #[test]
    fn perspective_recovery_quadratic_only() {
        // tiny residuals keep every entry in the quadratic region of the Huber
        // loss, so (b − Ax) = −(ση/μ)θ y with a single hull vertex
        let a = DenseMap::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]).unwrap();
        let x_true = [0.5, 0.0];
        let eta = 1.0;
        let sigma = 0.02;
        // residual direction r with ½‖r‖² = σ and Aᵀr ∝ (1, ≤1)
        let dir = [1.0, -1.0, 0.0];
        let scale = sqrt(2.0 * sigma / dot(&dir, &dir));
        let r: Vec<f64> = dir.iter().map(|d| d * scale).collect();
        let ax = a.apply(&x_true);
        let b: Vec<f64> = ax.iter().zip(&r).map(|(a, r)| a + r).collect();
        let p = ProblemSpec::new(
            a.clone(),
            b.clone(),
            sigma,
            ProblemFn::Gauge(GaugeSpec::l1(2)),
            ProblemFn::Convex(PerspectiveFn::huber_sum(eta, 3).unwrap()),
        )
        .unwrap();
        // y = c·r with μ from g♯ = −(η/2μ)‖y‖² = ‖y‖²/(2ησ)·… solved below
        // c and μ from: ⟨b,y⟩ − σg♯ − 1 + μ = 0 and the quadratic weight being one
        // θ = 2μ²/(σηc²‖r‖²) = 1 → μ = −c‖r‖√(ση/2); then dual activity fixes c
        let nr = norm2(&r);
        let k = nr * sqrt(sigma * eta / 2.0);
        let gs_per_c = eta * nr * nr / (2.0 * k); // g♯(cr, −ck) = c·gs_per_c
        let c = 1.0 / (dot(&b, &r) - sigma * gs_per_c - k);
        let y: Vec<f64> = r.iter().map(|v| v * c).collect();
        let mu = -c * k;
        let rec = recover_primal_perspective(&p, &y, 0.0, mu, &ToleranceConfig::default()).unwrap();
        assert_abs_diff_eq!(rec.x[0], 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(rec.x[1], 0.0, epsilon = 1e-7);
        assert!(recover_primal_perspective(&p, &y, 0.0, 0.0, &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn perspective_recovery_rejects_inactive_quadratic() {
        let p = ProblemSpec::new(
            DenseMap::identity(2),
            vec![3.0, 0.0],
            0.5,
            ProblemFn::Gauge(GaugeSpec::l1(2)),
            ProblemFn::Convex(PerspectiveFn::huber_sum(1.0, 2).unwrap()),
        )
        .unwrap();
        // μ very negative makes the quadratic piece tiny against ‖y‖∞/η
        match recover_primal_perspective(&p, &[1.0, 0.0], 0.0, -100.0, &ToleranceConfig::default())
        {
            Err(Error::NotCertified(msg)) => assert!(msg.contains("not optimal")),
            other => panic!("{other:?}"),
        }
    }
}
