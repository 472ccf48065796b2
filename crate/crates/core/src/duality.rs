//! Gauge and perspective duals of a [`ProblemSpec`], optimality certificates,
//! value bookkeeping and the finite-difference sensitivity hook.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{capability, check_dim, Error, Result};
use crate::gauges::{gauge_product, GaugeKind, GaugeSpec};
use crate::linalg::{dot, sqrt};
use crate::model::{DenseMap, ProblemSpec, ToleranceConfig};
use crate::perspective::{PerspectiveFn, PerspectiveKind};
use crate::recovery::{bpdn_restricted_solution, solve_bpdn_exact};

/// Gauge dual `min κ°(Aᵀy) s.t. ⟨b,y⟩ − σρ°(y) ≥ 1`.
///
/// With a zero `sigma` in the primal, `(ρ, σ)` is replaced by the indicator of
/// the zero set of `ρ` with unit weight, so `rho_polar` becomes the indicator
/// of `cl dom ρ°`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeDualSpec {
    pub a: DenseMap,
    pub b: Vec<f64>,
    pub sigma: f64,
    pub kappa: GaugeSpec,
    pub rho: GaugeSpec,
    pub kappa_polar: GaugeSpec,
    pub rho_polar: GaugeSpec,
}

impl GaugeDualSpec {
    /// `κ°(Aᵀy)`.
    pub fn objective(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.b.len(), y.len())?;
        self.kappa_polar.eval(&self.a.apply_adjoint(y))
    }

    /// `⟨b,y⟩ − σρ°(y)`; feasible points have value at least 1.
    pub fn constraint_value(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.b.len(), y.len())?;
        let r = self.rho_polar.eval(y)?;
        Ok(dot(&self.b, y) - if r == 0.0 { 0.0 } else { self.sigma * r })
    }

    pub fn is_feasible(&self, y: &[f64], feas_tol: f64) -> Result<bool> {
        Ok(self.constraint_value(y)? >= 1.0 - feas_tol)
    }
}

pub fn build_gauge_dual(p: &ProblemSpec) -> Result<GaugeDualSpec> {
    let (Some(kappa), Some(rho)) = (p.objective.as_gauge(), p.constraint.as_gauge()) else {
        return Err(capability(
            "duality",
            "gauge dual needs gauge objective and constraint; use the perspective dual",
        ));
    };
    let (rho, sigma) = if p.sigma > 0.0 {
        (rho.clone(), p.sigma)
    } else {
        (rho.zero_set_indicator(), 1.0)
    };
    Ok(GaugeDualSpec {
        a: p.a.clone(),
        b: p.b.clone(),
        sigma,
        kappa_polar: kappa.polar(),
        rho_polar: rho.polar(),
        kappa: kappa.clone(),
        rho,
    })
}

/// Shape of the constraint of a perspective dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualConstraintForm {
    /// `⟨b,y⟩ − σ g♯(y,μ) ≥ 1 − (α + μ)` with a closed-form `g♯`.
    Sharp,
    /// `⟨b,y⟩ − σξ = 1 − (α + μ)`, `g*^π(y, ξ) ≤ −μ`, `ξ ≥ 0`, used when `g♯`
    /// has no closed form but `g*` does.
    ConjugatePerspective,
}

/// Perspective dual in the variables `(y, α, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveDualSpec {
    pub a: DenseMap,
    pub b: Vec<f64>,
    pub sigma: f64,
    pub objective: PerspectiveFn,
    pub constraint: PerspectiveFn,
    /// When the objective is a gauge, `α ≤ 0` at optimality and the objective
    /// is `f°(Aᵀy)` alone.
    pub objective_is_gauge: bool,
    pub form: DualConstraintForm,
}

impl PerspectiveDualSpec {
    /// `f♯(Aᵀy, α)`.
    pub fn objective_value(&self, y: &[f64], alpha: f64) -> Result<f64> {
        check_dim(self.b.len(), y.len())?;
        let aty = self.a.apply_adjoint(y);
        if self.objective_is_gauge {
            if alpha > 0.0 {
                return Ok(f64::INFINITY);
            }
            return self
                .objective
                .as_gauge()
                .expect("gauge objective")
                .polar_eval(&aty);
        }
        self.objective.perspective_polar_eval(&aty, alpha)
    }

    /// `g♯(y, μ)`.
    pub fn constraint_sharp(&self, y: &[f64], mu: f64) -> Result<f64> {
        self.constraint.perspective_polar_eval(y, mu)
    }

    /// `⟨b,y⟩ − σg♯(y,μ) − 1 + α + μ`; feasible points have nonnegative slack.
    pub fn constraint_slack(&self, y: &[f64], alpha: f64, mu: f64) -> Result<f64> {
        check_dim(self.b.len(), y.len())?;
        let gs = self.constraint_sharp(y, mu)?;
        let pen = if gs == 0.0 { 0.0 } else { self.sigma * gs };
        Ok(dot(&self.b, y) - pen - 1.0 + alpha + mu)
    }

    /// Slack of the `ξ`-form: with `μ = 1 − α − ⟨b,y⟩ + σξ` this is
    /// `−μ − g*^π(y, ξ)`, nonnegative exactly on feasible points. Negative `ξ`
    /// gives `−∞`.
    pub fn xi_form_slack(&self, y: &[f64], alpha: f64, xi: f64) -> Result<f64> {
        check_dim(self.b.len(), y.len())?;
        if xi < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let mu = 1.0 - alpha - dot(&self.b, y) + self.sigma * xi;
        Ok(-mu - self.constraint.conjugate_perspective_eval(y, xi)?)
    }

    pub fn is_feasible(&self, y: &[f64], alpha: f64, mu: f64, feas_tol: f64) -> Result<bool> {
        if self.objective_is_gauge && alpha > 0.0 {
            return Ok(false);
        }
        Ok(self.constraint_slack(y, alpha, mu)? >= -feas_tol)
    }
}

fn has_closed_sharp(f: &PerspectiveFn) -> bool {
    match f.kind() {
        PerspectiveKind::Bregman { .. } => false,
        PerspectiveKind::SeparableSum(parts) => parts.iter().all(|p| p.as_gauge().is_some()),
        _ => true,
    }
}

pub fn build_perspective_dual(p: &ProblemSpec) -> Result<PerspectiveDualSpec> {
    let objective = p.objective.to_perspective();
    let constraint = p.constraint.to_perspective();
    if !constraint.has_closed_form_conjugate() {
        return Err(capability(
            "duality",
            "constraint has neither a closed-form polar nor a conjugate",
        ));
    }
    let form = if has_closed_sharp(&constraint) {
        DualConstraintForm::Sharp
    } else {
        DualConstraintForm::ConjugatePerspective
    };
    Ok(PerspectiveDualSpec {
        a: p.a.clone(),
        b: p.b.clone(),
        sigma: p.sigma,
        objective_is_gauge: objective.as_gauge().is_some(),
        objective,
        constraint,
        form,
    })
}

/// Residuals of the four alignment conditions and the resulting verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityReport {
    pub primal_activity_residual: f64,
    pub dual_activity_residual: f64,
    pub objective_alignment_residual: f64,
    pub constraint_alignment_residual: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub certified: bool,
    /// `κ(x)·κ°(Aᵀy)`, or `f(x)·f♯(Aᵀy, α)` for perspective pairs.
    pub duality_product: f64,
}

impl OptimalityReport {
    pub fn max_residual(&self) -> f64 {
        self.primal_activity_residual
            .max(self.dual_activity_residual)
            .max(self.objective_alignment_residual)
            .max(self.constraint_alignment_residual)
    }

    fn finish(mut self, tol: &ToleranceConfig) -> Self {
        let max = self.max_residual();
        self.certified =
            self.primal_feasible && self.dual_feasible && max.is_finite() && max <= tol.opt_tol;
        self
    }

    pub fn summary(&self) -> String {
        format!(
            "primal activity {:.3e}, dual activity {:.3e}, objective alignment {:.3e}, constraint alignment {:.3e}, \
             primal feasible {}, dual feasible {}",
            self.primal_activity_residual,
            self.dual_activity_residual,
            self.objective_alignment_residual,
            self.constraint_alignment_residual,
            self.primal_feasible,
            self.dual_feasible
        )
    }
}

fn abs_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v.abs()
    }
}

/// Residuals of the gauge optimality conditions for the pair `(x, y)`.
pub fn check_gauge_optimality(
    p: &ProblemSpec,
    x: &[f64],
    y: &[f64],
    tol: &ToleranceConfig,
) -> Result<OptimalityReport> {
    check_dim(p.n(), x.len())?;
    check_dim(p.m(), y.len())?;
    let dual = build_gauge_dual(p)?;
    let r = p.residual(x);
    let rho_r = dual.rho.eval(&r)?;
    let rho_pol_y = dual.rho_polar.eval(y)?;
    let kx = dual.kappa.eval(x)?;
    let aty = p.a.apply_adjoint(y);
    let kpol = dual.kappa_polar.eval(&aty)?;
    let sigma_term = if rho_pol_y == 0.0 {
        0.0
    } else {
        dual.sigma * rho_pol_y
    };
    let product = gauge_product(kx, kpol);
    let report = OptimalityReport {
        primal_activity_residual: abs_or_inf(rho_r - dual.sigma).min(rho_pol_y),
        dual_activity_residual: abs_or_inf(dot(&p.b, y) - sigma_term - 1.0),
        objective_alignment_residual: abs_or_inf(dot(x, &aty) - product),
        constraint_alignment_residual: abs_or_inf(dot(&r, y) - sigma_term),
        primal_feasible: rho_r <= dual.sigma + tol.feas_tol * (1.0 + dual.sigma),
        dual_feasible: kpol.is_finite() && dual.constraint_value(y)? >= 1.0 - tol.feas_tol,
        certified: false,
        duality_product: product,
    };
    Ok(report.finish(tol))
}

/// Residuals of the perspective optimality conditions for `(x, y, α, μ)`.
pub fn check_perspective_optimality(
    p: &ProblemSpec,
    x: &[f64],
    y: &[f64],
    alpha: f64,
    mu: f64,
    tol: &ToleranceConfig,
) -> Result<OptimalityReport> {
    check_dim(p.n(), x.len())?;
    check_dim(p.m(), y.len())?;
    let dual = build_perspective_dual(p)?;
    let r = p.residual(x);
    let g_r = dual.constraint.eval(&r)?;
    let g_sharp = dual.constraint_sharp(y, mu)?;
    let fx = dual.objective.eval(x)?;
    let f_sharp = dual.objective_value(y, alpha)?;
    let aty = p.a.apply_adjoint(y);
    let sigma_term = if g_sharp == 0.0 {
        0.0
    } else {
        p.sigma * g_sharp
    };
    let product = gauge_product(fx, f_sharp);
    let report = OptimalityReport {
        primal_activity_residual: abs_or_inf(g_r - p.sigma).min(g_sharp),
        dual_activity_residual: abs_or_inf(dot(&p.b, y) - sigma_term - 1.0 + alpha + mu),
        objective_alignment_residual: abs_or_inf(dot(x, &aty) + alpha - product),
        constraint_alignment_residual: abs_or_inf(dot(&r, y) + mu - gauge_product(g_r, g_sharp)),
        primal_feasible: g_r <= p.sigma + tol.feas_tol * (1.0 + p.sigma),
        dual_feasible: f_sharp.is_finite() && dual.is_feasible(y, alpha, mu, tol.feas_tol)?,
        certified: false,
        duality_product: product,
    };
    Ok(report.finish(tol))
}

/// An optimal value with the degenerate cases kept apart from finite ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueStatus {
    Finite(f64),
    Zero,
    Infinite,
}

impl From<f64> for ValueStatus {
    fn from(v: f64) -> Self {
        if v == 0.0 {
            Self::Zero
        } else if v.is_infinite() {
            Self::Infinite
        } else {
            Self::Finite(v)
        }
    }
}

/// Outcome of combining a primal and a dual value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualityProduct {
    Product(f64),
    PrimalInfeasible,
    DualInfeasible,
    Undetermined,
}

impl DualityProduct {
    /// Weak duality `ν_p·ν_d ≥ 1 − 10·opt_tol`; degenerate outcomes pass.
    pub fn satisfies_weak_duality(&self, opt_tol: f64) -> bool {
        match self {
            Self::Product(v) => *v >= 1.0 - 10.0 * opt_tol,
            _ => true,
        }
    }
}

/// `ν_p·ν_d`, or the infeasibility signal implied by `1/ν_p ≤ ν_d`.
pub fn duality_gap_product(nu_p: f64, nu_d: f64) -> DualityProduct {
    match (ValueStatus::from(nu_p), ValueStatus::from(nu_d)) {
        (ValueStatus::Finite(a), ValueStatus::Finite(b)) => DualityProduct::Product(a * b),
        (ValueStatus::Infinite, ValueStatus::Infinite) | (ValueStatus::Zero, ValueStatus::Zero) => {
            DualityProduct::Undetermined
        }
        (ValueStatus::Infinite, _) | (_, ValueStatus::Zero) => DualityProduct::PrimalInfeasible,
        (_, ValueStatus::Infinite) | (ValueStatus::Zero, _) => DualityProduct::DualInfeasible,
    }
}

fn require_bpdn(p: &ProblemSpec) -> Result<()> {
    let ok = matches!(
        p.objective.as_gauge().map(GaugeSpec::kind),
        Some(GaugeKind::L1)
    ) && matches!(
        p.constraint.as_gauge().map(GaugeSpec::kind),
        Some(GaugeKind::L2)
    ) && p.sigma > 0.0;
    if ok {
        Ok(())
    } else {
        Err(capability(
            "duality",
            "perturbed values are available for l1 objective, l2 constraint and sigma > 0",
        ))
    }
}

/// Perturbed primal value `v_p(t·u) = inf{μ : ρ(b − Ax + μtu) ≤ σ, κ(x) ≤ μ}`.
///
/// The value is the fixed point of `μ ↦ ν_p(b + μtu)`. Each `ν_p` comes from
/// the exact solution restricted to the support of the unperturbed problem,
/// re-solved from scratch whenever its certificate breaks. Returns `+∞` when
/// the perturbed problem is infeasible.
pub fn perturbed_primal_value(
    p: &ProblemSpec,
    u: &[f64],
    t: f64,
    tol: &ToleranceConfig,
) -> Result<f64> {
    check_dim(p.m(), u.len())?;
    require_bpdn(p)?;
    let base = solve_bpdn_exact(p, tol)?;
    if t == 0.0 {
        return Ok(base.nu_p);
    }
    let support = base.support.clone();
    let value_at = |mu: f64| -> Result<f64> {
        let b: Vec<f64> = p.b.iter().zip(u).map(|(b, u)| b + mu * t * u).collect();
        let q = ProblemSpec::new(
            p.a.clone(),
            b,
            p.sigma,
            p.objective.clone(),
            p.constraint.clone(),
        )?;
        if let Some(sol) = bpdn_restricted_solution(&q, &support) {
            if (sol.nu_p * sol.nu_d - 1.0).abs() <= 1e-10 {
                return Ok(sol.nu_p);
            }
        }
        match solve_bpdn_exact(&q, tol) {
            Ok(sol) => Ok(sol.nu_p),
            Err(Error::DegenerateDual(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut mu = base.nu_p;
    for _ in 0..200 {
        let next = value_at(mu)?;
        if !next.is_finite() {
            return Ok(f64::INFINITY);
        }
        if (next - mu).abs() <= 1e-15 * (1.0 + mu.abs()) {
            return Ok(next);
        }
        mu = next;
    }
    Err(Error::Diverged {
        iter: 200,
        reason: "perturbed value fixed point did not settle".into(),
    })
}

/// A dual point with constraint slack at least `10·feas_tol`: a scaled
/// subgradient of `ρ` at `b`, which exists whenever `ρ(b) > σ`.
pub fn find_strictly_feasible_dual(
    p: &ProblemSpec,
    tol: &ToleranceConfig,
) -> Result<Option<Vec<f64>>> {
    let dual = build_gauge_dual(p)?;
    let rb = dual.rho.eval(&p.b)?;
    if !(rb > dual.sigma) || !rb.is_finite() {
        return Ok(None);
    }
    let g = match dual.rho.subgradient(&p.b) {
        Ok(g) => g,
        Err(Error::OutsideDomain(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let t = 2.0 / (rb - dual.sigma);
    let y: Vec<f64> = g.iter().map(|v| t * v).collect();
    let slack = dual.constraint_value(&y)? - 1.0;
    Ok((slack >= 10.0 * tol.feas_tol).then_some(y))
}

/// A primal point with constraint slack at least `10·feas_tol`: the
/// minimum-norm solution of `Ax = b`, found by conjugate gradients on `AAᵀ`.
pub fn find_strictly_feasible_primal(
    p: &ProblemSpec,
    tol: &ToleranceConfig,
) -> Result<Option<Vec<f64>>> {
    let m = p.m();
    let mut w = vec![0.0; m];
    let mut r = p.b.clone();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let bn = sqrt(rr);
    for _ in 0..(10 * m + 50) {
        if sqrt(rr) <= 1e-14 * (1.0 + bn) {
            break;
        }
        let ad = p.a.apply(&p.a.apply_adjoint(&d));
        let den = dot(&d, &ad);
        if den <= 0.0 {
            break;
        }
        let alpha = rr / den;
        for i in 0..m {
            w[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..m {
            d[i] = r[i] + beta * d[i];
        }
    }
    let x = p.a.apply_adjoint(&w);
    let g = p.constraint.eval(&p.residual(&x))?;
    Ok((g <= p.sigma - 10.0 * tol.feas_tol && p.objective.eval(&x)?.is_finite()).then_some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemFn;
    use approx::assert_abs_diff_eq;

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

    #[test]
    fn gauge_dual_of_bpdn() {
        let d = build_gauge_dual(&analytic()).unwrap();
        assert_eq!(d.kappa_polar.kind(), &GaugeKind::LInf);
        assert_eq!(d.rho_polar.kind(), &GaugeKind::L2);
        assert_eq!(d.constraint_value(&[2.0]).unwrap(), 1.0);
        assert_eq!(d.objective(&[2.0]).unwrap(), 2.0);
        assert!(!d.is_feasible(&[1.9], 1e-8).unwrap());
    }

    #[test]
    fn zero_sigma_gives_halfspace_dual() {
        let mut p = analytic();
        p.sigma = 0.0;
        let d = build_gauge_dual(&p).unwrap();
        assert_eq!(d.sigma, 1.0);
        // cl dom of the polar of a norm is the whole space
        assert_eq!(d.constraint_value(&[1.0]).unwrap(), 1.0);
        assert_eq!(d.constraint_value(&[-3.0]).unwrap(), -3.0);
    }

    #[test]
    fn analytic_pair_certifies() {
        let tol = ToleranceConfig::default();
        let rep = check_gauge_optimality(&analytic(), &[0.5, 0.0], &[2.0], &tol).unwrap();
        assert!(rep.certified, "{}", rep.summary());
        assert_eq!(rep.max_residual(), 0.0);
        assert_eq!(rep.duality_product, 1.0);
        let rep = check_gauge_optimality(&analytic(), &[0.0, 0.0], &[2.0], &tol).unwrap();
        assert!(!rep.certified && !rep.primal_feasible);
        let rep =
            check_gauge_optimality(&analytic(), &[0.5, 0.0], &[2.0 + 10.0 * tol.opt_tol], &tol)
                .unwrap();
        assert!(rep.dual_activity_residual > tol.opt_tol);
        assert!(!rep.certified);
    }

    #[test]
    fn perspective_check_reduces_to_gauge_check() {
        let tol = ToleranceConfig::default();
        let p = analytic();
        let g = check_gauge_optimality(&p, &[0.5, 0.0], &[2.0], &tol).unwrap();
        let q = check_perspective_optimality(&p, &[0.5, 0.0], &[2.0], 0.0, 0.0, &tol).unwrap();
        assert_eq!(g, q);
    }

    #[test]
    fn duality_products() {
        assert_eq!(duality_gap_product(0.5, 2.0), DualityProduct::Product(1.0));
        assert_eq!(
            duality_gap_product(f64::INFINITY, 2.0),
            DualityProduct::PrimalInfeasible
        );
        assert_eq!(
            duality_gap_product(0.0, 2.0),
            DualityProduct::DualInfeasible
        );
        assert!(!DualityProduct::Product(0.99).satisfies_weak_duality(1e-6));
    }

    #[test]
    fn gaussian_bregman_constraint_form() {
        use crate::perspective::BregmanFamily;
        let anchor = vec![0.4, -1.0];
        let sigma = 0.3;
        // the misfit is g(Ax) = g(0 − (−A)x), so b is zero and A changes sign
        let p = ProblemSpec::new(
            DenseMap::from_rows(&[&[-1.0, 0.0, 2.0], &[0.0, -1.0, 1.0]]).unwrap(),
            vec![0.0, 0.0],
            sigma,
            ProblemFn::Gauge(GaugeSpec::l1(3)),
            ProblemFn::Convex(
                PerspectiveFn::bregman(BregmanFamily::Gaussian, anchor.clone()).unwrap(),
            ),
        )
        .unwrap();
        let d = build_perspective_dual(&p).unwrap();
        assert_eq!(d.form, DualConstraintForm::ConjugatePerspective);
        for (y, xi) in [([0.3, -2.0], 0.5), ([-1.0, 1.0], 2.0), ([0.0, 0.1], 0.01)] {
            let expect = -(dot(&y, &y) / (2.0 * xi) + dot(&anchor, &y) + 1.0 + sigma * xi);
            assert_abs_diff_eq!(
                d.xi_form_slack(&y, 0.0, xi).unwrap(),
                expect,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn perturbed_value_on_analytic_instance() {
        // |1 − x + μt| ≤ 1/2 with |x| = μ gives μ = 1/(2(1 − t))
        let tol = ToleranceConfig::default();
        let p = analytic();
        assert_abs_diff_eq!(
            perturbed_primal_value(&p, &[1.0], 0.0, &tol).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        for t in [1e-3, -0.2, 0.3] {
            let v = perturbed_primal_value(&p, &[1.0], t, &tol).unwrap();
            assert_abs_diff_eq!(v, 0.5 / (1.0 - t), epsilon = 1e-12);
        }
        // p(t) = −1/v_p(t) has slope y* = 2
        let h = 1e-4;
        let fd = (-1.0 / perturbed_primal_value(&p, &[1.0], h, &tol).unwrap()
            + 1.0 / perturbed_primal_value(&p, &[1.0], -h, &tol).unwrap())
            / (2.0 * h);
        assert_abs_diff_eq!(fd, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn perspective_dual_reduces_to_gauge_dual() {
        let p = analytic();
        let g = build_gauge_dual(&p).unwrap();
        let n = build_perspective_dual(&p).unwrap();
        for y in [-3.0, -0.5, 0.0, 0.7, 2.0, 5.5] {
            assert_eq!(
                g.objective(&[y]).unwrap(),
                n.objective_value(&[y], 0.0).unwrap()
            );
            assert_eq!(
                g.constraint_value(&[y]).unwrap() - 1.0,
                n.constraint_slack(&[y], 0.0, 0.0).unwrap()
            );
        }
    }

    #[test]
    fn strict_feasibility_helpers() {
        let tol = ToleranceConfig::default();
        let p = analytic();
        let y = find_strictly_feasible_dual(&p, &tol).unwrap().unwrap();
        assert!(
            build_gauge_dual(&p).unwrap().constraint_value(&y).unwrap()
                >= 1.0 + 10.0 * tol.feas_tol
        );
        let x = find_strictly_feasible_primal(&p, &tol).unwrap().unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        let mut q = p.clone();
        q.sigma = 2.0;
        assert!(find_strictly_feasible_dual(&q, &tol).unwrap().is_none());
    }
}
