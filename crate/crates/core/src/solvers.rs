//! Chambolle–Pock primal-dual iteration and the projection/prox toolbox it
//! runs on.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::duality::build_gauge_dual;
use crate::error::{capability, check_dim, Error, Result};
use crate::gauges::GaugeSpec;
use crate::linalg::{dot, norm2, sqrt, sub, Cholesky};
use crate::model::{DenseMap, ProblemFn, ProblemSpec, ToleranceConfig};
use crate::perspective::PerspectiveKind;
use crate::perspective::{huber, huber_derivative};
use crate::plq::PerspectiveDualFeasibleSet;
use crate::plq::PlqSpec;
use crate::recovery::recover_from_lagrange_dual;
use crate::recovery::SupportSet;

/// A linear map `K: ℝ^cols → ℝ^rows` with its adjoint.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply_into(&self, x: &[f64], out: &mut [f64]);
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]);
    /// An upper estimate of the operator norm.
    fn norm(&self) -> f64;
}

impl LinearOperator for DenseMap {
    fn rows(&self) -> usize {
        DenseMap::rows(self)
    }
    fn cols(&self) -> usize {
        DenseMap::cols(self)
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        DenseMap::apply_into(self, x, out)
    }
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        self.apply_adjoint_into(y, out)
    }
    fn norm(&self) -> f64 {
        DenseMap::norm(self)
    }
}

/// `v ↦ Aᵀ v[..m]` on `ℝ^{m + extra}`: the dual variable `y` is followed by
/// `extra` scalar variables that the objective ignores.
#[derive(Debug, Clone, Copy)]
pub struct AdjointLift<'a> {
    pub a: &'a DenseMap,
    pub extra: usize,
}

impl LinearOperator for AdjointLift<'_> {
    fn rows(&self) -> usize {
        self.a.cols()
    }
    fn cols(&self) -> usize {
        self.a.rows() + self.extra
    }
    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        self.a.apply_adjoint_into(&v[..self.a.rows()], out)
    }
    fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        let m = self.a.rows();
        self.a.apply_into(p, &mut out[..m]);
        out[m..].iter_mut().for_each(|v| *v = 0.0);
    }
    fn norm(&self) -> f64 {
        self.a.norm()
    }
}

/// Step sizes and stopping rule of the primal-dual iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpConfig {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub max_iters: usize,
    pub stop_tol: f64,
    /// Monitor cadence in iterations; 0 disables the monitor.
    pub trace_every: usize,
}

impl CpConfig {
    /// Symmetric steps `0.99/‖K‖` on both sides.
    pub fn for_norm(op_norm: f64, max_iters: usize, stop_tol: f64) -> Self {
        let s = if op_norm > 0.0 { 0.99 / op_norm } else { 1.0 };
        Self {
            alpha_x: s,
            alpha_y: s,
            max_iters,
            stop_tol,
            trace_every: 0,
        }
    }

    pub fn validate(&self, op_norm: f64) -> Result<()> {
        if !(self.alpha_x > 0.0 && self.alpha_y > 0.0) {
            return Err(Error::InvalidParameter(
                "step sizes must be positive".into(),
            ));
        }
        if self.alpha_x * self.alpha_y * op_norm * op_norm >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "step sizes violate alpha_x * alpha_y * |K|^2 < 1 ({} * {} * {}^2)",
                self.alpha_x, self.alpha_y, op_norm
            )));
        }
        Ok(())
    }
}

/// One row of a solver trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub obj_dev: f64,
    pub infeas: f64,
    pub false_zeros: usize,
    pub false_nonzeros: usize,
    pub wall_ms: f64,
}

/// Per-iteration metrics with strictly increasing iteration numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: TraceRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if r.iter <= last.iter {
                return Err(Error::InvalidParameter(format!(
                    "trace iterations must increase: {} after {}",
                    r.iter, last.iter
                )));
            }
        }
        self.records.push(r);
        Ok(())
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Final state of a primal-dual run.
#[derive(Debug, Clone, PartialEq)]
pub struct CpOutcome {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: f64,
}

/// Chambolle–Pock on `min_x f(Kx) + g(x)`:
///
/// ```text
/// y ← prox_{α_y f*}(y + α_y K(2x − x_prev))
/// x ← prox_{α_x g}(x − α_x Kᵀ y)
/// ```
///
/// `prox_f_star(v, α)` and `prox_g(v, α)` overwrite `v` with the prox at `v`.
/// Starts from the given points with `x_prev = x`. Stops after `max_iters` or
/// once the change in `(x, y)` is at most `stop_tol·(1 + ‖x‖)`. The monitor
/// sees `(iter, x, y)` every `trace_every` iterations and at the end.
pub fn cp_solve<K, PF, PG, M>(
    k: &K,
    mut prox_f_star: PF,
    mut prox_g: PG,
    x0: Vec<f64>,
    y0: Vec<f64>,
    cfg: &CpConfig,
    mut monitor: M,
) -> Result<CpOutcome>
where
    K: LinearOperator + ?Sized,
    PF: FnMut(&mut [f64], f64) -> Result<()>,
    PG: FnMut(&mut [f64], f64) -> Result<()>,
    M: FnMut(usize, &[f64], &[f64]),
{
    cfg.validate(k.norm())?;
    check_dim(k.cols(), x0.len())?;
    check_dim(k.rows(), y0.len())?;
    let mut x = x0;
    let mut y = y0;
    let mut x_prev = x.clone();
    let mut xbar = vec![0.0; x.len()];
    let mut kx = vec![0.0; y.len()];
    let mut kty = vec![0.0; x.len()];
    let mut y_new = vec![0.0; y.len()];
    let mut x_new = vec![0.0; x.len()];
    let mut last_change = f64::INFINITY;
    let mut iter = 0;
    let mut converged = false;
    while iter < cfg.max_iters {
        iter += 1;
        for i in 0..x.len() {
            xbar[i] = 2.0 * x[i] - x_prev[i];
        }
        k.apply_into(&xbar, &mut kx);
        for i in 0..y.len() {
            y_new[i] = y[i] + cfg.alpha_y * kx[i];
        }
        prox_f_star(&mut y_new, cfg.alpha_y)?;
        k.adjoint_into(&y_new, &mut kty);
        for i in 0..x.len() {
            x_new[i] = x[i] - cfg.alpha_x * kty[i];
        }
        prox_g(&mut x_new, cfg.alpha_x)?;

        let mut change2 = 0.0;
        for i in 0..x.len() {
            let d = x_new[i] - x[i];
            change2 += d * d;
        }
        for i in 0..y.len() {
            let d = y_new[i] - y[i];
            change2 += d * d;
        }
        last_change = sqrt(change2);
        if !last_change.is_finite() || x_new.iter().chain(&y_new).any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iter,
                reason: "non-finite iterate".into(),
            });
        }
        core::mem::swap(&mut x_prev, &mut x);
        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut y, &mut y_new);

        if last_change <= cfg.stop_tol * (1.0 + norm2(&x)) {
            converged = true;
            break;
        }
        if cfg.trace_every > 0 && iter % cfg.trace_every == 0 {
            monitor(iter, &x, &y);
        }
    }
    if cfg.trace_every > 0 && (converged || iter % cfg.trace_every != 0) {
        monitor(iter, &x, &y);
    }
    Ok(CpOutcome {
        x,
        y,
        iterations: iter,
        converged,
        last_change,
    })
}

/// `prox_{α f*}(x) = x − α Π(x/α)` when `f` is the indicator of the set that
/// `project` projects onto.
pub fn prox_conjugate_of_indicator<P>(project: P, alpha: f64, x: &[f64]) -> Result<Vec<f64>>
where
    P: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let scaled: Vec<f64> = x.iter().map(|v| v / alpha).collect();
    let p = project(&scaled)?;
    Ok(x.iter().zip(&p).map(|(a, b)| a - alpha * b).collect())
}

/// `prox_{α κ}(y) = y − Π_{α·U°}(y)`, where `U°` is the unit ball of the polar
/// gauge.
pub fn prox_gauge(g: &GaugeSpec, alpha: f64, y: &[f64]) -> Result<Vec<f64>> {
    let p = g.polar().project_level_set(y, alpha)?;
    Ok(sub(y, &p))
}

/// Projection onto the ℓ∞ ball of the given radius.
pub fn project_linf_ball(x: &[f64], radius: f64) -> Vec<f64> {
    x.iter().map(|v| v.clamp(-radius, radius)).collect()
}

pub use crate::gauges::project_l1_ball;

/// Scalar `prox_{λ h_η}(w)`.
#[inline]
pub fn huber_prox(w: f64, lambda: f64, eta: f64) -> f64 {
    if w.abs() <= eta * (eta + lambda) {
        w * eta / (eta + lambda)
    } else {
        w - lambda * eta * w.signum()
    }
}

/// Projection onto `{r : Σ h_η(b − r) ≤ σ}` with its multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct HuberProjection {
    pub point: Vec<f64>,
    pub multiplier: f64,
}

/// Euclidean projection of `z` onto `{r : Σ_i h_η(b_i − r_i) ≤ σ}`.
///
/// With `t = b − r` the KKT conditions give `t = prox_{λh}(b − z)` for a
/// multiplier `λ ≥ 0` found by bisection on the constraint value, which is
/// nonincreasing in `λ`. The returned point is always feasible.
pub fn project_huber_level_set(
    b: &[f64],
    sigma: f64,
    eta: f64,
    z: &[f64],
    bisect_tol: f64,
) -> Result<HuberProjection> {
    check_dim(b.len(), z.len())?;
    if !(sigma > 0.0) || !(eta > 0.0) {
        return Err(Error::InvalidParameter(
            "sigma and eta must be positive".into(),
        ));
    }
    let t0: Vec<f64> = b.iter().zip(z).map(|(b, z)| b - z).collect();
    let value = |lam: f64| -> f64 {
        t0.iter()
            .map(|w| huber(huber_prox(*w, lam, eta), eta))
            .sum()
    };
    if value(0.0) <= sigma {
        return Ok(HuberProjection {
            point: z.to_vec(),
            multiplier: 0.0,
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while value(hi) > sigma {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Diverged {
                iter: 0,
                reason: "huber projection multiplier search".into(),
            });
        }
    }
    for _ in 0..300 {
        if sigma - value(hi) <= bisect_tol || hi - lo <= 1e-16 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if value(mid) > sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let point = b
        .iter()
        .zip(&t0)
        .map(|(b, w)| b - huber_prox(*w, hi, eta))
        .collect();
    Ok(HuberProjection {
        point,
        multiplier: hi,
    })
}

/// KKT residual of a Huber projection: stationarity and complementary
/// slackness, each as a maximum absolute value.
pub fn huber_projection_kkt(
    b: &[f64],
    sigma: f64,
    eta: f64,
    z: &[f64],
    p: &HuberProjection,
) -> (f64, f64) {
    let mut stat = 0.0f64;
    let mut total = 0.0;
    for i in 0..b.len() {
        let t = b[i] - p.point[i];
        total += huber(t, eta);
        stat = stat.max((p.point[i] - z[i] - p.multiplier * huber_derivative(t, eta)).abs());
    }
    (stat, (p.multiplier * (total - sigma)).abs())
}

/// Projection of `z` onto the ball `{r : ρ(b − r) ≤ σ}`, or onto
/// `{r : b − r ∈ zero set of ρ}` when `σ = 0`.
pub fn project_gauge_constraint(
    rho: &GaugeSpec,
    b: &[f64],
    sigma: f64,
    z: &[f64],
) -> Result<Vec<f64>> {
    let w = sub(b, z);
    let p = if sigma > 0.0 {
        rho.project_level_set(&w, sigma)?
    } else {
        rho.zero_set_indicator().project_level_set(&w, 1.0)?
    };
    Ok(sub(b, &p))
}

/// Projection onto the gauge-dual feasible set `{y : ⟨b,y⟩ − σρ°(y) ≥ 1}`.
///
/// The KKT point is `y(λ) = prox_{λσρ°}(y0 + λb)`; `λ` is bisected until the
/// constraint is active. With `σ = 0` the pair `(ρ, σ)` is replaced by the
/// indicator of the zero set of `ρ` with unit weight.
pub fn project_gauge_dual_set(
    rho: &GaugeSpec,
    b: &[f64],
    sigma: f64,
    y0: &[f64],
    bisect_tol: f64,
) -> Result<Vec<f64>> {
    check_dim(b.len(), y0.len())?;
    let (rho, sigma) = if sigma > 0.0 {
        (rho.clone(), sigma)
    } else {
        (rho.zero_set_indicator(), 1.0)
    };
    let slack = |y: &[f64]| -> Result<f64> { Ok(sigma * rho.polar_eval(y)? - dot(b, y) + 1.0) };
    if slack(y0)? <= 0.0 {
        return Ok(y0.to_vec());
    }
    let point = |lam: f64| -> Result<Vec<f64>> {
        let v: Vec<f64> = y0.iter().zip(b).map(|(y, b)| y + lam * b).collect();
        let p = rho.project_level_set(&v, lam * sigma)?;
        Ok(sub(&v, &p))
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while slack(&point(hi)?)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::InvalidParameter(
                "gauge dual feasible set appears empty".into(),
            ));
        }
    }
    for _ in 0..300 {
        if hi - lo <= bisect_tol * (1.0 + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slack(&point(mid)?)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    point(hi)
}

/// Result of a projection onto the perspective-dual set.
#[derive(Debug, Clone, PartialEq)]
pub struct SocpProjection {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// ADMM projector onto a [`PerspectiveDualFeasibleSet`].
///
/// The splitting keeps the equality constraint in the `v`-step and puts
/// `s = Gv` into `SOC × ℝ₋^{k+2}`, where the cone block is
/// `(2Ly, ξ + 2μ, ξ − 2μ)` and the orthant block collects `Wy − ξw`, `μ` and
/// `−ξ`. The auxiliary state is kept between calls so that consecutive
/// projections of nearby points warm start.
#[derive(Debug, Clone)]
pub struct SocpProjector {
    set: PerspectiveDualFeasibleSet,
    g: DenseMap,
    a_eq: Vec<f64>,
    soc_len: usize,
    rho: f64,
    factor: Cholesky,
    p_inv_a: Vec<f64>,
    z: Vec<f64>,
    u: Vec<f64>,
}

impl SocpProjector {
    pub fn new(set: PerspectiveDualFeasibleSet) -> Result<Self> {
        let m = set.m();
        let n = m + 2;
        let plq = &set.plq;
        let k = plq.w_mat().rows();
        let rows = m + 2 + k + 2;
        let mut g = vec![0.0; rows * n];
        let l = plq.l_mat();
        for i in 0..m {
            for j in 0..m {
                g[i * n + j] = 2.0 * l.get(i, j);
            }
        }
        // ξ + 2μ and ξ − 2μ
        g[m * n + m] = 2.0;
        g[m * n + m + 1] = 1.0;
        g[(m + 1) * n + m] = -2.0;
        g[(m + 1) * n + m + 1] = 1.0;
        let w = plq.w_mat();
        for r in 0..k {
            let row = (m + 2 + r) * n;
            g[row..row + m].copy_from_slice(w.row(r));
            g[row + m + 1] = -plq.w_vec()[r];
        }
        g[(m + 2 + k) * n + m] = 1.0;
        g[(m + 3 + k) * n + m + 1] = -1.0;
        let g = DenseMap::new(rows, n, g)?;
        let mut a_eq = set.b.clone();
        a_eq.push(1.0);
        a_eq.push(-set.sigma);
        let rho = 1.0;
        let (factor, p_inv_a) = Self::factor(&g, &a_eq, rho)?;
        Ok(Self {
            set,
            g,
            a_eq,
            soc_len: m + 2,
            rho,
            factor,
            p_inv_a,
            z: vec![0.0; rows],
            u: vec![0.0; rows],
        })
    }

    fn factor(g: &DenseMap, a_eq: &[f64], rho: f64) -> Result<(Cholesky, Vec<f64>)> {
        let n = g.cols();
        let mut p = g.gram();
        for v in p.iter_mut() {
            *v *= rho;
        }
        for i in 0..n {
            p[i * n + i] += 1.0;
        }
        let ch = Cholesky::new(n, &p).ok_or_else(|| {
            Error::InvalidParameter("projection system not positive definite".into())
        })?;
        let pa = ch.solve(a_eq);
        Ok((ch, pa))
    }

    pub fn set(&self) -> &PerspectiveDualFeasibleSet {
        &self.set
    }

    fn project_cone(&self, s: &mut [f64]) {
        let soc = crate::gauges::project_soc(&s[..self.soc_len]);
        s[..self.soc_len].copy_from_slice(&soc);
        for v in &mut s[self.soc_len..] {
            *v = v.min(0.0);
        }
    }

    /// Projects `v0 = (y, μ, ξ)` onto the set. Residuals are absolute.
    pub fn project(&mut self, v0: &[f64], tol: f64, max_iters: usize) -> Result<SocpProjection> {
        let n = self.g.cols();
        check_dim(n, v0.len())?;
        let rows = self.g.rows();
        let mut x = vec![0.0; n];
        let mut gx = vec![0.0; rows];
        let mut tmp = vec![0.0; rows];
        let mut rhs = vec![0.0; n];
        let mut z_prev = vec![0.0; rows];
        let mut dual_vec = vec![0.0; n];
        let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
        let mut converged = false;
        let mut it = 0;
        while it < max_iters {
            it += 1;
            // v-step: (I + ρGᵀG)x = v0 + ρGᵀ(z − u) − νa with aᵀx = 1
            for i in 0..rows {
                tmp[i] = self.z[i] - self.u[i];
            }
            self.g.apply_adjoint_into(&tmp, &mut rhs);
            for i in 0..n {
                rhs[i] = v0[i] + self.rho * rhs[i];
            }
            self.factor.solve_in_place(&mut rhs);
            let shift = (1.0 - dot(&self.a_eq, &rhs)) / dot(&self.a_eq, &self.p_inv_a);
            for i in 0..n {
                x[i] = rhs[i] + shift * self.p_inv_a[i];
            }
            // s-step and multiplier update
            self.g.apply_into(&x, &mut gx);
            z_prev.copy_from_slice(&self.z);
            for i in 0..rows {
                self.z[i] = gx[i] + self.u[i];
            }
            let mut z = core::mem::take(&mut self.z);
            self.project_cone(&mut z);
            self.z = z;
            let mut r2 = 0.0;
            for i in 0..rows {
                let r = gx[i] - self.z[i];
                self.u[i] += r;
                r2 += r * r;
                tmp[i] = self.z[i] - z_prev[i];
            }
            r_norm = sqrt(r2);
            self.g.apply_adjoint_into(&tmp, &mut dual_vec);
            s_norm = self.rho * norm2(&dual_vec);
            if r_norm <= tol && s_norm <= tol {
                converged = true;
                break;
            }
            if it % 10 == 0 {
                let new_rho = if r_norm > 10.0 * s_norm {
                    self.rho * 2.0
                } else if s_norm > 10.0 * r_norm {
                    self.rho / 2.0
                } else {
                    self.rho
                };
                if new_rho != self.rho && (1e-6..=1e6).contains(&new_rho) {
                    let ratio = self.rho / new_rho;
                    self.u.iter_mut().for_each(|v| *v *= ratio);
                    self.rho = new_rho;
                    let (f, pa) = Self::factor(&self.g, &self.a_eq, self.rho)?;
                    self.factor = f;
                    self.p_inv_a = pa;
                }
            }
        }
        Ok(SocpProjection {
            point: x,
            iterations: it,
            converged,
            primal_residual: r_norm,
            dual_residual: s_norm,
        })
    }
}

/// One-shot projection onto a perspective-dual set.
pub fn project_socp_set(
    set: &PerspectiveDualFeasibleSet,
    v: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<SocpProjection> {
    SocpProjector::new(set.clone())?.project(v, tol, max_iters)
}

/// Least squares over the columns in `support`: conjugate gradients on the
/// normal equations `(A_SᵀA_S + εI)x_S = A_Sᵀrhs` with `ε = 1e-12`, stopped at
/// relative residual `tol`.
pub fn restricted_least_squares(
    a: &DenseMap,
    rhs: &[f64],
    support: &SupportSet,
    tol: f64,
) -> Result<Vec<f64>> {
    check_dim(a.rows(), rhs.len())?;
    let idx = support.indices();
    if idx.is_empty() {
        return Err(Error::InvalidParameter(
            "restricted least squares needs a nonempty support".into(),
        ));
    }
    if idx.iter().any(|&i| i >= a.cols()) {
        return Err(Error::InvalidParameter("support index out of range".into()));
    }
    let a_s = a.select_columns(idx);
    let k = idx.len();
    let eps = 1e-12;
    let normal = |v: &[f64]| -> Vec<f64> {
        let av = a_s.apply(v);
        let mut out = a_s.apply_adjoint(&av);
        for (o, vi) in out.iter_mut().zip(v) {
            *o += eps * vi;
        }
        out
    };
    let rhs_n = a_s.apply_adjoint(rhs);
    let bnorm = norm2(&rhs_n);
    let mut x = vec![0.0; k];
    if bnorm == 0.0 {
        return Ok(vec![0.0; a.cols()]);
    }
    let mut r = rhs_n.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * k + 100) {
        if sqrt(rr) <= tol * bnorm {
            break;
        }
        let ap = normal(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..k {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..k {
            p[i] = r[i] + beta * p[i];
        }
    }
    let mut full = vec![0.0; a.cols()];
    for (p, &i) in idx.iter().enumerate() {
        full[i] = x[p];
    }
    Ok(full)
}

/// Guard used by high-level drivers for constraint kinds without a projector.
pub(crate) fn unsupported_constraint(what: &str) -> Error {
    capability(
        "solvers",
        format!("no projection available for constraint {what}"),
    )
}

/// Projection onto `{z : g(b − z) ≤ σ}` for the constraints with a projector.
fn constraint_projector<'a>(
    p: &'a ProblemSpec,
    bisect_tol: f64,
) -> Result<impl Fn(&[f64]) -> Result<Vec<f64>> + 'a> {
    enum Kind<'a> {
        Gauge(&'a GaugeSpec),
        Huber(f64),
    }
    let kind = match &p.constraint {
        ProblemFn::Gauge(g) => Kind::Gauge(g),
        ProblemFn::Convex(f) => match f.kind() {
            PerspectiveKind::HuberSum { eta } => Kind::Huber(*eta),
            PerspectiveKind::Gauge(g) => Kind::Gauge(g),
            other => return Err(unsupported_constraint(&format!("{other:?}"))),
        },
    };
    if matches!(kind, Kind::Huber(_)) && p.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "Huber constraints need sigma > 0".into(),
        ));
    }
    Ok(move |z: &[f64]| match kind {
        Kind::Gauge(g) => project_gauge_constraint(g, &p.b, p.sigma, z),
        Kind::Huber(eta) => Ok(project_huber_level_set(&p.b, p.sigma, eta, z, bisect_tol)?.point),
    })
}

fn gauge_objective(p: &ProblemSpec) -> Result<&GaugeSpec> {
    p.objective
        .as_gauge()
        .ok_or_else(|| capability("solvers", "the primal-dual drivers need a gauge objective"))
}

/// Chambolle–Pock on the primal: `K = A`, `f` the indicator of
/// `{z : g(b − z) ≤ σ}` and `g = κ`. Starts from zero. The monitor sees
/// `(iter, x, y)`.
pub fn solve_primal<M>(
    p: &ProblemSpec,
    cfg: &CpConfig,
    tol: &ToleranceConfig,
    monitor: M,
) -> Result<CpOutcome>
where
    M: FnMut(usize, &[f64], &[f64]),
{
    let kappa = gauge_objective(p)?;
    let project = constraint_projector(p, tol.bisect_tol)?;
    cp_solve(
        &p.a,
        |v, alpha| {
            let out = prox_conjugate_of_indicator(&project, alpha, v)?;
            v.copy_from_slice(&out);
            Ok(())
        },
        |v, alpha| {
            let out = prox_gauge(kappa, alpha, v)?;
            v.copy_from_slice(&out);
            Ok(())
        },
        vec![0.0; p.n()],
        vec![0.0; p.m()],
        cfg,
        monitor,
    )
}

/// Outcome of a dual-side run.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolve {
    /// Final dual point: `y` for the gauge dual, `(y, μ, ξ)` for the
    /// perspective dual.
    pub v: Vec<f64>,
    /// Multiplier of the Lagrange dual of the dual problem, an `n`-vector.
    pub multiplier: Vec<f64>,
    /// `κ°(Aᵀy)` at the final point.
    pub nu_d: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DualSolve {
    /// Dual `y` without the trailing perspective variables.
    pub fn y(&self, m: usize) -> &[f64] {
        &self.v[..m]
    }

    /// `multiplier / ν_d`, the primal point of the rescaling theorem.
    pub fn rescaled_primal(&self) -> Result<Vec<f64>> {
        recover_from_lagrange_dual(&self.multiplier, self.nu_d)
    }
}

fn dual_solve<M, PG>(
    p: &ProblemSpec,
    extra: usize,
    cfg: &CpConfig,
    prox_g: PG,
    mut monitor: M,
) -> Result<DualSolve>
where
    M: FnMut(usize, &[f64], &[f64]),
    PG: FnMut(&mut [f64], f64) -> Result<()>,
{
    let kappa = gauge_objective(p)?;
    let k = AdjointLift { a: &p.a, extra };
    // f = κ°, so f* is the indicator of the unit ball of κ
    let out = cp_solve(
        &k,
        |q, _alpha| {
            let proj = kappa.project_level_set(q, 1.0)?;
            q.copy_from_slice(&proj);
            Ok(())
        },
        prox_g,
        vec![0.0; p.m() + extra],
        vec![0.0; p.n()],
        cfg,
        |it, v, q| monitor(it, v, q),
    )?;
    let nu_d = kappa.polar_eval(&p.a.apply_adjoint(&out.x[..p.m()]))?;
    Ok(DualSolve {
        v: out.x,
        multiplier: out.y,
        nu_d,
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// Chambolle–Pock on the gauge dual `min κ°(Aᵀy) + δ_D(y)` with `K = Aᵀ`.
/// The monitor sees `(iter, y, multiplier)`.
pub fn solve_gauge_dual<M>(
    p: &ProblemSpec,
    cfg: &CpConfig,
    _tol: &ToleranceConfig,
    monitor: M,
) -> Result<DualSolve>
where
    M: FnMut(usize, &[f64], &[f64]),
{
    let dual = build_gauge_dual(p)?;
    let (rho, b, sigma) = (dual.rho.clone(), dual.b.clone(), dual.sigma);
    dual_solve(
        p,
        0,
        cfg,
        |v, _alpha| {
            // an inexact projection makes the iterates jitter at the bisection
            // tolerance, so bisect to machine precision
            let out = project_gauge_dual_set(&rho, &b, sigma, v, 0.0)?;
            v.copy_from_slice(&out);
            Ok(())
        },
        monitor,
    )
}

/// Perspective-dual feasible set of a problem with a PLQ misfit.
pub fn perspective_dual_set(p: &ProblemSpec) -> Result<PerspectiveDualFeasibleSet> {
    let plq = match p.constraint.to_perspective().kind() {
        PerspectiveKind::HuberSum { eta } => PlqSpec::huber(*eta, p.m())?,
        PerspectiveKind::Plq(spec) => spec.clone(),
        _ => {
            return Err(capability(
                "solvers",
                "perspective-dual solves need a PLQ misfit",
            ))
        }
    };
    PerspectiveDualFeasibleSet::new(p.b.clone(), p.sigma, plq)
}

/// Chambolle–Pock on the perspective dual `min κ°(Aᵀy) + δ_Q(y, μ, ξ)` with a
/// PLQ misfit, `α = 0` and `K(y, μ, ξ) = Aᵀy`. Projections onto `Q` are
/// warm-started splitting solves to `feas_tol`. The monitor sees
/// `(iter, (y, μ, ξ), multiplier)`.
pub fn solve_perspective_dual<M>(
    p: &ProblemSpec,
    cfg: &CpConfig,
    tol: &ToleranceConfig,
    monitor: M,
) -> Result<DualSolve>
where
    M: FnMut(usize, &[f64], &[f64]),
{
    let mut projector = SocpProjector::new(perspective_dual_set(p)?)?;
    dual_solve(
        p,
        2,
        cfg,
        |v, _alpha| {
            let out = projector.project(v, tol.feas_tol, tol.max_inner_iters)?;
            v.copy_from_slice(&out.point);
            Ok(())
        },
        monitor,
    )
}
