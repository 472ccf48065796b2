//! Nonnegative closed convex functions together with their perspective
//! transform, recession function, conjugate and perspective-polar.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{capability, check_dim, Error, Result};
use crate::gauges::{sign0, GaugeSpec};
use crate::linalg::{dot, norm_inf};
use crate::plq::PlqSpec;

/// Relative slack used when testing membership in a conjugate domain.
const DOMAIN_TOL: f64 = 1e-12;

/// Largest scale tried by the numeric Minkowski-gauge search before giving up.
const GAUGE_SEARCH_MAX: f64 = 1152921504606846976.0; // 2^60

/// Exponential family behind a Bregman-divergence misfit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BregmanFamily {
    Gaussian,
    Poisson,
    Bernoulli,
}

impl BregmanFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Poisson => "poisson",
            Self::Bernoulli => "bernoulli",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerspectiveKind {
    /// `Σ_i h_η(x_i)` with `h_η(x) = sup_{|u| ≤ η} {ux − (η/2)u²}`.
    HuberSum {
        eta: f64,
    },
    Plq(PlqSpec),
    Gauge(GaugeSpec),
    /// `½‖x‖²`
    Quadratic,
    /// Sum over consecutive coordinate blocks.
    SeparableSum(Vec<PerspectiveFn>),
    /// `z ↦ d_{φ*}(z; ∇φ(anchor))`.
    Bregman {
        family: BregmanFamily,
        anchor: Vec<f64>,
    },
}

/// A nonnegative closed convex function on ℝ^dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveFn {
    kind: PerspectiveKind,
    dimension: usize,
}

/// Scalar Huber function `h_η`.
#[inline]
pub fn huber(x: f64, eta: f64) -> f64 {
    let a = x.abs();
    if a <= eta * eta {
        x * x / (2.0 * eta)
    } else {
        eta * a - 0.5 * eta * eta * eta
    }
}

/// Derivative of the scalar Huber function.
#[inline]
pub fn huber_derivative(x: f64, eta: f64) -> f64 {
    (x / eta).clamp(-eta, eta)
}

pub fn huber_sum_eval(x: &[f64], eta: f64) -> f64 {
    x.iter().map(|v| huber(*v, eta)).sum()
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `t log t` with the continuous extension 0 at t = 0.
fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * libm::log(t)
    }
}

impl PerspectiveFn {
    pub fn huber_sum(eta: f64, m: usize) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "huber eta must be positive, got {eta}"
            )));
        }
        Ok(Self {
            kind: PerspectiveKind::HuberSum { eta },
            dimension: m,
        })
    }

    pub fn plq(spec: PlqSpec) -> Self {
        let dimension = spec.dimension();
        Self {
            kind: PerspectiveKind::Plq(spec),
            dimension,
        }
    }

    pub fn gauge(g: GaugeSpec) -> Self {
        let dimension = g.dimension();
        Self {
            kind: PerspectiveKind::Gauge(g),
            dimension,
        }
    }

    pub fn quadratic(n: usize) -> Self {
        Self {
            kind: PerspectiveKind::Quadratic,
            dimension: n,
        }
    }

    pub fn separable_sum(parts: Vec<PerspectiveFn>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter(
                "separable sum needs at least one component".into(),
            ));
        }
        let dimension = parts.iter().map(|p| p.dimension).sum();
        Ok(Self {
            kind: PerspectiveKind::SeparableSum(parts),
            dimension,
        })
    }

    pub fn bregman(family: BregmanFamily, anchor: Vec<f64>) -> Result<Self> {
        let ok = anchor.iter().all(|b| match family {
            BregmanFamily::Gaussian => b.is_finite(),
            BregmanFamily::Poisson => *b > 0.0 && b.is_finite(),
            BregmanFamily::Bernoulli => *b > 0.0 && *b < 1.0,
        });
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "anchor lies outside the mean domain of the {} family",
                family.name()
            )));
        }
        let dimension = anchor.len();
        Ok(Self {
            kind: PerspectiveKind::Bregman { family, anchor },
            dimension,
        })
    }

    #[inline]
    pub fn kind(&self) -> &PerspectiveKind {
        &self.kind
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn as_gauge(&self) -> Option<&GaugeSpec> {
        match &self.kind {
            PerspectiveKind::Gauge(g) => Some(g),
            _ => None,
        }
    }

    /// Every supported kind has a closed-form conjugate.
    pub fn has_closed_form_conjugate(&self) -> bool {
        true
    }

    fn is_gauge_like(&self) -> bool {
        match &self.kind {
            PerspectiveKind::Gauge(_) => true,
            PerspectiveKind::SeparableSum(parts) => parts.iter().all(PerspectiveFn::is_gauge_like),
            _ => false,
        }
    }

    /// Gauge equivalent of a separable sum whose components are all gauges.
    pub fn to_gauge(&self) -> Option<GaugeSpec> {
        match &self.kind {
            PerspectiveKind::Gauge(g) => Some(g.clone()),
            PerspectiveKind::SeparableSum(parts) => {
                let blocks: Option<Vec<GaugeSpec>> =
                    parts.iter().map(PerspectiveFn::to_gauge).collect();
                GaugeSpec::separable_sum(blocks?).ok()
            }
            _ => None,
        }
    }

    fn blocks<'a>(
        parts: &'a [PerspectiveFn],
        x: &'a [f64],
    ) -> impl Iterator<Item = (&'a PerspectiveFn, &'a [f64])> {
        let mut start = 0;
        parts.iter().map(move |p| {
            let xi = &x[start..start + p.dimension];
            start += p.dimension;
            (p, xi)
        })
    }

    /// `f(x) ∈ [0, +∞]`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        Ok(match &self.kind {
            PerspectiveKind::HuberSum { eta } => huber_sum_eval(x, *eta),
            PerspectiveKind::Plq(p) => p.eval(x)?,
            PerspectiveKind::Gauge(g) => g.eval(x)?,
            PerspectiveKind::Quadratic => 0.5 * dot(x, x),
            PerspectiveKind::SeparableSum(parts) => {
                let mut s = 0.0;
                for (p, xi) in Self::blocks(parts, x) {
                    s += p.eval(xi)?;
                }
                s
            }
            PerspectiveKind::Bregman { family, anchor } => bregman_eval(*family, anchor, x),
        })
    }

    /// Recession function `f^∞(x)`.
    pub fn recession(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        Ok(match &self.kind {
            PerspectiveKind::HuberSum { eta } => eta * crate::linalg::norm1(x),
            PerspectiveKind::Plq(p) => p.recession(x)?,
            PerspectiveKind::Gauge(g) => g.eval(x)?,
            PerspectiveKind::Quadratic => zero_indicator(x),
            PerspectiveKind::SeparableSum(parts) => {
                let mut s = 0.0;
                for (p, xi) in Self::blocks(parts, x) {
                    s += p.recession(xi)?;
                }
                s
            }
            PerspectiveKind::Bregman { family, anchor } => {
                let mut s = 0.0;
                for (d, b) in x.iter().zip(anchor) {
                    s += match family {
                        BregmanFamily::Gaussian if *d != 0.0 => return Ok(f64::INFINITY),
                        BregmanFamily::Gaussian => 0.0,
                        BregmanFamily::Poisson if *d > 0.0 => return Ok(f64::INFINITY),
                        BregmanFamily::Poisson => -b * d,
                        BregmanFamily::Bernoulli => d.max(0.0) - b * d,
                    };
                }
                s
            }
        })
    }

    /// Perspective `f^π(x, λ)`: `λ f(x/λ)` for `λ > 0`, `f^∞(x)` at `λ = 0`,
    /// `+∞` for `λ < 0`.
    pub fn perspective_eval(&self, x: &[f64], lambda: f64) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        if lambda > 0.0 {
            let scaled: Vec<f64> = x.iter().map(|v| v / lambda).collect();
            Ok(lambda * self.eval(&scaled)?)
        } else if lambda == 0.0 {
            self.recession(x)
        } else {
            Ok(f64::INFINITY)
        }
    }

    /// Convex conjugate `f*(z)`.
    pub fn conjugate_eval(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.dimension, z.len())?;
        Ok(match &self.kind {
            PerspectiveKind::HuberSum { eta } => {
                if norm_inf(z) <= eta * (1.0 + DOMAIN_TOL) {
                    0.5 * eta * dot(z, z)
                } else {
                    f64::INFINITY
                }
            }
            PerspectiveKind::Plq(p) => p.conjugate_eval(z)?,
            PerspectiveKind::Gauge(g) => {
                if g.polar_eval(z)? <= 1.0 + DOMAIN_TOL {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            PerspectiveKind::Quadratic => 0.5 * dot(z, z),
            PerspectiveKind::SeparableSum(parts) => {
                let mut s = 0.0;
                for (p, zi) in Self::blocks(parts, z) {
                    s += p.conjugate_eval(zi)?;
                }
                s
            }
            PerspectiveKind::Bregman { family, anchor } => bregman_conjugate(*family, anchor, z),
        })
    }

    /// Support function of `dom f`, the recession function of `f*`.
    pub fn conjugate_recession(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.dimension, z.len())?;
        Ok(match &self.kind {
            PerspectiveKind::Gauge(g) => g.polar().zero_set_indicator().eval(z)?,
            PerspectiveKind::Plq(p) if !p.is_finite_everywhere() => {
                return Err(capability(
                    "perspective",
                    "support function of a PLQ domain",
                ));
            }
            PerspectiveKind::SeparableSum(parts) => {
                let mut s = 0.0;
                for (p, zi) in Self::blocks(parts, z) {
                    s += p.conjugate_recession(zi)?;
                }
                s
            }
            _ => zero_indicator(z),
        })
    }

    /// Perspective of the conjugate, `f*^π(z, μ)`.
    pub fn conjugate_perspective_eval(&self, z: &[f64], mu: f64) -> Result<f64> {
        check_dim(self.dimension, z.len())?;
        if mu > 0.0 {
            let scaled: Vec<f64> = z.iter().map(|v| v / mu).collect();
            Ok(mu * self.conjugate_eval(&scaled)?)
        } else if mu == 0.0 {
            self.conjugate_recession(z)
        } else {
            Ok(f64::INFINITY)
        }
    }

    /// Perspective-polar `f♯(z, ξ)`, the polar of `f^π`.
    pub fn perspective_polar_eval(&self, z: &[f64], xi: f64) -> Result<f64> {
        check_dim(self.dimension, z.len())?;
        if xi > 0.0 && !matches!(self.kind, PerspectiveKind::Bregman { .. }) {
            return Ok(f64::INFINITY);
        }
        match &self.kind {
            PerspectiveKind::Gauge(g) => g.polar_eval(z),
            PerspectiveKind::HuberSum { eta } => Ok(huber_sharp(z, xi, *eta)),
            PerspectiveKind::Plq(p) => p.perspective_polar(z, xi),
            PerspectiveKind::Quadratic => Ok(quadratic_sharp(dot(z, z), xi)),
            PerspectiveKind::SeparableSum(parts) if self.is_gauge_like() => {
                let mut best = 0.0f64;
                for (p, zi) in Self::blocks(parts, z) {
                    best = best.max(p.perspective_polar_eval(zi, xi)?);
                }
                Ok(best)
            }
            _ => minkowski_gauge_of_conjugate_epigraph(self, z, xi, 1e-13),
        }
    }

    /// Tests `f♯(z, ξ) ≤ μ` through `μ ≥ 0` and `f*^π(z, μ) ≤ −ξ`.
    pub fn level_set_membership(&self, z: &[f64], xi: f64, mu: f64) -> Result<bool> {
        check_dim(self.dimension, z.len())?;
        if mu < 0.0 {
            return Ok(false);
        }
        Ok(self.conjugate_perspective_eval(z, mu)? <= -xi)
    }

    /// One element of `∂f(x)`.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dimension, x.len())?;
        match &self.kind {
            PerspectiveKind::HuberSum { eta } => {
                Ok(x.iter().map(|v| huber_derivative(*v, *eta)).collect())
            }
            PerspectiveKind::Plq(p) => p.maximizer(x),
            PerspectiveKind::Gauge(g) => g.subgradient(x),
            PerspectiveKind::Quadratic => Ok(x.to_vec()),
            PerspectiveKind::SeparableSum(parts) => {
                let mut out = Vec::with_capacity(x.len());
                for (p, xi) in Self::blocks(parts, x) {
                    out.extend(p.subgradient(xi)?);
                }
                Ok(out)
            }
            PerspectiveKind::Bregman { family, anchor } => {
                if !bregman_eval(*family, anchor, x).is_finite() {
                    return Err(Error::OutsideDomain(
                        "point is outside the divergence domain".into(),
                    ));
                }
                Ok(x.iter()
                    .zip(anchor)
                    .map(|(z, b)| match family {
                        BregmanFamily::Gaussian => z - b,
                        BregmanFamily::Poisson => libm::exp(*z) - b,
                        BregmanFamily::Bernoulli => sigmoid(*z) - b,
                    })
                    .collect())
            }
        }
    }

    /// One element of `∂f^∞(x)`, for kinds whose recession function has a
    /// closed-form subgradient.
    fn recession_subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            PerspectiveKind::Gauge(g) => g.subgradient(x),
            PerspectiveKind::HuberSum { eta } => Ok(x.iter().map(|v| eta * sign0(*v)).collect()),
            PerspectiveKind::Quadratic => {
                if x.iter().all(|v| *v == 0.0) {
                    Ok(vec![0.0; x.len()])
                } else {
                    Err(Error::OutsideDomain(
                        "recession function of the quadratic is finite only at 0".into(),
                    ))
                }
            }
            PerspectiveKind::SeparableSum(parts) => {
                let mut out = Vec::with_capacity(x.len());
                for (p, xi) in Self::blocks(parts, x) {
                    out.extend(p.recession_subgradient(xi)?);
                }
                Ok(out)
            }
            _ => Err(capability(
                "perspective",
                "subgradient of the recession function at mu = 0",
            )),
        }
    }

    /// An element `(z, γ)` of `∂f^π(x, μ)`.
    ///
    /// For `μ > 0` this is `(z, −f*(z))` with `z ∈ ∂f(x/μ)`. At `μ = 0`, `z` is
    /// taken from `∂f^∞(x)` and `γ = −f*(z)`, the largest admissible value.
    pub fn perspective_subdifferential(&self, x: &[f64], mu: f64) -> Result<(Vec<f64>, f64)> {
        check_dim(self.dimension, x.len())?;
        let z = if mu > 0.0 {
            let scaled: Vec<f64> = x.iter().map(|v| v / mu).collect();
            if !self.eval(&scaled)?.is_finite() {
                return Err(Error::OutsideDomain(
                    "(x, mu) is outside the perspective domain".into(),
                ));
            }
            self.subgradient(&scaled)?
        } else if mu == 0.0 {
            if !self.recession(x)?.is_finite() {
                return Err(Error::OutsideDomain(
                    "(x, 0) is outside the perspective domain".into(),
                ));
            }
            self.recession_subgradient(x)?
        } else {
            return Err(Error::OutsideDomain(
                "perspective is +inf for negative mu".into(),
            ));
        };
        let fz = self.conjugate_eval(&z)?;
        Ok((z, -fz))
    }
}

fn zero_indicator(x: &[f64]) -> f64 {
    if x.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `max{‖z‖∞/η, −(η/2ξ)‖z‖²}` for `ξ ≤ 0`.
fn huber_sharp(z: &[f64], xi: f64, eta: f64) -> f64 {
    let lin = norm_inf(z) / eta;
    let quad = if xi < 0.0 {
        -eta * dot(z, z) / (2.0 * xi)
    } else {
        zero_indicator(z)
    };
    lin.max(quad)
}

fn quadratic_sharp(zz: f64, xi: f64) -> f64 {
    if xi < 0.0 {
        -zz / (2.0 * xi)
    } else if zz == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn bregman_eval(family: BregmanFamily, anchor: &[f64], z: &[f64]) -> f64 {
    match family {
        BregmanFamily::Gaussian => {
            0.5 * z
                .iter()
                .zip(anchor)
                .map(|(z, b)| (z - b) * (z - b))
                .sum::<f64>()
        }
        BregmanFamily::Poisson => z
            .iter()
            .zip(anchor)
            .map(|(z, b)| libm::exp(*z) - b - b * (z - libm::log(*b)))
            .sum(),
        BregmanFamily::Bernoulli => z
            .iter()
            .zip(anchor)
            .map(|(z, b)| {
                let logit = libm::log(b / (1.0 - b));
                softplus(*z) + libm::log(1.0 - b) - b * (z - logit)
            })
            .sum(),
    }
}

fn bregman_conjugate(family: BregmanFamily, anchor: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (y, b) in y.iter().zip(anchor) {
        let t = y + b;
        s += match family {
            BregmanFamily::Gaussian => 0.5 * y * y + b * y,
            BregmanFamily::Poisson => {
                if t < 0.0 {
                    return f64::INFINITY;
                }
                b - xlogx(*b) + xlogx(t) - t
            }
            BregmanFamily::Bernoulli => {
                if !(0.0..=1.0).contains(&t) {
                    return f64::INFINITY;
                }
                -libm::log(1.0 - b) - b * libm::log(b / (1.0 - b)) + xlogx(t) + xlogx(1.0 - t)
            }
        };
    }
    s
}

/// Numeric `f♯(z, ξ) = inf{λ > 0 : λ f*(z/λ) ≤ −ξ}`, the Minkowski gauge of
/// `epi f*` at `(z, −ξ)`, by doubling then bisection to relative `rel_tol`.
///
/// The feasible set in `λ` is upward closed because `epi f*` is convex and
/// contains the origin, which makes bisection valid.
pub fn minkowski_gauge_of_conjugate_epigraph(
    f: &PerspectiveFn,
    z: &[f64],
    xi: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_dim(f.dimension(), z.len())?;
    let mut scratch = vec![0.0; z.len()];
    let mut feasible = |lam: f64| -> Result<bool> {
        for (s, v) in scratch.iter_mut().zip(z) {
            *s = v / lam;
        }
        let c = f.conjugate_eval(&scratch)?;
        Ok(c.is_finite() && lam * c <= -xi)
    };
    let mut hi = 1.0;
    let mut lo = 0.0;
    while !feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > GAUGE_SEARCH_MAX {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..400 {
        if hi - lo <= rel_tol * hi || hi < 1e-300 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
