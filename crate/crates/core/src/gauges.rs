//! Closed gauge functions: evaluation, polars, subgradients and level-set
//! projections.
//!
//! A gauge is nonnegative, positively homogeneous and vanishes at the origin.
//! Every kind here has a closed-form polar, so `polar()` returns another
//! [`GaugeSpec`] and `polar_eval` never needs a numeric search.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, nnls, norm1, norm2, norm_inf};
use crate::model::DenseMap;

/// Relative slack used when testing membership in a cone.
const CONE_TOL: f64 = 1e-12;

/// Closed convex cones whose indicators are supported as gauges.
#[derive(Debug, Clone, PartialEq)]
pub enum Cone {
    /// `{x : x ≥ 0}`
    NonNegative,
    /// `{x : x ≤ 0}`
    NonPositive,
    /// `{0}`
    Zero,
    /// The whole space.
    Whole,
    /// `{x : W x ≤ 0}`; rows of `W` are the facet normals.
    Polyhedral(DenseMap),
    /// `{Gᵀλ : λ ≥ 0}`; rows of `G` are the generators.
    Generated(DenseMap),
    /// `{(u, t) : ‖u‖₂ ≤ t}` with `t` the last coordinate.
    SecondOrder,
    /// `{(u, t) : ‖u‖₂ ≤ −t}`, the polar of the second-order cone.
    NegSecondOrder,
}

impl Cone {
    pub fn polar(&self) -> Cone {
        match self {
            Cone::NonNegative => Cone::NonPositive,
            Cone::NonPositive => Cone::NonNegative,
            Cone::Zero => Cone::Whole,
            Cone::Whole => Cone::Zero,
            Cone::Polyhedral(w) => Cone::Generated(w.clone()),
            Cone::Generated(g) => Cone::Polyhedral(g.clone()),
            Cone::SecondOrder => Cone::NegSecondOrder,
            Cone::NegSecondOrder => Cone::SecondOrder,
        }
    }

    fn fixed_dimension(&self) -> Option<usize> {
        match self {
            Cone::Polyhedral(w) | Cone::Generated(w) => Some(w.cols()),
            _ => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let slack = CONE_TOL * (1.0 + norm2(x));
        match self {
            Cone::NonNegative => x.iter().all(|v| *v >= -slack),
            Cone::NonPositive => x.iter().all(|v| *v <= slack),
            Cone::Zero => norm_inf(x) <= slack,
            Cone::Whole => true,
            Cone::Polyhedral(w) => w.apply(x).iter().all(|v| *v <= slack),
            Cone::Generated(_) => {
                norm2(&crate::linalg::sub(x, &self.project(x))) <= 1e-10 * (1.0 + norm2(x))
            }
            Cone::SecondOrder | Cone::NegSecondOrder => {
                let (u, t) = x.split_at(x.len().saturating_sub(1));
                let t = t.first().copied().unwrap_or(0.0);
                let t = if matches!(self, Cone::SecondOrder) {
                    t
                } else {
                    -t
                };
                norm2(u) <= t + slack
            }
        }
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Cone::NonNegative => x.iter().map(|v| v.max(0.0)).collect(),
            Cone::NonPositive => x.iter().map(|v| v.min(0.0)).collect(),
            Cone::Zero => vec![0.0; x.len()],
            Cone::Whole => x.to_vec(),
            Cone::Generated(g) => {
                // Π(x) = Gᵀλ*, λ* = argmin_{λ ≥ 0} ‖Gᵀλ − x‖
                let gt = g.transpose();
                let lambda = nnls(gt.rows(), gt.cols(), gt.entries(), x);
                gt.apply(&lambda)
            }
            Cone::Polyhedral(w) => {
                // Moreau decomposition: x = Π_K(x) + Π_{K°}(x)
                let p = Cone::Generated(w.clone()).project(x);
                crate::linalg::sub(x, &p)
            }
            Cone::SecondOrder => project_soc(x),
            Cone::NegSecondOrder => {
                let flipped: Vec<f64> = flip_last(x);
                flip_last(&project_soc(&flipped))
            }
        }
    }
}

fn flip_last(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    if let Some(t) = v.last_mut() {
        *t = -*t;
    }
    v
}

/// Projection onto `{(u, t) : ‖u‖₂ ≤ t}`.
pub fn project_soc(x: &[f64]) -> Vec<f64> {
    let k = x.len();
    if k == 0 {
        return Vec::new();
    }
    let (u, t) = (&x[..k - 1], x[k - 1]);
    let nu = norm2(u);
    if nu <= t {
        return x.to_vec();
    }
    if nu <= -t {
        return vec![0.0; k];
    }
    let s = 0.5 * (nu + t);
    let mut out: Vec<f64> = u.iter().map(|v| s * v / nu).collect();
    out.push(s);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaugeKind {
    L1,
    L2,
    LInf,
    /// Indicator of a closed convex cone.
    ConeIndicator(Cone),
    /// `c · base(x)` with `c > 0`.
    Scaled {
        c: f64,
        base: Box<GaugeSpec>,
    },
    /// `Σ_i κ_i(x_i)` over consecutive coordinate blocks.
    SeparableSum(Vec<GaugeSpec>),
    /// `max_i κ_i(x_i)` over consecutive coordinate blocks.
    SeparableMax(Vec<GaugeSpec>),
}

/// A closed gauge on ℝ^dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSpec {
    kind: GaugeKind,
    dimension: usize,
}

impl GaugeSpec {
    pub fn new(kind: GaugeKind, dimension: usize) -> Result<Self> {
        match &kind {
            GaugeKind::ConeIndicator(c) => {
                if let Some(d) = c.fixed_dimension() {
                    check_dim(d, dimension)?;
                }
                if matches!(c, Cone::SecondOrder | Cone::NegSecondOrder) && dimension == 0 {
                    return Err(Error::InvalidParameter(
                        "second-order cone needs dimension >= 1".into(),
                    ));
                }
            }
            GaugeKind::Scaled { c, base } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "scale must be positive, got {c}"
                    )));
                }
                check_dim(base.dimension, dimension)?;
            }
            GaugeKind::SeparableSum(blocks) | GaugeKind::SeparableMax(blocks) => {
                if blocks.is_empty() {
                    return Err(Error::InvalidParameter(
                        "composite gauge needs at least one block".into(),
                    ));
                }
                check_dim(blocks.iter().map(|b| b.dimension).sum(), dimension)?;
            }
            _ => {}
        }
        Ok(Self { kind, dimension })
    }

    pub fn l1(n: usize) -> Self {
        Self {
            kind: GaugeKind::L1,
            dimension: n,
        }
    }

    pub fn l2(n: usize) -> Self {
        Self {
            kind: GaugeKind::L2,
            dimension: n,
        }
    }

    pub fn linf(n: usize) -> Self {
        Self {
            kind: GaugeKind::LInf,
            dimension: n,
        }
    }

    pub fn cone(cone: Cone, n: usize) -> Result<Self> {
        Self::new(GaugeKind::ConeIndicator(cone), n)
    }

    pub fn scaled(c: f64, base: GaugeSpec) -> Result<Self> {
        let n = base.dimension;
        Self::new(
            GaugeKind::Scaled {
                c,
                base: Box::new(base),
            },
            n,
        )
    }

    pub fn separable_sum(blocks: Vec<GaugeSpec>) -> Result<Self> {
        let n = blocks.iter().map(|b| b.dimension).sum();
        Self::new(GaugeKind::SeparableSum(blocks), n)
    }

    pub fn separable_max(blocks: Vec<GaugeSpec>) -> Result<Self> {
        let n = blocks.iter().map(|b| b.dimension).sum();
        Self::new(GaugeKind::SeparableMax(blocks), n)
    }

    #[inline]
    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// True for indicators of cones, which only take the values 0 and +∞.
    pub fn is_indicator(&self) -> bool {
        match &self.kind {
            GaugeKind::ConeIndicator(_) => true,
            GaugeKind::Scaled { base, .. } => base.is_indicator(),
            GaugeKind::SeparableSum(b) | GaugeKind::SeparableMax(b) => {
                b.iter().all(GaugeSpec::is_indicator)
            }
            _ => false,
        }
    }

    /// `κ(x) ∈ [0, +∞]`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            GaugeKind::L1 => norm1(x),
            GaugeKind::L2 => norm2(x),
            GaugeKind::LInf => norm_inf(x),
            GaugeKind::ConeIndicator(c) => {
                if c.contains(x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            GaugeKind::Scaled { c, base } => c * base.eval_unchecked(x),
            GaugeKind::SeparableSum(blocks) => self
                .blocks(x, blocks)
                .map(|(g, xi)| g.eval_unchecked(xi))
                .sum(),
            GaugeKind::SeparableMax(blocks) => self
                .blocks(x, blocks)
                .map(|(g, xi)| g.eval_unchecked(xi))
                .fold(0.0, f64::max),
        }
    }

    fn blocks<'a>(
        &self,
        x: &'a [f64],
        blocks: &'a [GaugeSpec],
    ) -> impl Iterator<Item = (&'a GaugeSpec, &'a [f64])> {
        let mut start = 0;
        blocks.iter().map(move |g| {
            let xi = &x[start..start + g.dimension];
            start += g.dimension;
            (g, xi)
        })
    }

    /// The polar gauge `κ°`, in closed form.
    pub fn polar(&self) -> GaugeSpec {
        let kind = match &self.kind {
            GaugeKind::L1 => GaugeKind::LInf,
            GaugeKind::L2 => GaugeKind::L2,
            GaugeKind::LInf => GaugeKind::L1,
            GaugeKind::ConeIndicator(c) => GaugeKind::ConeIndicator(c.polar()),
            GaugeKind::Scaled { c, base } => GaugeKind::Scaled {
                c: 1.0 / c,
                base: Box::new(base.polar()),
            },
            GaugeKind::SeparableSum(b) => {
                GaugeKind::SeparableMax(b.iter().map(GaugeSpec::polar).collect())
            }
            GaugeKind::SeparableMax(b) => {
                GaugeKind::SeparableSum(b.iter().map(GaugeSpec::polar).collect())
            }
        };
        GaugeSpec {
            kind,
            dimension: self.dimension,
        }
    }

    /// `κ°(y)`.
    pub fn polar_eval(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dimension, y.len())?;
        Ok(match &self.kind {
            GaugeKind::L1 => norm_inf(y),
            GaugeKind::L2 => norm2(y),
            GaugeKind::LInf => norm1(y),
            _ => self.polar().eval_unchecked(y),
        })
    }

    /// Indicator of the zero set `{u : κ(u) = 0}`, the gauge that replaces the
    /// constraint gauge when `sigma = 0`.
    pub fn zero_set_indicator(&self) -> GaugeSpec {
        let kind = match &self.kind {
            GaugeKind::L1 | GaugeKind::L2 | GaugeKind::LInf => GaugeKind::ConeIndicator(Cone::Zero),
            GaugeKind::ConeIndicator(c) => GaugeKind::ConeIndicator(c.clone()),
            GaugeKind::Scaled { base, .. } => return base.zero_set_indicator(),
            GaugeKind::SeparableSum(b) | GaugeKind::SeparableMax(b) => {
                GaugeKind::SeparableMax(b.iter().map(GaugeSpec::zero_set_indicator).collect())
            }
        };
        GaugeSpec {
            kind,
            dimension: self.dimension,
        }
    }

    /// One element of `∂κ(x)`; at kinks the minimum-norm closed-form candidate.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dimension, x.len())?;
        match &self.kind {
            GaugeKind::L1 => Ok(x.iter().map(|v| sign0(*v)).collect()),
            GaugeKind::L2 => {
                let n = norm2(x);
                Ok(if n == 0.0 {
                    vec![0.0; x.len()]
                } else {
                    x.iter().map(|v| v / n).collect()
                })
            }
            GaugeKind::LInf => {
                let m = norm_inf(x);
                let mut g = vec![0.0; x.len()];
                if m > 0.0 {
                    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() == m).collect();
                    let w = 1.0 / active.len() as f64;
                    for i in active {
                        g[i] = w * sign0(x[i]);
                    }
                }
                Ok(g)
            }
            GaugeKind::ConeIndicator(c) => {
                if c.contains(x) {
                    Ok(vec![0.0; x.len()])
                } else {
                    Err(Error::OutsideDomain("point is not in the cone".into()))
                }
            }
            GaugeKind::Scaled { c, base } => {
                Ok(base.subgradient(x)?.into_iter().map(|v| c * v).collect())
            }
            GaugeKind::SeparableSum(blocks) => {
                let mut g = Vec::with_capacity(x.len());
                for (b, xi) in self.blocks(x, blocks) {
                    g.extend(b.subgradient(xi)?);
                }
                Ok(g)
            }
            GaugeKind::SeparableMax(blocks) => {
                let vals: Vec<f64> = self
                    .blocks(x, blocks)
                    .map(|(b, xi)| b.eval_unchecked(xi))
                    .collect();
                let top = vals.iter().copied().fold(0.0, f64::max);
                if top == f64::INFINITY {
                    return Err(Error::OutsideDomain(
                        "point is outside the gauge domain".into(),
                    ));
                }
                let mut best: Option<Vec<f64>> = None;
                let mut start = 0;
                for (k, b) in blocks.iter().enumerate() {
                    if vals[k] == top {
                        let mut cand = vec![0.0; x.len()];
                        let sg = b.subgradient(&x[start..start + b.dimension])?;
                        cand[start..start + b.dimension].copy_from_slice(&sg);
                        if best.as_ref().is_none_or(|bb| norm2(&cand) < norm2(bb)) {
                            best = Some(cand);
                        }
                    }
                    start += b.dimension;
                }
                Ok(best.unwrap_or_else(|| vec![0.0; x.len()]))
            }
        }
    }

    /// Euclidean projection of `x` onto `{u : κ(u) ≤ radius}`.
    pub fn project_level_set(&self, x: &[f64], radius: f64) -> Result<Vec<f64>> {
        check_dim(self.dimension, x.len())?;
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        match &self.kind {
            GaugeKind::L1 => Ok(project_l1_ball(x, radius)),
            GaugeKind::L2 => {
                let n = norm2(x);
                Ok(if n <= radius {
                    x.to_vec()
                } else {
                    x.iter().map(|v| v * radius / n).collect()
                })
            }
            GaugeKind::LInf => Ok(x.iter().map(|v| v.clamp(-radius, radius)).collect()),
            GaugeKind::ConeIndicator(c) => Ok(c.project(x)),
            GaugeKind::Scaled { c, base } => base.project_level_set(x, radius / c),
            GaugeKind::SeparableMax(blocks) => {
                let mut out = Vec::with_capacity(x.len());
                for (b, xi) in self.blocks(x, blocks) {
                    out.extend(b.project_level_set(xi, radius)?);
                }
                Ok(out)
            }
            GaugeKind::SeparableSum(blocks) if blocks.len() == 1 => {
                blocks[0].project_level_set(x, radius)
            }
            GaugeKind::SeparableSum(blocks) => self.project_sum_level_set(blocks, x, radius),
        }
    }

    /// `{Σ κ_i(u_i) ≤ r}`: the projection is `u_i = prox_{λκ_i}(x_i)` for the
    /// multiplier `λ` that makes the constraint active, found by bisection.
    fn project_sum_level_set(
        &self,
        blocks: &[GaugeSpec],
        x: &[f64],
        radius: f64,
    ) -> Result<Vec<f64>> {
        if self.eval(x)? <= radius {
            return Ok(x.to_vec());
        }
        let polars: Vec<GaugeSpec> = blocks.iter().map(GaugeSpec::polar).collect();
        let point = |lam: f64| -> Result<(Vec<f64>, f64)> {
            let mut out = Vec::with_capacity(x.len());
            let mut total = 0.0;
            for ((b, pol), xi) in blocks
                .iter()
                .zip(&polars)
                .zip(self.blocks(x, blocks).map(|(_, xi)| xi))
            {
                let shrink = pol.project_level_set(xi, lam)?;
                let u: Vec<f64> = xi.iter().zip(&shrink).map(|(a, s)| a - s).collect();
                total += b.eval(&u)?;
                out.extend(u);
            }
            Ok((out, total))
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while point(hi)?.1 > radius {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::InvalidParameter(
                    "level-set projection multiplier diverged".into(),
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if point(mid)?.1 > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(point(hi)?.0)
    }
}

#[inline]
pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Projection onto the ℓ1 ball of the given radius by sorting magnitudes and
/// locating the soft-threshold level.
pub fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    if norm1(x) <= radius {
        return x.to_vec();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (j + 1) as f64;
        if u > t {
            theta = t;
        } else {
            break;
        }
    }
    x.iter()
        .map(|v| sign0(*v) * (v.abs() - theta).max(0.0))
        .collect()
}

/// Polar-gauge product `κ(x)·κ°(y)`, with `0·∞` read as 0.
pub fn gauge_product(kappa_x: f64, polar_y: f64) -> f64 {
    if kappa_x == 0.0 || polar_y == 0.0 {
        0.0
    } else {
        kappa_x * polar_y
    }
}

/// `⟨x, y⟩ ≤ κ(x)·κ°(y)` slack (positive when the inequality holds strictly).
pub fn polar_gauge_slack(g: &GaugeSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(gauge_product(g.eval(x)?, g.polar_eval(y)?) - dot(x, y))
}
