//! Slow reference computations used to cross-check the closed forms.
//!
//! None of these are on a production path: they trade accuracy and speed for
//! independence from the formulas they check.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::Result;
use crate::gauges::GaugeSpec;
use crate::linalg::{dot, norm2, sqrt};

/// Number of sphere samples used by [`numeric_polar`].
pub const POLAR_SAMPLES: usize = 10_000;

/// Deterministic points on the unit sphere of `ℝⁿ`, preceded by the `2n`
/// signed coordinate vectors.
pub fn sphere_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count + 2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = alloc::vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    while out.len() < count + 2 * n {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nv = norm2(&v);
        if nv > 1e-12 {
            out.push(v.iter().map(|x| x / nv).collect());
        }
    }
    out
}

/// Polar gauge from its definition `inf{μ > 0 : ⟨x,y⟩ ≤ μκ(x) ∀x}`, with the
/// universal quantifier checked on [`sphere_samples`].
///
/// The smallest admissible `μ` is bisected to relative precision `1e-12`.
/// Directions with `κ(x) = 0` and `⟨x,y⟩ > 0` give `+∞`. The answer is a lower
/// bound that is exact when a maximizing direction is among the samples.
pub fn numeric_polar(g: &GaugeSpec, y: &[f64], samples: &[Vec<f64>]) -> Result<f64> {
    let mut pairs = Vec::with_capacity(samples.len());
    for x in samples {
        let k = g.eval(x)?;
        let xy = dot(x, y);
        if k == 0.0 && xy > 0.0 {
            return Ok(f64::INFINITY);
        }
        if k.is_finite() && xy > 0.0 {
            pairs.push((xy, k));
        }
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let admissible = |mu: f64| pairs.iter().all(|(xy, k)| *xy <= mu * k);
    let mut hi = 1.0;
    while !admissible(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Euclidean projection of `v` onto a closed convex subset of the hyperplane
/// `⟨n, p⟩ = 1`, by exhaustive search over rays.
///
/// The nearest point of the set is the first point hit along the best ray from
/// the foot of `v` on the hyperplane. Ray directions are scanned on an angular
/// grid and refined locally; each first hit is located by a marching scan of
/// step `5e-3` up to `max_reach` followed by bisection. The hyperplane must
/// have dimension 2 or 3 (`n` of length 3 or 4). Returns `None` if no ray
/// reaches the set.
pub fn hyperplane_ray_projection<C>(
    contains: C,
    n: &[f64],
    v: &[f64],
    max_reach: f64,
) -> Option<Vec<f64>>
where
    C: Fn(&[f64]) -> bool,
{
    let d = n.len();
    assert!(
        d == 3 || d == 4,
        "hyperplane_ray_projection supports ambient dimension 3 or 4"
    );
    let nn = dot(n, n);
    let shift = (dot(n, v) - 1.0) / nn;
    let foot: Vec<f64> = (0..d).map(|i| v[i] - shift * n[i]).collect();
    if contains(&foot) {
        return Some(foot);
    }

    // orthonormal basis of the directions inside the hyperplane
    let unit_n: Vec<f64> = n.iter().map(|x| x / sqrt(nn)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        let mut e = alloc::vec![0.0; d];
        e[k] = 1.0;
        let c = dot(&e, &unit_n);
        for i in 0..d {
            e[i] -= c * unit_n[i];
        }
        for q in &basis {
            let c = dot(&e, q);
            for i in 0..d {
                e[i] -= c * q[i];
            }
        }
        let ne = norm2(&e);
        if ne > 1e-6 {
            basis.push(e.iter().map(|x| x / ne).collect());
        }
        if basis.len() == d - 1 {
            break;
        }
    }

    // direction from angles: a circle for planes, a sphere for 3-spaces
    let direction = |ang: (f64, f64)| -> Vec<f64> {
        let coef: Vec<f64> = if d == 3 {
            alloc::vec![libm::cos(ang.0), libm::sin(ang.0)]
        } else {
            let sp = libm::sin(ang.1);
            alloc::vec![
                sp * libm::cos(ang.0),
                sp * libm::sin(ang.0),
                libm::cos(ang.1)
            ]
        };
        (0..d)
            .map(|i| coef.iter().zip(&basis).map(|(c, q)| c * q[i]).sum())
            .collect()
    };
    let first_hit = |ang: (f64, f64), hint: f64| -> f64 {
        let dir = direction(ang);
        let at = |t: f64| -> Vec<f64> { (0..d).map(|i| foot[i] + t * dir[i]).collect() };
        let bisect = |mut lo: f64, mut hi: f64| {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if contains(&at(mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        // the hits along a ray form an interval not containing 0, so any
        // inside point brackets the first hit
        let probe = hint * (1.0 + 1e-3);
        if hint.is_finite() && contains(&at(probe)) {
            return bisect(0.0, probe);
        }
        let step = 5e-3;
        let marches = (max_reach / step) as usize + 1;
        for j in 1..=marches {
            let t = j as f64 * step;
            if contains(&at(t)) {
                return bisect(t - step, t);
            }
        }
        f64::INFINITY
    };

    let pi = core::f64::consts::PI;
    let (n0, n1) = if d == 3 { (720, 1) } else { (120, 60) };
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for i in 0..n0 {
        for j in 0..n1 {
            let ang = (
                2.0 * pi * i as f64 / n0 as f64,
                pi * (j as f64 + 0.5) / n1 as f64,
            );
            let t = first_hit(ang, f64::INFINITY);
            if t < best.0 {
                best = (t, ang);
            }
        }
    }
    if !best.0.is_finite() {
        return None;
    }

    let (mut w0, mut w1) = (2.0 * pi / n0 as f64, pi / n1 as f64);
    let (r0, r1) = if d == 3 { (20, 0) } else { (10, 10) };
    for _ in 0..60 {
        let centre = best.1;
        for i in 0..=r0 {
            for j in 0..=r1 {
                let a0 = centre.0 - w0 + 2.0 * w0 * i as f64 / r0 as f64;
                let a1 = if r1 == 0 {
                    centre.1
                } else {
                    centre.1 - w1 + 2.0 * w1 * j as f64 / r1 as f64
                };
                let t = first_hit((a0, a1), best.0);
                if t < best.0 {
                    best = (t, (a0, a1));
                }
            }
        }
        w0 *= 0.5;
        w1 *= 0.5;
    }
    let dir = direction(best.1);
    Some((0..d).map(|i| foot[i] + best.0 * dir[i]).collect())
}

/// Fenchel conjugate `sup_x ⟨x,y⟩ − f(x)` over a one-dimensional grid on
/// `[lo, hi]` refined around the best point.
pub fn grid_conjugate_1d<F>(f: F, y: f64, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..40 {
        let n = 200;
        let mut arg = a;
        for i in 0..=n {
            let x = a + (b - a) * i as f64 / n as f64;
            let v = x * y - f(x);
            if v > best {
                best = v;
                arg = x;
            }
        }
        let w = (b - a) / n as f64;
        a = (arg - 2.0 * w).max(lo);
        b = (arg + 2.0 * w).min(hi);
    }
    best
}
