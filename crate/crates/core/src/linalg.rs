//! Small dense linear-algebra kernels used throughout the crate.
//!
//! Everything here works on row-major slices; sizes are desk scale (a few
//! hundred at most) so the routines favor clarity over blocking.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(alpha: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| alpha * x).collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factor the `n × n` row-major matrix `a`. Returns `None` when a pivot is
    /// not strictly positive.
    pub fn new(n: usize, a: &[f64]) -> Option<Self> {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return None;
                    }
                    l[i * n + i] = sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(Self { n, l })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Solve the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve_dense(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    m[r * n + k] -= f * m[col * n + k];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= m[i * n + k] * x[k];
        }
        x[i] = s / m[i * n + i];
    }
    Some(x)
}

/// Nonnegative least squares `min ‖C t − d‖₂ s.t. t ≥ 0` by the Lawson–Hanson
/// active-set method. `c` is `rows × cols`, row-major.
pub fn nnls(rows: usize, cols: usize, c: &[f64], d: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; cols];
    let mut passive = vec![false; cols];
    let tol = 1e-12 * (1.0 + c.iter().fold(0.0f64, |s, v| s.max(v.abs())));
    let residual_grad = |t: &[f64]| -> Vec<f64> {
        // w = Cᵀ(d − C t)
        let mut r = d.to_vec();
        for i in 0..rows {
            for j in 0..cols {
                r[i] -= c[i * cols + j] * t[j];
            }
        }
        (0..cols)
            .map(|j| (0..rows).map(|i| c[i * cols + j] * r[i]).sum())
            .collect()
    };
    let max_outer = 3 * cols + 10;
    for _ in 0..max_outer {
        let w = residual_grad(&t);
        let mut best = None;
        for j in 0..cols {
            if !passive[j] && w[j] > tol && best.is_none_or(|b: usize| w[j] > w[b]) {
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        passive[j] = true;
        for _ in 0..=3 * cols {
            let idx: Vec<usize> = (0..cols).filter(|&k| passive[k]).collect();
            let s = least_squares_columns(rows, cols, c, d, &idx);
            let mut z = vec![0.0; cols];
            for (p, &k) in idx.iter().enumerate() {
                z[k] = s[p];
            }
            if idx.iter().all(|&k| z[k] > 0.0) {
                t = z;
                break;
            }
            let mut alpha = 1.0f64;
            for &k in &idx {
                if z[k] <= 0.0 {
                    let denom = t[k] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(t[k] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for k in 0..cols {
                t[k] += alpha * (z[k] - t[k]);
            }
            for &k in &idx {
                if t[k] <= tol {
                    t[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
    t
}

/// Least squares restricted to the listed columns of `c`, solved through the
/// normal equations with a tiny Tikhonov shift for rank deficiency.
fn least_squares_columns(
    rows: usize,
    cols: usize,
    c: &[f64],
    d: &[f64],
    idx: &[usize],
) -> Vec<f64> {
    let k = idx.len();
    let mut g = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for (p, &a) in idx.iter().enumerate() {
        for (q, &b) in idx.iter().enumerate() {
            g[p * k + q] = (0..rows).map(|i| c[i * cols + a] * c[i * cols + b]).sum();
        }
        rhs[p] = (0..rows).map(|i| c[i * cols + a] * d[i]).sum();
    }
    let trace: f64 = (0..k).map(|p| g[p * k + p]).sum::<f64>().max(1.0);
    if let Some(ch) = Cholesky::new(k, &g) {
        return ch.solve(&rhs);
    }
    for p in 0..k {
        g[p * k + p] += 1e-12 * trace;
    }
    Cholesky::new(k, &g)
        .map(|ch| ch.solve(&rhs))
        .unwrap_or_else(|| vec![0.0; k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let ch = Cholesky::new(2, &a).unwrap();
        let x = ch.solve(&[2.0, 1.0]);
        assert_abs_diff_eq!(4.0 * x[0] + 2.0 * x[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(2.0 * x[0] + 3.0 * x[1], 1.0, epsilon = 1e-14);
        assert!(Cholesky::new(2, &[1.0, 2.0, 2.0, 1.0]).is_none());
    }

    #[test]
    fn dense_solve_with_pivoting() {
        let a = [0.0, 1.0, 1.0, 0.0];
        let x = solve_dense(2, &a, &[3.0, 4.0]).unwrap();
        assert_eq!(x, vec![4.0, 3.0]);
        assert!(solve_dense(2, &[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn nnls_matches_hand_solution() {
        // min (t0 - 1)^2 + (t1 + 1)^2, t >= 0  =>  t = (1, 0)
        let c = [1.0, 0.0, 0.0, 1.0];
        let t = nnls(2, 2, &c, &[1.0, -1.0]);
        assert_abs_diff_eq!(t[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nnls_kkt_on_overdetermined_system() {
        let c = [1.0, 2.0, 3.0, 1.0, -1.0, 0.5, 0.2, 0.1];
        let d = [1.0, -2.0, 0.3, 4.0];
        let t = nnls(4, 2, &c, &d);
        let mut r = d.to_vec();
        for i in 0..4 {
            for j in 0..2 {
                r[i] -= c[i * 2 + j] * t[j];
            }
        }
        for j in 0..2 {
            let g: f64 = (0..4).map(|i| c[i * 2 + j] * r[i]).sum();
            assert!(t[j] >= 0.0);
            assert!(g <= 1e-10);
            assert!((t[j] * g).abs() <= 1e-10);
        }
    }
}
