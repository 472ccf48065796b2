//! Piecewise linear-quadratic penalties `g(y) = sup_{u ∈ U} {⟨u, y⟩ − ½‖Lu‖²}`
//! with `U = {u : Wu ≤ w}`, and the conic description of the perspective-dual
//! feasible set they induce.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{capability, check_dim, Error, Result};
use crate::linalg::{dot, nnls, norm2, solve_dense, sqrt, Cholesky};
use crate::model::DenseMap;

/// Largest `ℓ` accepted by the active-set enumeration for general data.
pub const MAX_GENERAL_DIM: usize = 8;

/// Relative slack for membership in `U`.
const U_TOL: f64 = 1e-12;

/// Box data `U = Π [−lower_i, upper_i]` with diagonal `L`.
#[derive(Debug, Clone, PartialEq)]
struct BoxForm {
    lower: Vec<f64>,
    upper: Vec<f64>,
    l_diag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlqSpec {
    w_mat: DenseMap,
    w_vec: Vec<f64>,
    l_mat: DenseMap,
    boxed: Option<BoxForm>,
    bounded: bool,
    l_nonsingular: bool,
}

impl PlqSpec {
    pub fn new(w_mat: DenseMap, w_vec: Vec<f64>, l_mat: DenseMap) -> Result<Self> {
        let ell = w_mat.cols();
        check_dim(w_mat.rows(), w_vec.len())?;
        check_dim(ell, l_mat.rows())?;
        check_dim(ell, l_mat.cols())?;
        if w_vec.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "w must be nonnegative so that U contains the origin".into(),
            ));
        }
        let boxed = detect_box(&w_mat, &w_vec, &l_mat);
        let bounded = match &boxed {
            Some(b) => b.lower.iter().chain(&b.upper).all(|v| v.is_finite()),
            None => rows_positively_span(&w_mat),
        };
        let q = l_mat.gram();
        let l_nonsingular = ell == 0 || Cholesky::new(ell, &q).is_some();
        if boxed.is_none() && ell > MAX_GENERAL_DIM {
            return Err(capability(
                "plq",
                format!("general PLQ data limited to dimension {MAX_GENERAL_DIM}, got {ell}"),
            ));
        }
        Ok(Self {
            w_mat,
            w_vec,
            l_mat,
            boxed,
            bounded,
            l_nonsingular,
        })
    }

    /// Separable Huber structure `W = [I; −I]`, `w = η·1`, `L = √η·I`.
    pub fn huber(eta: f64, m: usize) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "huber eta must be positive, got {eta}"
            )));
        }
        let mut w = vec![0.0; 2 * m * m];
        for i in 0..m {
            w[i * m + i] = 1.0;
            w[(m + i) * m + i] = -1.0;
        }
        let w_mat = DenseMap::new(2 * m, m, w)?;
        Self::new(
            w_mat,
            vec![eta; 2 * m],
            DenseMap::diagonal(&vec![sqrt(eta); m]),
        )
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.w_mat.cols()
    }

    pub fn w_mat(&self) -> &DenseMap {
        &self.w_mat
    }

    pub fn w_vec(&self) -> &[f64] {
        &self.w_vec
    }

    pub fn l_mat(&self) -> &DenseMap {
        &self.l_mat
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// `g` is finite on all of ℝ^ℓ when `U` is bounded or `L` is nonsingular.
    pub fn is_finite_everywhere(&self) -> bool {
        self.bounded || self.l_nonsingular
    }

    fn in_u(&self, u: &[f64]) -> bool {
        let wu = self.w_mat.apply(u);
        wu.iter()
            .zip(&self.w_vec)
            .all(|(a, b)| *a <= b + U_TOL * (1.0 + b.abs()))
    }

    /// A maximizer `u*` of the defining supremum, which is also a subgradient
    /// of `g` at `y`.
    pub fn maximizer(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dimension(), y.len())?;
        if let Some(b) = &self.boxed {
            return Ok(y
                .iter()
                .enumerate()
                .map(|(i, &yi)| {
                    let l2 = b.l_diag[i] * b.l_diag[i];
                    if l2 > 0.0 {
                        (yi / l2).clamp(-b.lower[i], b.upper[i])
                    } else if yi > 0.0 {
                        b.upper[i]
                    } else if yi < 0.0 {
                        -b.lower[i]
                    } else {
                        0.0
                    }
                })
                .collect());
        }
        if !self.is_finite_everywhere() {
            return Err(capability(
                "plq",
                "supremum may be unbounded: U is unbounded and L is singular",
            ));
        }
        self.enumerate_active_sets(y)
    }

    /// Active-set enumeration: every face of `U` with a nonsingular KKT system
    /// contributes its stationary point when feasible; the best one wins.
    fn enumerate_active_sets(&self, y: &[f64]) -> Result<Vec<f64>> {
        let ell = self.dimension();
        let k = self.w_mat.rows();
        let q = self.l_mat.gram();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut subset: Vec<usize> = Vec::with_capacity(ell);
        let mut consider = |s: &[usize], best: &mut Option<(f64, Vec<f64>)>| {
            let dim = ell + s.len();
            let mut kkt = vec![0.0; dim * dim];
            let mut rhs = vec![0.0; dim];
            for i in 0..ell {
                for j in 0..ell {
                    kkt[i * dim + j] = q[i * ell + j];
                }
                rhs[i] = y[i];
            }
            for (p, &r) in s.iter().enumerate() {
                for j in 0..ell {
                    let wv = self.w_mat.get(r, j);
                    kkt[(ell + p) * dim + j] = wv;
                    kkt[j * dim + ell + p] = wv;
                }
                rhs[ell + p] = self.w_vec[r];
            }
            if let Some(sol) = solve_dense(dim, &kkt, &rhs) {
                let u = &sol[..ell];
                if self.in_u(u) {
                    let lu = self.l_mat.apply(u);
                    let val = dot(u, y) - 0.5 * dot(&lu, &lu);
                    if best.as_ref().is_none_or(|(b, _)| val > *b) {
                        *best = Some((val, u.to_vec()));
                    }
                }
            }
        };
        type Best = Option<(f64, Vec<f64>)>;
        // depth-first walk over subsets of size ≤ ℓ
        fn walk(
            start: usize,
            k: usize,
            ell: usize,
            subset: &mut Vec<usize>,
            best: &mut Best,
            f: &mut dyn FnMut(&[usize], &mut Best),
        ) {
            f(subset, best);
            if subset.len() == ell {
                return;
            }
            for r in start..k {
                subset.push(r);
                walk(r + 1, k, ell, subset, best, f);
                subset.pop();
            }
        }
        walk(0, k, ell, &mut subset, &mut best, &mut consider);
        best.map(|(_, u)| u)
            .ok_or_else(|| capability("plq", "no stationary face found for the supremum"))
    }

    /// `g(y)`.
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        let u = self.maximizer(y)?;
        let lu = self.l_mat.apply(&u);
        Ok(dot(&u, y) - 0.5 * dot(&lu, &lu))
    }

    /// `g*(u) = δ_U(u) + ½‖Lu‖²`.
    pub fn conjugate_eval(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dimension(), u.len())?;
        if !self.in_u(u) {
            return Ok(f64::INFINITY);
        }
        let lu = self.l_mat.apply(u);
        Ok(0.5 * dot(&lu, &lu))
    }

    /// Minkowski gauge `γ_U(y) = max{0, max_i W_iᵀy / w_i}`; rows with
    /// `w_i = 0` give `+∞` when `W_iᵀy > 0` and are ignored otherwise.
    pub fn gauge_u(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dimension(), y.len())?;
        let wy = self.w_mat.apply(y);
        let scale = 1.0 + norm2(y);
        let mut g = 0.0f64;
        for (i, (a, w)) in wy.iter().zip(&self.w_vec).enumerate() {
            if *w > 0.0 {
                g = g.max(a / w);
            } else if *a > U_TOL * scale * (1.0 + norm2(self.w_mat.row(i))) {
                return Ok(f64::INFINITY);
            }
        }
        Ok(g)
    }

    /// Recession function `g^∞(d) = sup_{u ∈ U} ⟨u, d⟩`.
    pub fn recession(&self, d: &[f64]) -> Result<f64> {
        check_dim(self.dimension(), d.len())?;
        if let Some(b) = &self.boxed {
            return Ok(d
                .iter()
                .enumerate()
                .map(|(i, &di)| {
                    if di >= 0.0 {
                        di * b.upper[i]
                    } else {
                        -di * b.lower[i]
                    }
                })
                .filter(|v| *v != 0.0)
                .sum());
        }
        if !self.bounded {
            return Err(capability("plq", "support function of an unbounded U"));
        }
        // the maximum of a linear form over a polytope sits at a vertex
        let ell = self.dimension();
        let k = self.w_mat.rows();
        let mut best = f64::NEG_INFINITY;
        let mut idx: Vec<usize> = (0..ell).collect();
        loop {
            let mut a = Vec::with_capacity(ell * ell);
            for &r in &idx {
                a.extend_from_slice(self.w_mat.row(r));
            }
            let rhs: Vec<f64> = idx.iter().map(|&r| self.w_vec[r]).collect();
            if let Some(u) = solve_dense(ell, &a, &rhs) {
                if self.in_u(&u) {
                    best = best.max(dot(&u, d));
                }
            }
            // next combination of ℓ rows out of k
            let mut i = ell;
            loop {
                if i == 0 {
                    return Ok(best.max(0.0));
                }
                i -= 1;
                if idx[i] < k - ell + i {
                    idx[i] += 1;
                    for j in i + 1..ell {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// `δ_{ℝ₋}(μ) + max{γ_U(y), −(1/2μ)‖Ly‖²}`, reading the quadratic term as
    /// `δ_{0}(Ly)` at `μ = 0`.
    pub fn perspective_polar(&self, y: &[f64], mu: f64) -> Result<f64> {
        check_dim(self.dimension(), y.len())?;
        if mu > 0.0 {
            return Ok(f64::INFINITY);
        }
        let gamma = self.gauge_u(y)?;
        let ly = self.l_mat.apply(y);
        let ll = dot(&ly, &ly);
        let quad = if mu < 0.0 {
            -ll / (2.0 * mu)
        } else if ll == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(gamma.max(quad))
    }
}

fn detect_box(w_mat: &DenseMap, w_vec: &[f64], l_mat: &DenseMap) -> Option<BoxForm> {
    let ell = w_mat.cols();
    if w_mat.rows() != 2 * ell {
        return None;
    }
    for i in 0..ell {
        for j in 0..ell {
            let e = if i == j { 1.0 } else { 0.0 };
            if w_mat.get(i, j) != e || w_mat.get(ell + i, j) != -e {
                return None;
            }
            if i != j && l_mat.get(i, j) != 0.0 {
                return None;
            }
        }
    }
    Some(BoxForm {
        upper: w_vec[..ell].to_vec(),
        lower: w_vec[ell..].to_vec(),
        l_diag: (0..ell).map(|i| l_mat.get(i, i)).collect(),
    })
}

/// `{u : Wu ≤ 0} = {0}` exactly when the rows of `W` positively span ℝ^ℓ,
/// which is tested by projecting `±e_j` onto the cone they generate.
fn rows_positively_span(w: &DenseMap) -> bool {
    let ell = w.cols();
    let gt = w.transpose();
    for j in 0..ell {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; ell];
            e[j] = s;
            let lam = nnls(gt.rows(), gt.cols(), gt.entries(), &e);
            let p = gt.apply(&lam);
            if crate::linalg::dist2(&p, &e) > 1e-9 {
                return false;
            }
        }
    }
    true
}

/// Feasible set of the perspective dual for a gauge objective and a PLQ
/// constraint. Points are laid out as `v = (y, μ, ξ)` with `y ∈ ℝᵐ`:
///
/// ```text
/// ⟨b, y⟩ + μ − σξ = 1,  μ ≤ 0,  ξ ≥ 0,  Wy ≤ ξw,  ‖(2Ly, ξ + 2μ)‖ ≤ ξ − 2μ
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveDualFeasibleSet {
    pub b: Vec<f64>,
    pub sigma: f64,
    pub plq: PlqSpec,
}

/// Per-group constraint violations of a point in the perspective-dual set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetViolation {
    pub equality: f64,
    pub mu_sign: f64,
    pub xi_sign: f64,
    pub polyhedral: f64,
    pub cone: f64,
}

impl SetViolation {
    pub fn max(&self) -> f64 {
        self.equality
            .max(self.mu_sign)
            .max(self.xi_sign)
            .max(self.polyhedral)
            .max(self.cone)
    }
}

impl PerspectiveDualFeasibleSet {
    pub fn new(b: Vec<f64>, sigma: f64, plq: PlqSpec) -> Result<Self> {
        check_dim(plq.dimension(), b.len())?;
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(
                "sigma must be positive; use the zero-sigma gauge pathway instead".into(),
            ));
        }
        Ok(Self { b, sigma, plq })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn split<'a>(&self, v: &'a [f64]) -> (&'a [f64], f64, f64) {
        let m = self.m();
        (&v[..m], v[m], v[m + 1])
    }

    pub fn violation(&self, v: &[f64]) -> Result<SetViolation> {
        check_dim(self.m() + 2, v.len())?;
        let (y, mu, xi) = self.split(v);
        let equality = (dot(&self.b, y) + mu - self.sigma * xi - 1.0).abs();
        let wy = self.plq.w_mat.apply(y);
        let polyhedral = wy
            .iter()
            .zip(&self.plq.w_vec)
            .map(|(a, w)| a - xi * w)
            .fold(0.0, f64::max);
        let ly = self.plq.l_mat.apply(y);
        let lhs = libm::hypot(2.0 * norm2(&ly), xi + 2.0 * mu);
        let cone = (lhs - (xi - 2.0 * mu)).max(0.0);
        Ok(SetViolation {
            equality,
            mu_sign: mu.max(0.0),
            xi_sign: (-xi).max(0.0),
            polyhedral,
            cone,
        })
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        Ok(self.violation(v)?.max() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perspective::huber;
    use approx::assert_abs_diff_eq;

    fn vapnik() -> PlqSpec {
        // U = [0, 1]², evaluated at (y − ε, −y − ε) to produce max(|y| − ε, 0)
        let w =
            DenseMap::from_rows(&[&[-1.0, 0.0], &[0.0, -1.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        PlqSpec::new(
            w,
            vec![0.0, 0.0, 1.0, 1.0],
            DenseMap::new(2, 2, vec![0.0; 4]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn huber_structure_matches_closed_form() {
        let p = PlqSpec::huber(1.0, 1).unwrap();
        assert_eq!(p.eval(&[2.0]).unwrap(), 1.5);
        assert_eq!(p.eval(&[0.0]).unwrap(), 0.0);
        for eta in [0.3, 1.0, 2.5] {
            let p = PlqSpec::huber(eta, 3).unwrap();
            let y = [0.05, -1.7, 4.0];
            let expect: f64 = y.iter().map(|v| huber(*v, eta)).sum();
            assert_abs_diff_eq!(p.eval(&y).unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn vapnik_inside_tube_is_zero() {
        let p = vapnik();
        let eps = 0.5;
        let at = |y: f64| p.eval(&[y - eps, -y - eps]).unwrap();
        assert_eq!(at(0.2), 0.0);
        assert_abs_diff_eq!(at(1.25), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(at(-2.0), 1.5, epsilon = 1e-14);
        assert!(p.is_bounded());
    }

    #[test]
    fn general_enumeration_agrees_with_box_fast_path() {
        // the same box, but with rows permuted so the fast path is not taken
        let w =
            DenseMap::from_rows(&[&[0.0, -1.0], &[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let l = DenseMap::from_rows(&[&[1.0, 0.0], &[0.0, 0.5]]).unwrap();
        let general = PlqSpec::new(w, vec![2.0, 1.0, 1.0, 0.5], l.clone()).unwrap();
        let wb =
            DenseMap::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]]).unwrap();
        let boxed = PlqSpec::new(wb, vec![1.0, 0.5, 1.0, 2.0], l).unwrap();
        for y in [[0.3, -0.2], [5.0, 1.0], [-3.0, -4.0], [0.0, 0.0]] {
            assert_abs_diff_eq!(
                general.eval(&y).unwrap(),
                boxed.eval(&y).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                general.recession(&y).unwrap(),
                boxed.recession(&y).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn unbounded_u_with_singular_l_is_a_capability_error() {
        let w = DenseMap::from_rows(&[&[1.0, 0.0]]).unwrap();
        let p = PlqSpec::new(w, vec![1.0], DenseMap::new(2, 2, vec![0.0; 4]).unwrap()).unwrap();
        assert!(!p.is_bounded());
        assert!(matches!(p.eval(&[0.0, 1.0]), Err(Error::Capability { .. })));
    }

    #[test]
    fn negative_w_rejected() {
        let w = DenseMap::from_rows(&[&[1.0]]).unwrap();
        assert!(PlqSpec::new(w, vec![-1.0], DenseMap::identity(1)).is_err());
    }

    #[test]
    fn perspective_polar_examples() {
        let p = PlqSpec::huber(1.0, 1).unwrap();
        assert_eq!(p.perspective_polar(&[1.0], -1.0).unwrap(), 1.0);
        assert_eq!(p.perspective_polar(&[1.0], 0.5).unwrap(), f64::INFINITY);
        assert_eq!(p.perspective_polar(&[1.0], 0.0).unwrap(), f64::INFINITY);
        assert_eq!(p.perspective_polar(&[0.0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn gauge_u_ratio_test() {
        let p = vapnik();
        // rows with w_i = 0 act as cone faces
        assert_eq!(p.gauge_u(&[0.5, 0.25]).unwrap(), 0.5);
        assert_eq!(p.gauge_u(&[-0.5, 0.25]).unwrap(), f64::INFINITY);
        assert_eq!(p.gauge_u(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn conjugate_is_indicator_plus_quadratic() {
        let p = PlqSpec::huber(2.0, 2).unwrap();
        assert_abs_diff_eq!(
            p.conjugate_eval(&[1.0, -2.0]).unwrap(),
            5.0,
            epsilon = 1e-14
        );
        assert_eq!(p.conjugate_eval(&[2.1, 0.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn feasible_set_membership() {
        let q = PerspectiveDualFeasibleSet::new(vec![1.0], 0.1, PlqSpec::huber(1.0, 1).unwrap())
            .unwrap();
        // y = 3, ξ = 4 and μ from the equality: 3 + μ − 0.4 = 1
        let v = [3.0, -1.6, 4.0];
        let viol = q.violation(&v).unwrap();
        assert!(viol.equality <= 1e-15);
        assert!(q.contains(&v, 1e-8).unwrap());
        let bumped = [3.0, -1.6 + 2e-8, 4.0];
        assert!(!q.contains(&bumped, 1e-8).unwrap());
        assert!(!q.contains(&[4.5, -3.1, 4.0], 1e-8).unwrap());
        assert!(
            PerspectiveDualFeasibleSet::new(vec![1.0], 0.0, PlqSpec::huber(1.0, 1).unwrap())
                .is_err()
        );
    }
}
