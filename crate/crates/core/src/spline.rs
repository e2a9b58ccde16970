//! B-spline spaces on the unit interval and unit square.
//!
//! Knot vectors are open and uniform: both end knots are repeated `p + 1`
//! times and all interior spans have width `h = 1 / n_elements`. Basis
//! functions are indexed from zero; `φ_j` is supported on
//! `[ξ_j, ξ_{j+p+1})`, with the last function closed at `ξ = 1`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Open uniform knot vector on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
    n_elements: usize,
}

/// Builds the open uniform knot vector with `n_elements` spans for B-splines of order `p`.
pub fn build_open_uniform_knots(n_elements: usize, p: usize) -> Result<KnotVector> {
    KnotVector::open_uniform(n_elements, p)
}

impl KnotVector {
    pub fn open_uniform(n_elements: usize, degree: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidArgument("a knot vector needs at least one element".into()));
        }
        if degree == 0 {
            return Err(Error::InvalidArgument("spline order must be at least 1".into()));
        }
        let mut knots = Vec::with_capacity(n_elements + 2 * degree + 1);
        knots.extend(std::iter::repeat_n(0.0, degree));
        knots.extend((0..=n_elements).map(|i| i as f64 / n_elements as f64));
        knots.extend(std::iter::repeat_n(1.0, degree));
        Ok(Self { knots, degree, n_elements })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// Width of every non-empty knot span.
    pub fn span_width(&self) -> f64 {
        1.0 / self.n_elements as f64
    }

    /// Number of univariate basis functions, `n_elements + p`.
    pub fn n_basis(&self) -> usize {
        self.n_elements + self.degree
    }

    /// Element (non-empty span) containing `xi`; the right end belongs to the last element.
    pub fn element_of(&self, xi: f64) -> usize {
        let e = (xi * self.n_elements as f64).floor();
        if e < 0.0 {
            0
        } else {
            (e as usize).min(self.n_elements - 1)
        }
    }

    /// Left end of element `e`.
    pub fn element_start(&self, e: usize) -> f64 {
        self.knots[e + self.degree]
    }

    /// Value of `φ_j` at `xi` by the Cox-de Boor recursion.
    pub fn eval(&self, j: usize, xi: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.cox_de_boor(j, self.degree, xi))
    }

    /// First derivative of `φ_j` at `xi`, taken from the right except at `xi = 1`.
    pub fn eval_deriv(&self, j: usize, xi: f64) -> Result<f64> {
        self.check_index(j)?;
        let p = self.degree;
        let k = &self.knots;
        let left = ratio(p as f64, k[j + p] - k[j]) * self.cox_de_boor(j, p - 1, xi);
        let right = ratio(p as f64, k[j + p + 1] - k[j + 1]) * self.cox_de_boor(j + 1, p - 1, xi);
        Ok(left - right)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.n_basis() {
            return Err(Error::IndexOutOfRange { index: j, len: self.n_basis() });
        }
        Ok(())
    }

    fn cox_de_boor(&self, j: usize, p: usize, xi: f64) -> f64 {
        let k = &self.knots;
        if p == 0 {
            let last_span = self.n_elements + self.degree - 1;
            let inside = k[j] <= xi && xi < k[j + 1];
            let closed_end = j == last_span && xi == k[j + 1];
            return if inside || closed_end { 1.0 } else { 0.0 };
        }
        let a = ratio(xi - k[j], k[j + p] - k[j]);
        let b = ratio(k[j + p + 1] - xi, k[j + p + 1] - k[j + 1]);
        let mut value = 0.0;
        if a != 0.0 {
            value += a * self.cox_de_boor(j, p - 1, xi);
        }
        if b != 0.0 {
            value += b * self.cox_de_boor(j + 1, p - 1, xi);
        }
        value
    }

    /// Values and first derivatives of the `p + 1` functions `φ_e .. φ_{e+p}`
    /// that are nonzero on element `e`, evaluated at `xi`.
    ///
    /// This is the triangular-table algorithm (de Boor / Piegl-Tiller); it does
    /// not go through [`KnotVector::eval`], which serves as its reference.
    pub fn local_basis(&self, e: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
        let p = self.degree;
        let span = e + p;
        let k = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - k[span + 1 - j];
            right[j] = k[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let values: Vec<f64> = (0..=p).map(|r| ndu[r][p]).collect();
        let derivs = (0..=p)
            .map(|r| {
                let mut d = 0.0;
                if r >= 1 {
                    d += ndu[r - 1][p - 1] / ndu[p][r - 1];
                }
                if r < p {
                    d -= ndu[r][p - 1] / ndu[p][r];
                }
                p as f64 * d
            })
            .collect();
        (values, derivs)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (pn, dpn) = legendre(n, x);
                dp = dpn;
                let dx = pn / dpn;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dpn) = legendre(n, x);
            dp = if dpn != 0.0 { dpn } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let dpn = n as f64 * (x * pn - p0) / (x * x - 1.0);
    (pn, dpn)
}

/// The `(p + 1)`-point rule used for all assembly integrals of order-`p` splines.
pub fn gauss_rule(p: usize) -> GaussRule {
    GaussRule::new(p + 1)
}

/// Basis data for one element at the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct BasisEval {
    pub element_index: usize,
    /// Physical quadrature points inside the element.
    pub points: Vec<f64>,
    /// Quadrature weights scaled by the element Jacobian.
    pub weights: Vec<f64>,
    /// `local_values[q][a]`: value of function `first_index + a` at point `q`.
    pub local_values: Vec<Vec<f64>>,
    pub local_derivs: Vec<Vec<f64>>,
    pub first_index: usize,
}

impl BasisEval {
    pub fn global_indices(&self) -> std::ops::Range<usize> {
        self.first_index..self.first_index + self.local_values.first().map_or(0, Vec::len)
    }
}

/// Per-element basis tables for a uniform knot vector.
///
/// Interior elements of a uniform open knot vector share the same local basis
/// in reference coordinates, so only the elements within `p` of a boundary get
/// their own table.
#[derive(Debug, Clone)]
pub struct BasisTable {
    kv: KnotVector,
    rule: GaussRule,
    classes: BTreeMap<(usize, usize), (Vec<Vec<f64>>, Vec<Vec<f64>>)>,
}

impl BasisTable {
    pub fn new(kv: &KnotVector, rule: GaussRule) -> Self {
        let mut classes = BTreeMap::new();
        for e in 0..kv.n_elements() {
            let key = Self::class_of(kv, e);
            classes.entry(key).or_insert_with(|| {
                let a = kv.element_start(e);
                let h = kv.span_width();
                let mut vals = Vec::with_capacity(rule.len());
                let mut ders = Vec::with_capacity(rule.len());
                for (x, _) in rule.mapped(a, a + h) {
                    let (v, d) = kv.local_basis(e, x);
                    vals.push(v);
                    ders.push(d);
                }
                (vals, ders)
            });
        }
        Self { kv: kv.clone(), rule, classes }
    }

    fn class_of(kv: &KnotVector, e: usize) -> (usize, usize) {
        let p = kv.degree();
        (e.min(p), (kv.n_elements() - 1 - e).min(p))
    }

    pub fn knots(&self) -> &KnotVector {
        &self.kv
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    pub fn element(&self, e: usize) -> BasisEval {
        let (vals, ders) = &self.classes[&Self::class_of(&self.kv, e)];
        let a = self.kv.element_start(e);
        let h = self.kv.span_width();
        let (points, weights) = self.rule.mapped(a, a + h).unzip();
        BasisEval {
            element_index: e,
            points,
            weights,
            local_values: vals.clone(),
            local_derivs: ders.clone(),
            first_index: e,
        }
    }

    /// Values and derivatives for element `e` without copying.
    pub fn element_ref(&self, e: usize) -> (&[Vec<f64>], &[Vec<f64>]) {
        let (vals, ders) = &self.classes[&Self::class_of(&self.kv, e)];
        (vals, ders)
    }
}

/// Tensor-product spline space in one or two dimensions.
///
/// Multivariate functions are numbered lexicographically with `x` fastest:
/// `(i, j) ↦ j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace {
    knots_per_dim: Vec<KnotVector>,
}

/// Builds the 1D space (`kv_y = None`) or the 2D tensor-product space.
pub fn tensor_space(kv_x: KnotVector, kv_y: Option<KnotVector>) -> SplineSpace {
    let mut knots_per_dim = vec![kv_x];
    knots_per_dim.extend(kv_y);
    SplineSpace { knots_per_dim }
}

impl SplineSpace {
    pub fn uniform(dim: usize, n_elements: usize, p: usize) -> Result<Self> {
        let kv = KnotVector::open_uniform(n_elements, p)?;
        match dim {
            1 => Ok(tensor_space(kv, None)),
            2 => Ok(tensor_space(kv.clone(), Some(kv))),
            _ => Err(Error::InvalidArgument(format!("unsupported dimension {dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.knots_per_dim.len()
    }

    pub fn knots(&self, axis: usize) -> &KnotVector {
        &self.knots_per_dim[axis]
    }

    pub fn knots_per_dim(&self) -> &[KnotVector] {
        &self.knots_per_dim
    }

    pub fn degree(&self) -> usize {
        self.knots_per_dim[0].degree()
    }

    /// Univariate basis counts per dimension.
    pub fn shape(&self) -> Vec<usize> {
        self.knots_per_dim.iter().map(KnotVector::n_basis).collect()
    }

    pub fn n_dof(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn global_index(&self, i: usize, j: usize) -> usize {
        j * self.knots_per_dim[0].n_basis() + i
    }

    pub fn multi_index(&self, g: usize) -> (usize, usize) {
        let nx = self.knots_per_dim[0].n_basis();
        (g % nx, g / nx)
    }

    /// Value of multivariate basis function `g` at `(x, y)`; `y` is ignored in 1D.
    pub fn eval(&self, g: usize, x: f64, y: f64) -> Result<f64> {
        if g >= self.n_dof() {
            return Err(Error::IndexOutOfRange { index: g, len: self.n_dof() });
        }
        let (i, j) = self.multi_index(g);
        let vx = self.knots_per_dim[0].eval(i, x)?;
        match self.knots_per_dim.get(1) {
            Some(kv) => Ok(vx * kv.eval(j, y)?),
            None => Ok(vx),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn knot_vectors_match_reference_layouts() {
        let kv = build_open_uniform_knots(3, 1).unwrap();
        let expected = [0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0];
        assert_eq!(kv.knots().len(), expected.len());
        for (a, b) in kv.knots().iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }
        assert_eq!(kv.n_basis(), 4);

        let kv = build_open_uniform_knots(3, 2).unwrap();
        let expected = [0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0];
        for (a, b) in kv.knots().iter().zip(expected) {
            assert!(close(*a, b, 1e-15));
        }

        let kv = build_open_uniform_knots(1, 1).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(kv.n_basis(), 2);
    }

    #[test]
    fn rejects_empty_or_constant_spaces() {
        assert!(build_open_uniform_knots(0, 2).is_err());
        assert!(build_open_uniform_knots(4, 0).is_err());
    }

    #[test]
    fn linear_hat_peaks_at_its_node() {
        let kv = build_open_uniform_knots(3, 1).unwrap();
        assert!(close(kv.eval(1, 1.0 / 3.0).unwrap(), 1.0, 1e-14));
        assert!(close(kv.eval(1, 0.5).unwrap(), 0.5, 1e-14));
        assert!(kv.eval(4, 0.2).is_err());
    }

    #[test]
    fn quadratic_middle_piece_matches_closed_form() {
        // On Ξ₂ = {0,0,0,1,2,3,3,3} the second function restricted to [1,2]
        // is 0.5 (2 - x)^2; the scaled space maps x -> x / 3.
        let kv = build_open_uniform_knots(3, 2).unwrap();
        for &x in &[1.1, 1.5, 1.9] {
            let expected = 0.5 * (2.0 - x) * (2.0 - x);
            assert!(close(kv.eval(1, x / 3.0).unwrap(), expected, 1e-14));
        }
        // third function on [1,2]: 0.5 x (2 - x) + 0.5 (3 - x)(x - 1)
        let x: f64 = 1.5;
        let expected = 0.5 * x * (2.0 - x) + 0.5 * (3.0 - x) * (x - 1.0);
        assert!(close(kv.eval(2, x / 3.0).unwrap(), expected, 1e-14));
    }

    #[test]
    fn hat_derivative_is_plus_minus_inverse_width() {
        let kv = build_open_uniform_knots(4, 1).unwrap();
        let h = kv.span_width();
        assert!(close(kv.eval_deriv(2, 0.3).unwrap(), 1.0 / h, 1e-12));
        assert!(close(kv.eval_deriv(2, 0.6).unwrap(), -1.0 / h, 1e-12));
    }

    #[test]
    fn derivatives_sum_to_zero() {
        for p in 1..=5 {
            let kv = build_open_uniform_knots(7, p).unwrap();
            for &x in &[0.01, 0.33, 0.5001, 0.97] {
                let s: f64 = (0..kv.n_basis()).map(|j| kv.eval_deriv(j, x).unwrap()).sum();
                assert!(s.abs() < 1e-10, "p={p} x={x} sum={s}");
            }
        }
    }

    #[test]
    fn quadratic_derivative_matches_central_difference() {
        let kv = build_open_uniform_knots(5, 2).unwrap();
        let step = 1e-6;
        for j in 0..kv.n_basis() {
            for &x in &[0.05, 0.27, 0.51, 0.73, 0.93] {
                let fd = (kv.eval(j, x + step).unwrap() - kv.eval(j, x - step).unwrap()) / (2.0 * step);
                assert!(close(kv.eval_deriv(j, x).unwrap(), fd, 1e-8), "j={j} x={x}");
            }
        }
    }

    #[test]
    fn interpolatory_end_points() {
        for p in 1..=5 {
            let kv = build_open_uniform_knots(6, p).unwrap();
            assert_eq!(kv.eval(0, 0.0).unwrap(), 1.0);
            assert_eq!(kv.eval(kv.n_basis() - 1, 1.0).unwrap(), 1.0);
            for j in 1..kv.n_basis() {
                assert_eq!(kv.eval(j, 0.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn local_algorithm_agrees_with_recursion() {
        for p in 1..=5 {
            let kv = build_open_uniform_knots(9, p).unwrap();
            for e in 0..kv.n_elements() {
                let x = kv.element_start(e) + 0.37 * kv.span_width();
                let (v, d) = kv.local_basis(e, x);
                for a in 0..=p {
                    assert!(close(v[a], kv.eval(e + a, x).unwrap(), 1e-13));
                    assert!(close(d[a], kv.eval_deriv(e + a, x).unwrap(), 1e-9));
                }
            }
        }
    }

    #[test]
    fn gauss_rules_are_standard() {
        let r = gauss_rule(1);
        assert_eq!(r.len(), 2);
        assert!(close(r.nodes[1], 1.0 / 3f64.sqrt(), 1e-15));
        assert!(close(r.nodes[0], -1.0 / 3f64.sqrt(), 1e-15));
        let integral: f64 = r.mapped(0.0, 1.0).map(|(x, w)| w * x * x).sum();
        assert!(close(integral, 1.0 / 3.0, 1e-15));
        for n in 1..=12 {
            let r = GaussRule::new(n);
            // exact for x^(2n-1) and x^(2n-2) on [0, 1]
            for deg in [2 * n - 2, 2 * n - 1] {
                let v: f64 = r.mapped(0.0, 1.0).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!(close(v, 1.0 / (deg + 1) as f64, 1e-14), "n={n} deg={deg}");
            }
        }
    }

    /// Adaptive Simpson quadrature, used as an oracle for the Gauss integrals.
    pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn gauss_squared_basis_matches_adaptive_quadrature() {
        let kv = build_open_uniform_knots(6, 2).unwrap();
        let table = BasisTable::new(&kv, gauss_rule(2));
        for j in 0..kv.n_basis() {
            let mut gauss = 0.0;
            for e in 0..kv.n_elements() {
                let be = table.element(e);
                if let Some(a) = be.global_indices().position(|g| g == j) {
                    for q in 0..be.points.len() {
                        gauss += be.weights[q] * be.local_values[q][a].powi(2);
                    }
                }
            }
            let mut oracle = 0.0;
            for e in 0..kv.n_elements() {
                let a = kv.element_start(e);
                let f = |x: f64| kv.eval(j, x).unwrap().powi(2);
                oracle += adaptive_simpson(&f, a, a + kv.span_width(), 1e-15);
            }
            assert!(close(gauss, oracle, 1e-12), "j={j} gauss={gauss} oracle={oracle}");
        }
    }

    #[test]
    fn tensor_space_counts_and_indices() {
        let s = tensor_space(build_open_uniform_knots(7, 1).unwrap(), None);
        assert_eq!(s.n_dof(), 8);
        let kv = build_open_uniform_knots(8, 1).unwrap();
        let s = tensor_space(kv.clone(), Some(kv));
        assert_eq!(s.n_dof(), 81);
        assert_eq!(s.global_index(2, 3), 29);
        assert_eq!(s.multi_index(29), (2, 3));
    }

    #[test]
    fn continuity_across_interior_knots() {
        for p in 2..=5 {
            let kv = build_open_uniform_knots(5, p).unwrap();
            let d = 1e-9;
            for e in 1..kv.n_elements() {
                let x = kv.element_start(e);
                let (vl, dl) = kv.local_basis(e - 1, x);
                let (vr, dr) = kv.local_basis(e, x);
                // element e-1 covers functions e-1..e-1+p, element e covers e..e+p
                for a in 1..=p {
                    assert!(close(vl[a], vr[a - 1], 1e-10));
                    assert!(close(dl[a], dr[a - 1], 1e-8 / d * d));
                }
                assert!(close(vl[0], 0.0, 1e-10) || p == 0);
            }
        }
    }
}
