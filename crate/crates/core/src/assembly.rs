//! Galerkin assembly of the Helmholtz system on a spline space.
//!
//! The discrete operator represents `-Δ - k²`:
//! `A = S - K₂ - i k N`, with `S` the stiffness matrix, `K₂` the
//! `k²`-weighted mass matrix and `N` the boundary mass on absorbing edges.
//! Dirichlet degrees of freedom are eliminated; nonzero Dirichlet data is
//! moved to the right-hand side.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::problems::{BoundaryCondition, ModelProblem, WaveNumberField};
use crate::spline::{gauss_rule, BasisTable, KnotVector, SplineSpace};
use crate::C64;

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Element-by-element 1D assembly of `∫ w(x) (a φ_i' φ_j' + b φ_i φ_j) dx`.
///
/// Basis functions `i` and `j` overlap exactly when `|i - j| ≤ p`, so the
/// band is laid out up front and element matrices are added in place.
/// Element order fixes the summation order, which keeps results reproducible.
fn assemble_1d(kv: &KnotVector, weight: &(dyn Fn(f64) -> f64 + Sync), stiff: f64, mass: f64) -> CsrMatrix {
    let p = kv.degree();
    let n = kv.n_basis();
    let table = BasisTable::new(kv, gauss_rule(p));
    let first = |i: usize| i.saturating_sub(p);
    let last = |i: usize| (i + p).min(n - 1);
    let mut indptr = Vec::with_capacity(n + 1);
    indptr.push(0);
    for i in 0..n {
        indptr.push(indptr[i] + last(i) - first(i) + 1);
    }
    let indices: Vec<usize> = (0..n).flat_map(|i| first(i)..=last(i)).collect();
    let mut values = vec![0.0f64; indices.len()];
    let mut local = vec![0.0; (p + 1) * (p + 1)];
    for e in 0..kv.n_elements() {
        let (vals, ders) = table.element_ref(e);
        let x0 = kv.element_start(e);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, (x, wq)) in table.rule().mapped(x0, x0 + kv.span_width()).enumerate() {
            let w = wq * weight(x);
            let (v, d) = (&vals[q], &ders[q]);
            for a in 0..=p {
                for b in 0..=p {
                    local[a * (p + 1) + b] += w * (stiff * d[a] * d[b] + mass * v[a] * v[b]);
                }
            }
        }
        for a in 0..=p {
            let row = e + a;
            let base = indptr[row] - first(row);
            for b in 0..=p {
                values[base + e + b] += local[a * (p + 1) + b];
            }
        }
    }
    CsrMatrix::from_sorted_parts(n, n, indptr, indices, values.into_iter().map(c).collect())
}

fn unit(_: f64) -> f64 {
    1.0
}

pub fn stiffness_1d(kv: &KnotVector) -> CsrMatrix {
    assemble_1d(kv, &unit, 1.0, 0.0)
}

pub fn mass_1d(kv: &KnotVector) -> CsrMatrix {
    assemble_1d(kv, &unit, 0.0, 1.0)
}

/// `∫ ∇Φ_i · ∇Φ_j dΩ` on the full (unreduced) space.
pub fn assemble_stiffness(space: &SplineSpace) -> CsrMatrix {
    match space.dim() {
        1 => stiffness_1d(space.knots(0)),
        _ => {
            let (sx, mx) = (stiffness_1d(space.knots(0)), mass_1d(space.knots(0)));
            let (sy, my) = (stiffness_1d(space.knots(1)), mass_1d(space.knots(1)));
            let a = my.kron(&sx);
            a.linear_combination(c(1.0), &sy.kron(&mx), c(1.0)).expect("same shape")
        }
    }
}

/// `∫ w Φ_i Φ_j dΩ` with `w = 1` (`weight = None`) or `w = k(x, y)²`.
pub fn assemble_mass(space: &SplineSpace, weight: Option<&WaveNumberField>) -> CsrMatrix {
    match (space.dim(), weight) {
        (1, None) => mass_1d(space.knots(0)),
        (1, Some(field)) => {
            let f = |x: f64| field.value(x, 0.0).powi(2);
            assemble_1d(space.knots(0), &f, 0.0, 1.0)
        }
        (_, None) => mass_1d(space.knots(1)).kron(&mass_1d(space.knots(0))),
        (_, Some(WaveNumberField::Constant { k })) => assemble_mass(space, None).scale(c(k * k)),
        (_, Some(field)) => weighted_mass_2d(space, field),
    }
}

fn weighted_mass_2d(space: &SplineSpace, field: &WaveNumberField) -> CsrMatrix {
    let (kx, ky) = (space.knots(0), space.knots(1));
    let p = space.degree();
    let tx = BasisTable::new(kx, gauss_rule(p));
    let ty = BasisTable::new(ky, gauss_rule(p));
    let nx = kx.n_basis();
    let per_row: Vec<Vec<(usize, usize, f64)>> = (0..ky.n_elements())
        .into_par_iter()
        .map(|ey| {
            let by = ty.element(ey);
            let mut out = Vec::new();
            let nloc = (p + 1) * (p + 1);
            for ex in 0..kx.n_elements() {
                let bx = tx.element(ex);
                let mut local = vec![0.0; nloc * nloc];
                for qy in 0..by.points.len() {
                    for qx in 0..bx.points.len() {
                        let k = field.value(bx.points[qx], by.points[qy]);
                        let w = bx.weights[qx] * by.weights[qy] * k * k;
                        let vals: Vec<f64> = (0..nloc)
                            .map(|l| bx.local_values[qx][l % (p + 1)] * by.local_values[qy][l / (p + 1)])
                            .collect();
                        for a in 0..nloc {
                            for b in 0..nloc {
                                local[a * nloc + b] += w * vals[a] * vals[b];
                            }
                        }
                    }
                }
                for a in 0..nloc {
                    let ga = (ey + a / (p + 1)) * nx + ex + a % (p + 1);
                    for b in 0..nloc {
                        let gb = (ey + b / (p + 1)) * nx + ex + b % (p + 1);
                        out.push((ga, gb, local[a * nloc + b]));
                    }
                }
            }
            out
        })
        .collect();
    let triplets: Vec<_> = per_row.into_iter().flatten().collect();
    let n = space.n_dof();
    CsrMatrix::from_real_triplets(n, n, &triplets).expect("element indices are in range")
}

/// `∫_{Γ_R} Φ_i Φ_j dΓ` over the absorbing boundaries flagged in `robin`
/// (order `[x=0, x=1]` or `[x=0, x=1, y=0, y=1]`).
pub fn assemble_boundary_mass(space: &SplineSpace, robin: &[bool]) -> CsrMatrix {
    let n = space.n_dof();
    let corner = |kv: &KnotVector, last: bool| {
        let i = if last { kv.n_basis() - 1 } else { 0 };
        CsrMatrix::from_real_triplets(kv.n_basis(), kv.n_basis(), &[(i, i, 1.0)]).expect("in range")
    };
    let mut total = CsrMatrix::zeros(n, n);
    for (edge, &on) in robin.iter().enumerate() {
        if !on {
            continue;
        }
        let term = match (space.dim(), edge) {
            (1, e) => corner(space.knots(0), e == 1),
            (_, 0 | 1) => mass_1d(space.knots(1)).kron(&corner(space.knots(0), edge == 1)),
            (_, _) => corner(space.knots(1), edge == 3).kron(&mass_1d(space.knots(0))),
        };
        total = total.linear_combination(c(1.0), &term, c(1.0)).expect("same shape");
    }
    total
}

/// Values of all basis functions at `(x, y)` as sparse `(index, value)` pairs.
pub fn point_values(space: &SplineSpace, x: f64, y: f64) -> Result<Vec<(usize, f64)>> {
    let local = |kv: &KnotVector, t: f64| -> Result<Vec<(usize, f64)>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutsideDomain(format!("{t}")));
        }
        let e = kv.element_of(t);
        let (v, _) = kv.local_basis(e, t);
        Ok(v.into_iter().enumerate().map(|(a, val)| (e + a, val)).collect())
    };
    let vx = local(space.knots(0), x)?;
    if space.dim() == 1 {
        return Ok(vx);
    }
    let vy = local(space.knots(1), y)?;
    let nx = space.knots(0).n_basis();
    Ok(vy.iter().flat_map(|&(j, wy)| vx.iter().map(move |&(i, wx)| (j * nx + i, wx * wy))).collect())
}

/// Load vector on the full space: `f_i = Φ_i(x')` for a unit point source.
pub fn assemble_load(space: &SplineSpace, source: Option<(f64, f64)>) -> Result<Vec<C64>> {
    let mut f = vec![c(0.0); space.n_dof()];
    if let Some((xs, ys)) = source {
        for (i, v) in point_values(space, xs, ys)? {
            f[i] += c(v);
        }
    }
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub space: SplineSpace,
    pub problem: ModelProblem,
    /// `S - K₂ - ikN` on the retained degrees of freedom.
    pub a: CsrMatrix,
    /// `K₂`, the `k²`-weighted mass matrix, on the retained degrees of freedom.
    pub k2_mass: CsrMatrix,
    pub rhs: Vec<C64>,
    /// Retained univariate indices per dimension; the retained set is their product.
    pub retained_per_dim: Vec<Vec<usize>>,
    /// Global indices of retained degrees of freedom, in system order.
    pub retained_dofs: Vec<usize>,
    /// Eliminated degrees of freedom and their prescribed values.
    pub dirichlet: Vec<(usize, C64)>,
}

impl DiscreteSystem {
    pub fn n(&self) -> usize {
        self.retained_dofs.len()
    }

    /// Retained grid shape `[nx]` or `[nx, ny]`.
    pub fn grid_shape(&self) -> Vec<usize> {
        self.retained_per_dim.iter().map(Vec::len).collect()
    }

    /// Coefficients on the full space: retained values plus Dirichlet data.
    pub fn embed(&self, u: &[C64]) -> Vec<C64> {
        let mut full = vec![c(0.0); self.space.n_dof()];
        for (&g, &v) in self.retained_dofs.iter().zip(u) {
            full[g] = v;
        }
        for &(g, v) in &self.dirichlet {
            full[g] = v;
        }
        full
    }

    /// Evaluates the spline with full coefficient vector `coeffs` at `(x, y)`.
    pub fn evaluate(&self, coeffs: &[C64], x: f64, y: f64) -> Result<C64> {
        Ok(point_values(&self.space, x, y)?.into_iter().map(|(i, v)| coeffs[i] * v).sum())
    }
}

fn retained_1d(n: usize, lo: BoundaryCondition, hi: BoundaryCondition) -> Vec<usize> {
    let start = usize::from(lo.is_dirichlet());
    let end = n - usize::from(hi.is_dirichlet());
    (start..end).collect()
}

/// Assembles `problem` on `n_elements` uniform elements per dimension with order `p`.
pub fn build_system(problem: &ModelProblem, n_elements: usize, p: usize) -> Result<DiscreteSystem> {
    let dim = problem.dim();
    if problem.bc.len() != 2 * dim {
        return Err(Error::InvalidArgument(format!(
            "{} boundary conditions given for a {dim}D problem",
            problem.bc.len()
        )));
    }
    if !problem.wave.is_constant() && problem.bc.contains(&BoundaryCondition::Robin) {
        return Err(Error::InvalidArgument("absorbing edges need a constant wave number".into()));
    }
    let space = SplineSpace::uniform(dim, n_elements, p)?;
    let k = problem.wave.base_k();
    let robin: Vec<bool> = problem.bc.iter().map(|b| !b.is_dirichlet()).collect();

    let retained_per_dim: Vec<Vec<usize>> = (0..dim)
        .map(|d| retained_1d(space.knots(d).n_basis(), problem.bc[2 * d], problem.bc[2 * d + 1]))
        .collect();
    let nx = space.knots(0).n_basis();
    let retained_dofs: Vec<usize> = if dim == 1 {
        retained_per_dim[0].clone()
    } else {
        retained_per_dim[1]
            .iter()
            .flat_map(|&j| retained_per_dim[0].iter().map(move |&i| j * nx + i))
            .collect()
    };
    let mut is_retained = vec![false; space.n_dof()];
    for &g in &retained_dofs {
        is_retained[g] = true;
    }
    let mut dirichlet = Vec::new();
    for g in 0..space.n_dof() {
        if is_retained[g] {
            continue;
        }
        let (i, j) = space.multi_index(g);
        let mut value = c(0.0);
        let mut touch = |bc: BoundaryCondition, on: bool| {
            if on {
                if let Some(v) = bc.dirichlet_value() {
                    if v.norm() > value.norm() {
                        value = v;
                    }
                }
            }
        };
        touch(problem.bc[0], i == 0);
        touch(problem.bc[1], i == nx - 1);
        if dim == 2 {
            let ny = space.knots(1).n_basis();
            touch(problem.bc[2], j == 0);
            touch(problem.bc[3], j == ny - 1);
        }
        dirichlet.push((g, value));
    }
    let lifting_needed = dirichlet.iter().any(|(_, v)| v.norm() > 0.0);

    let stiffness = assemble_stiffness(&space);
    let k2_full = assemble_mass(&space, Some(&problem.wave));
    let bmass = assemble_boundary_mass(&space, &robin);
    let a_full = stiffness
        .linear_combination(c(1.0), &k2_full, c(-1.0))?
        .linear_combination(c(1.0), &bmass, C64::new(0.0, -k))?;

    let f_full = assemble_load(&space, problem.source)?;
    let mut rhs: Vec<C64> = retained_dofs.iter().map(|&g| f_full[g]).collect();
    if lifting_needed {
        let mut ud = vec![c(0.0); space.n_dof()];
        for &(g, v) in &dirichlet {
            ud[g] = v;
        }
        let lift = a_full.mul_vec(&ud);
        for (r, &g) in rhs.iter_mut().zip(&retained_dofs) {
            *r -= lift[g];
        }
    }
    let a = a_full.submatrix(&retained_dofs, &retained_dofs);
    let k2_mass = k2_full.submatrix(&retained_dofs, &retained_dofs);
    Ok(DiscreteSystem { space, problem: problem.clone(), a, k2_mass, rhs, retained_per_dim, retained_dofs, dirichlet })
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::linalg::solvers::Solve;
    use crate::problems::ProblemId;
    use crate::spline::build_open_uniform_knots;

    fn space1(n: usize, p: usize) -> SplineSpace {
        SplineSpace::uniform(1, n, p).unwrap()
    }

    #[test]
    fn linear_stiffness_and_mass_stencils() {
        let s = space1(8, 1);
        let h = 1.0 / 8.0;
        let st = assemble_stiffness(&s);
        let m = assemble_mass(&s, None);
        for (col, expect) in [(2, -1.0 / h), (3, 2.0 / h), (4, -1.0 / h)] {
            assert!((st.get(3, col).re - expect).abs() < 1e-12);
        }
        for (col, expect) in [(2, h / 6.0), (3, 2.0 * h / 3.0), (4, h / 6.0)] {
            assert!((m.get(3, col).re - expect).abs() < 1e-14);
        }
        let row_sum: f64 = (0..9).map(|j| st.get(4, j).re).sum();
        assert!(row_sum.abs() < 1e-12);
        let total: f64 = m.triplets().map(|t| t.2.re).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn quadratic_stiffness_row_matches_adaptive_quadrature() {
        let kv = build_open_uniform_knots(6, 2).unwrap();
        let st = stiffness_1d(&kv);
        let i = 3;
        for j in 0..kv.n_basis() {
            let mut oracle = 0.0;
            for e in 0..kv.n_elements() {
                let a = kv.element_start(e);
                let f = |x: f64| kv.eval_deriv(i, x).unwrap() * kv.eval_deriv(j, x).unwrap();
                oracle += crate::spline::tests::adaptive_simpson(&f, a, a + kv.span_width(), 1e-14);
            }
            assert!((st.get(i, j).re - oracle).abs() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn constant_field_mass_is_scaled_mass() {
        let s = SplineSpace::uniform(2, 4, 2).unwrap();
        let m = assemble_mass(&s, None);
        let k2 = assemble_mass(&s, Some(&WaveNumberField::constant(3.0)));
        assert!(k2.max_abs_diff(&m.scale(c(9.0))) < 1e-12);
        // the tensor loop with a flat step field reproduces the Kronecker form
        let flat = WaveNumberField::step(3.0, [[1.0; 4]; 4]).unwrap();
        let k2s = assemble_mass(&s, Some(&flat));
        assert!(k2s.max_abs_diff(&k2) < 1e-12);
    }

    #[test]
    fn boundary_mass_cases() {
        let s = space1(5, 3);
        assert_eq!(assemble_boundary_mass(&s, &[false, false]).nnz(), 0);
        let n = assemble_boundary_mass(&s, &[false, true]);
        assert_eq!(n.nnz(), 1);
        assert_eq!(n.get(7, 7), c(1.0));
        // 2D edge trace equals the 1D mass matrix along that edge
        let s2 = SplineSpace::uniform(2, 4, 1).unwrap();
        let n2 = assemble_boundary_mass(&s2, &[false, true, false, false]);
        let m1 = mass_1d(s2.knots(1));
        for j in 0..5 {
            for jj in 0..5 {
                assert!((n2.get(j * 5 + 4, jj * 5 + 4) - m1.get(j, jj)).norm() < 1e-15);
            }
        }
        assert_eq!(n2.nnz(), m1.nnz());
    }

    #[test]
    fn point_source_load() {
        let s = space1(4, 1);
        let f = assemble_load(&s, Some((0.5, 0.0))).unwrap();
        assert_eq!(f[2], c(1.0));
        for p in 1..=5 {
            let s = space1(7, p);
            let f = assemble_load(&s, Some((0.4321, 0.0))).unwrap();
            let total: C64 = f.iter().sum();
            assert!((total - c(1.0)).norm() < 1e-14);
        }
        assert!(assemble_load(&s, Some((1.5, 0.0))).is_err());
    }

    #[test]
    fn mp1a_lifting_uses_first_column() {
        let prob = ModelProblem::mp1a(3.0);
        let sys = build_system(&prob, 8, 2).unwrap();
        let space = SplineSpace::uniform(1, 8, 2).unwrap();
        let st = assemble_stiffness(&space);
        let m = assemble_mass(&space, None);
        for (r, &g) in sys.rhs.iter().zip(&sys.retained_dofs) {
            let a_g0 = st.get(g, 0) - m.get(g, 0) * 9.0;
            assert!((*r + a_g0).norm() < 1e-12);
        }
        let last = sys.n() - 1;
        let expected = st.get(10 - 1, 10 - 1) - m.get(9, 9) * 9.0 - C64::new(0.0, 3.0);
        assert!((sys.a.get(last, last) - expected).norm() < 1e-12);
    }

    #[test]
    fn dirichlet_values_survive_embedding() {
        let sys = build_system(&ModelProblem::mp1a(2.0), 6, 3).unwrap();
        let u = vec![C64::new(0.3, 0.1); sys.n()];
        let full = sys.embed(&u);
        assert_eq!(full[0], c(1.0));
        assert!((sys.evaluate(&full, 0.0, 0.0).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_wavenumber_gives_positive_definite_stiffness() {
        let sys = build_system(&ModelProblem::mp1b(0.0, 0.5), 16, 1).unwrap();
        let ev = crate::linalg::dense_eigenvalues(&sys.a, 100).unwrap();
        assert!(ev.iter().all(|l| l.re > 0.0 && l.im.abs() < 1e-10));
    }

    #[test]
    fn generalized_eigenvalues_approach_dirichlet_spectrum() {
        let sys = build_system(&ModelProblem::mp1b(0.0, 0.5), 64, 1).unwrap();
        let s = sys.a.to_dense();
        let m = assemble_mass(&sys.space, None).submatrix(&sys.retained_dofs, &sys.retained_dofs).to_dense();
        let ev = m.partial_piv_lu().solve(&s).eigenvalues().unwrap();
        let min = ev.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((min - pi2).abs() < 0.01 * pi2, "min={min}");
    }

    #[test]
    fn table_sizes() {
        let n = crate::problems::resolution_for(100.0, 0.625);
        let sys = build_system(&ModelProblem::mp1b(100.0, 0.5), n, 1).unwrap();
        assert_eq!(sys.space.n_dof(), 161);
        assert_eq!(sys.n(), 159);
        let sys2 = build_system(&ModelProblem::build(ProblemId::Mp2a, 10.0).unwrap(), 8, 2).unwrap();
        assert_eq!(sys2.grid_shape(), vec![8, 8]);
        assert_eq!(sys2.n(), 64);
    }

    #[test]
    fn element_order_does_not_matter() {
        // assembling the elements in reverse order gives the same matrix
        let kv = build_open_uniform_knots(9, 3).unwrap();
        let forward = stiffness_1d(&kv);
        let table = BasisTable::new(&kv, gauss_rule(3));
        let mut t = Vec::new();
        for e in (0..kv.n_elements()).rev() {
            let be = table.element(e);
            for a in 0..4 {
                for b in 0..4 {
                    let v: f64 = (0..be.points.len())
                        .map(|q| be.weights[q] * be.local_derivs[q][a] * be.local_derivs[q][b])
                        .sum();
                    t.push((e + a, e + b, v));
                }
            }
        }
        let reverse = CsrMatrix::from_real_triplets(12, 12, &t).unwrap();
        assert!(forward.max_abs_diff(&reverse) < 1e-12);
    }
}
