//! Linear solvers: direct LU, fast diagonalization of Kronecker sums, and
//! preconditioned conjugate gradients.

use std::time::Instant;

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::Mat;

use crate::assembly::{laplacian_h_1d, EllipticOperator};
use crate::error::{Error, Result};
use crate::grid::{Region, TensorGrid};
use crate::sparse::CsrMatrix;

/// Dense LU is used below this many unknowns, sparse LU above.
pub const DENSE_LIMIT: usize = 2000;
/// Largest accepted relative residual of a direct solve.
pub const DIRECT_RESIDUAL_TOL: f64 = 1e-10;
/// Default relative residual target of [`pcg`].
pub const DEFAULT_PCG_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// Zero for direct and fast solves.
    pub iterations: usize,
    /// `‖b − A x‖₂ / ‖b‖₂`, recomputed from the operator after the solve.
    pub relative_residual: f64,
    /// Seconds.
    pub wall_time: f64,
    /// Preconditioned residual norm `sqrt(rᵀ P⁻¹ r)` per iteration, relative to
    /// the initial one. Empty for non-iterative solves.
    pub residual_history: Vec<f64>,
}

/// Square operator acting on flat vectors.
pub trait LinearOperator {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn is_symmetric(&self) -> bool;
}

impl LinearOperator for CsrMatrix {
    fn len(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x)
    }

    fn is_symmetric(&self) -> bool {
        self.nrows() == self.ncols() && self.max_abs_diff(&self.transpose()) <= 1e-13 * self.max_abs()
    }
}

/// The interior block `S` of an assembled operator, applied matrix-free.
#[derive(Debug, Clone, Copy)]
pub struct InteriorOperator<'a>(pub &'a EllipticOperator);

impl LinearOperator for InteriorOperator<'_> {
    fn len(&self) -> usize {
        self.0.interior_len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.apply_interior(x)
    }

    fn is_symmetric(&self) -> bool {
        self.0.is_symmetric()
    }
}

/// The full-grid operator `S̄`, applied matrix-free.
#[derive(Debug, Clone, Copy)]
pub struct FullOperator<'a>(pub &'a EllipticOperator);

impl LinearOperator for FullOperator<'_> {
    fn len(&self) -> usize {
        self.0.full_len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.apply_full(x)
    }

    fn is_symmetric(&self) -> bool {
        self.0.is_symmetric()
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn relative_residual(op: &dyn LinearOperator, x: &[f64], b: &[f64]) -> f64 {
    let ax = op.apply(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

fn check_finite(x: &[f64], what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Solves `A x = b` by LU factorization.
pub fn direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<SolveReport> {
    let start = Instant::now();
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::invalid(format!(
            "system is {}×{} with a right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    check_finite(b, "right-hand side")?;
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let diagnostics;
    if n < DENSE_LIMIT {
        let dense = a.to_dense();
        let m = Mat::<f64>::from_fn(n, n, |i, j| dense[i][j]);
        let lu = m.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let p = u[(i, i)].abs();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        if n > 0 && (lo == 0.0 || lo <= 1e-15 * hi) {
            return Err(Error::SolverFailure(format!(
                "matrix is singular to working precision (smallest pivot {lo:e}, largest {hi:e})"
            )));
        }
        diagnostics = format!("pivot range [{lo:e}, {hi:e}]");
        rhs = lu.solve(&rhs);
    } else {
        let sparse = a.to_faer()?;
        let lu = sparse
            .sp_lu()
            .map_err(|e| Error::SolverFailure(format!("sparse LU failed: {e:?}")))?;
        lu.solve_in_place(rhs.as_mut());
        diagnostics = "sparse LU".to_string();
    }
    let solution: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    check_finite(&solution, "direct solution")?;
    let relative_residual = relative_residual(a, &solution, b);
    if !(relative_residual <= DIRECT_RESIDUAL_TOL) {
        return Err(Error::SolverFailure(format!(
            "direct solve left relative residual {relative_residual:e} ({diagnostics})"
        )));
    }
    Ok(SolveReport {
        solution,
        iterations: 0,
        relative_residual,
        wall_time: start.elapsed().as_secs_f64(),
        residual_history: Vec::new(),
    })
}

/// `H = T Λ T⁻¹` for a one-dimensional interior matrix `H`.
#[derive(Debug, Clone)]
pub struct EigenFactor {
    n: usize,
    /// Row-major `n × n`.
    t: Vec<f64>,
    t_inv: Vec<f64>,
    lambda: Vec<f64>,
}

impl EigenFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.n + j]
    }

    pub fn t_inv(&self, i: usize, j: usize) -> f64 {
        self.t_inv[i * self.n + j]
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
}

/// Largest condition number of `T` accepted by [`eigen_factor_1d`].
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;

/// Diagonalizes `h`. Any sign that the factorization is unreliable
/// (complex or repeated eigenvalues, ill-conditioned eigenvectors, a poor
/// reconstruction) is reported as [`Error::EigenFallback`].
pub fn eigen_factor_1d(h: &[Vec<f64>]) -> Result<EigenFactor> {
    let n = h.len();
    if n == 0 || h.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("eigen factorization needs a nonempty square matrix"));
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| h[i][j]);
    let eig = m
        .eigen()
        .map_err(|e| Error::EigenFallback(format!("eigen solver did not converge: {e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let lambda: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let rho = (0..n).map(|i| s[i].re.hypot(s[i].im)).fold(0.0, f64::max);
    if let Some(i) = (0..n).find(|&i| s[i].im.abs() > 1e-10 * rho) {
        return Err(Error::EigenFallback(format!(
            "complex eigenvalue {} + {}i",
            s[i].re, s[i].im
        )));
    }
    if let Some(&l) = lambda.iter().find(|&&l| l <= 0.0) {
        return Err(Error::EigenFallback(format!("nonpositive eigenvalue {l:e}")));
    }
    let mut sorted = lambda.clone();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] <= 1e-10 * rho) {
        return Err(Error::EigenFallback(format!(
            "repeated eigenvalue near {:e}",
            w[0]
        )));
    }
    // Real eigenvectors, normalized column by column.
    let mut t = Mat::<f64>::from_fn(n, n, |i, j| u[(i, j)].re);
    for j in 0..n {
        let norm = (0..n).map(|i| t[(i, j)] * t[(i, j)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::EigenFallback("zero eigenvector".into()));
        }
        for i in 0..n {
            t[(i, j)] /= norm;
        }
    }
    let t_inv = t.partial_piv_lu().inverse();
    let norm1 = |a: &Mat<f64>| -> f64 {
        (0..n)
            .map(|j| (0..n).map(|i| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let cond = norm1(&t) * norm1(&t_inv);
    if !(cond <= MAX_EIGENVECTOR_CONDITION) {
        return Err(Error::EigenFallback(format!(
            "eigenvector matrix condition number {cond:e}"
        )));
    }
    let h_max = h.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let ht: f64 = (0..n).map(|k| h[i][k] * t[(k, j)]).sum();
            defect = defect.max((ht - t[(i, j)] * lambda[j]).abs());
        }
    }
    if defect > 1e-10 * h_max {
        return Err(Error::EigenFallback(format!(
            "eigen decomposition defect {defect:e} exceeds tolerance"
        )));
    }
    Ok(EigenFactor {
        n,
        t: (0..n * n).map(|k| t[(k / n, k % n)]).collect(),
        t_inv: (0..n * n).map(|k| t_inv[(k / n, k % n)]).collect(),
        lambda,
    })
}

/// `out[o, i, s] = Σ_k m[i, k] · x[o, k, s]` for a row-major `n × n` matrix `m`
/// acting on the middle index of an `outer × n × stride` array.
fn apply_dense_along(m: &[f64], n: usize, shape: &[usize], axis: usize, x: &[f64]) -> Vec<f64> {
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; x.len()];
    if stride == 1 {
        for o in 0..outer {
            let src = &x[o * n..(o + 1) * n];
            let dst = &mut out[o * n..(o + 1) * n];
            for (i, d) in dst.iter_mut().enumerate() {
                *d = dot(&m[i * n..(i + 1) * n], src);
            }
        }
        return out;
    }
    for o in 0..outer {
        let base = o * n * stride;
        for i in 0..n {
            let d0 = base + i * stride;
            for k in 0..n {
                let c = m[i * n + k];
                if c == 0.0 {
                    continue;
                }
                let s0 = base + k * stride;
                let (dst, src) = (&mut out[d0..d0 + stride], &x[s0..s0 + stride]);
                for (y, v) in dst.iter_mut().zip(src) {
                    *y += c * v;
                }
            }
        }
    }
    out
}

/// Solver for `(H_0 ⊕ H_1 [⊕ H_2]) u = f` by fast diagonalization, where
/// `H_s` is the interior 1D matrix `M⁻¹ S̄` of `-d²/dx_s²`.
#[derive(Debug, Clone)]
pub struct FastPoissonSolver {
    shape: Vec<usize>,
    h: Vec<Vec<f64>>,
    factors: Vec<EigenFactor>,
}

impl FastPoissonSolver {
    /// Factors the Laplacian of every axis of a 2D or 3D grid.
    pub fn new(grid: &TensorGrid) -> Result<Self> {
        if !(2..=3).contains(&grid.dims()) {
            return Err(Error::invalid("the fast solver handles 2D and 3D grids"));
        }
        let hs = grid
            .axes()
            .iter()
            .map(|a| laplacian_h_1d(a.interior(), a.spacing()))
            .collect::<Result<Vec<_>>>()?;
        FastPoissonSolver::from_matrices(&hs)
    }

    /// Uses the given per-axis matrices, first factor acting on the slowest index.
    pub fn from_matrices(hs: &[Vec<Vec<f64>>]) -> Result<Self> {
        let factors = hs
            .iter()
            .map(|h| eigen_factor_1d(h))
            .collect::<Result<Vec<_>>>()?;
        Ok(FastPoissonSolver {
            shape: factors.iter().map(EigenFactor::n).collect(),
            h: hs.iter().map(|h| h.iter().flatten().copied().collect()).collect(),
            factors,
        })
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn factor(&self, axis: usize) -> &EigenFactor {
        &self.factors[axis]
    }

    /// `(⊕ H_s) u` without forming the Kronecker sum.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (ax, h) in self.h.iter().enumerate() {
            let part = apply_dense_along(h, self.shape[ax], &self.shape, ax, u);
            for (o, p) in out.iter_mut().zip(part) {
                *o += p;
            }
        }
        out
    }

    /// Solution of `(⊕ H_s) u = f`.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.len() {
            return Err(Error::invalid(format!(
                "right-hand side has length {}, expected {}",
                f.len(),
                self.len()
            )));
        }
        let mut x = f.to_vec();
        for (ax, fac) in self.factors.iter().enumerate() {
            x = apply_dense_along(&fac.t_inv, fac.n, &self.shape, ax, &x);
        }
        let mut singular = None;
        crate::grid::for_each_index(&self.shape, |k, idx| {
            let l: f64 = idx
                .iter()
                .enumerate()
                .map(|(ax, &i)| self.factors[ax].lambda[i])
                .sum();
            if l.abs() < 1e-14 {
                singular = Some(l);
            }
            x[k] /= l;
        });
        if let Some(l) = singular {
            return Err(Error::SingularOperator(format!("eigenvalue sum {l:e}")));
        }
        for (ax, fac) in self.factors.iter().enumerate() {
            x = apply_dense_along(&fac.t, fac.n, &self.shape, ax, &x);
        }
        check_finite(&x, "fast solver output")?;
        Ok(x)
    }
}

impl LinearOperator for FastPoissonSolver {
    fn len(&self) -> usize {
        FastPoissonSolver::len(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        FastPoissonSolver::apply(self, x)
    }

    fn is_symmetric(&self) -> bool {
        false
    }
}

/// Solves the homogeneous Dirichlet Laplacian `(⊕ H_s) u = F` on the interior of
/// a 2D or 3D grid.
pub fn fast_poisson_solve(grid: &TensorGrid, f: &[f64]) -> Result<SolveReport> {
    let start = Instant::now();
    if f.len() != grid.len(Region::Interior) {
        return Err(Error::invalid("right-hand side must hold interior values"));
    }
    let solver = FastPoissonSolver::new(grid)?;
    let solution = solver.solve(f)?;
    Ok(SolveReport {
        relative_residual: relative_residual(&solver, &solution, f),
        solution,
        iterations: 0,
        wall_time: start.elapsed().as_secs_f64(),
        residual_history: Vec::new(),
    })
}

/// Preconditioners accepted by [`pcg`].
pub enum Preconditioner {
    Identity,
    /// `P = Π h · (W ⊗ W)(H_x ⊕ H_y)`, the Laplacian stiffness matrix, inverted
    /// by fast diagonalization.
    Eigen(EigenPreconditioner),
}

pub struct EigenPreconditioner {
    solver: FastPoissonSolver,
    mass: Vec<f64>,
}

impl EigenPreconditioner {
    pub fn new(grid: &TensorGrid) -> Result<Self> {
        let solver = FastPoissonSolver::new(grid)?;
        let mut mass = vec![grid.point_measure(); solver.len()];
        let inner = grid.shape(Region::Interior);
        crate::grid::for_each_index(&inner, |k, idx| {
            for &i in idx {
                // Interior weights alternate 4/3 (cell centers) and 2/3 (knots).
                mass[k] *= if i % 2 == 0 { 4.0 / 3.0 } else { 2.0 / 3.0 };
            }
        });
        Ok(EigenPreconditioner { solver, mass })
    }

    pub fn apply_inverse(&self, r: &[f64]) -> Result<Vec<f64>> {
        let scaled: Vec<f64> = r.iter().zip(&self.mass).map(|(r, m)| r / m).collect();
        self.solver.solve(&scaled)
    }
}

impl Preconditioner {
    fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        match self {
            Preconditioner::Identity => Ok(r.to_vec()),
            Preconditioner::Eigen(p) => p.apply_inverse(r),
        }
    }
}

/// Default iteration cap `10 √N`.
pub fn default_maxit(unknowns: usize) -> usize {
    ((10.0 * (unknowns as f64).sqrt()).ceil() as usize).max(10)
}

/// Preconditioned conjugate gradients for a symmetric positive definite `op`.
///
/// Stops when the recursively updated residual satisfies `‖r‖₂ ≤ tol ‖b‖₂` or
/// after `maxit` iterations; the reported residual is recomputed from `op`.
pub fn pcg(
    op: &dyn LinearOperator,
    b: &[f64],
    precond: &Preconditioner,
    tol: f64,
    maxit: usize,
) -> Result<SolveReport> {
    let start = Instant::now();
    let n = op.len();
    if b.len() != n {
        return Err(Error::invalid("right-hand side length does not match the operator"));
    }
    if !op.is_symmetric() {
        return Err(Error::invalid(
            "conjugate gradients need a symmetric operator; use the direct solver",
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    check_finite(b, "right-hand side")?;
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    if nb > 0.0 {
        let mut r = b.to_vec();
        let mut z = precond.apply(&r)?;
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let rz0 = rz.abs().sqrt();
        history.push(1.0);
        while iterations < maxit && norm2(&r) > tol * nb {
            let ap = op.apply(&p);
            let curvature = dot(&p, &ap);
            if !(curvature > 0.0) {
                return Err(Error::SolverFailure(format!(
                    "nonpositive curvature pᵀAp = {curvature:e} at iteration {iterations}; \
                     the operator is not positive definite, use the direct solver"
                )));
            }
            let alpha = rz / curvature;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            z = precond.apply(&r)?;
            let rz_next = dot(&r, &z);
            history.push(rz_next.abs().sqrt() / rz0);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        check_finite(&x, "conjugate gradient iterate")?;
    }
    Ok(SolveReport {
        relative_residual: relative_residual(op, &x, b),
        solution: x,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        residual_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::kronecker_sum;
    use crate::grid::build_grid;

    #[test]
    fn identity_system_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        let r = direct_solve(&CsrMatrix::identity(3), &b).unwrap();
        assert_eq!(r.solution, b);
        assert_eq!(r.iterations, 0);
        let r = pcg(&CsrMatrix::identity(3), &b, &Preconditioner::Identity, 1e-12, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.relative_residual < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let err = direct_solve(&a, &[1.0, 2.0]).unwrap_err();
        assert!(err.is_solver_failure(), "{err}");
    }

    #[test]
    fn scalar_eigen_factor() {
        let h = 0.5;
        let f = eigen_factor_1d(&laplacian_h_1d(1, h).unwrap()).unwrap();
        assert!((f.lambda()[0] - 2.0 / (h * h)).abs() < 1e-12);
        assert!((f.t(0, 0).abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_point_spectrum_is_positive() {
        // H = [[2,-1,0],[-2,7/2,-2],[0,-1,2]]; characteristic polynomial
        // (2-λ)(λ² - 11/2 λ + 3) has roots 2 and (11 ± √73)/4.
        let f = eigen_factor_1d(&laplacian_h_1d(3, 1.0).unwrap()).unwrap();
        let mut l = f.lambda().to_vec();
        l.sort_by(f64::total_cmp);
        let s = 73f64.sqrt();
        let expect = [(11.0 - s) / 4.0, 2.0, (11.0 + s) / 4.0];
        for (a, b) in l.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_on_31_points() {
        let h = laplacian_h_1d(31, 1.0 / 32.0).unwrap();
        let f = eigen_factor_1d(&h).unwrap();
        let n = 31;
        let hmax = h.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| f.t(i, k) * f.lambda()[k] * f.t_inv(k, j)).sum();
                assert!((r - h[i][j]).abs() <= 1e-10 * hmax);
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_fall_back() {
        let h = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(eigen_factor_1d(&h), Err(Error::EigenFallback(_))));
        let rot = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        assert!(matches!(eigen_factor_1d(&rot), Err(Error::EigenFallback(_))));
    }

    #[test]
    fn fast_solver_zero_rhs() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[4, 4]).unwrap();
        let r = fast_poisson_solve(&grid, &vec![0.0; 49]).unwrap();
        assert!(r.solution.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fast_solver_matches_direct_in_3d() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 2.0), (0.0, 1.0)], &[2, 3, 2]).unwrap();
        let hs: Vec<_> = grid
            .axes()
            .iter()
            .map(|a| laplacian_h_1d(a.interior(), a.spacing()).unwrap())
            .collect();
        let k = kronecker_sum(&hs);
        let f: Vec<f64> = (0..k.nrows()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let fast = fast_poisson_solve(&grid, &f).unwrap();
        let direct = direct_solve(&k, &f).unwrap();
        let scale = norm2(&direct.solution);
        let diff: Vec<f64> = fast.solution.iter().zip(&direct.solution).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) <= 1e-10 * scale);
        assert!(fast.relative_residual < 1e-12);
    }

    #[test]
    fn pcg_refuses_nonsymmetric_operators() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 2.0]]);
        assert!(matches!(
            pcg(&a, &[1.0, 1.0], &Preconditioner::Identity, 1e-12, 10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pcg_detects_indefinite_operators() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let err = pcg(&a, &[0.0, 1.0], &Preconditioner::Identity, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::SolverFailure(_)));
    }
}
