//! Gauss-Lobatto rules, Legendre and M-type polynomials, and the M-type `Q^k`
//! projection.
//!
//! The `(k+1)`-point Gauss-Lobatto rule on `[-1, 1]` has nodes at `±1` and at the
//! roots of `P_k'`, which are also the roots of the M-type polynomial `M_{k+1}`.
//! With `k = 2` the rule is `(-1, 0, 1)` with weights `(1/3, 4/3, 1/3)`, which is
//! where every diagonal weight of the finite-difference scheme comes from.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Region, TensorGrid};

/// Points used by the dense rule that evaluates projection integrals.
const DENSE_POINTS: usize = 32;
const NEWTON_MAX_ITERS: usize = 100;
const NEWTON_TOL: f64 = 1e-14;

/// A Gauss-Lobatto rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn npts(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest monomial degree integrated exactly, `2 npts - 3`.
    pub fn exact_degree(&self) -> usize {
        2 * self.npts() - 3
    }

    /// Integrates `f` over `[-1, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    /// Integrates `f` over `[a, b]` with the affinely mapped rule.
    pub fn integrate_on(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|t| f(mid + half * t))
    }
}

/// Builds the `npts`-point Gauss-Lobatto rule.
///
/// Interior nodes are the roots of `P_{npts-1}'`, located by Newton iteration
/// from Chebyshev-Lobatto initial guesses.
pub fn gauss_lobatto_rule(npts: usize) -> Result<QuadratureRule> {
    if npts < 2 {
        return Err(Error::invalid(format!(
            "a Gauss-Lobatto rule needs at least 2 points, got {npts}"
        )));
    }
    let n = npts - 1;
    let nn1 = (n * (n + 1)) as f64;
    let mut nodes = vec![0.0; npts];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    // Solve for the left half and mirror, so the rule is exactly symmetric.
    for j in 1..=(n - 1) / 2 {
        let mut x = -(PI * j as f64 / n as f64).cos();
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre_with_derivative(n, x);
            // Newton on (1 - x^2) P_n'(x), whose derivative is -n(n+1) P_n(x).
            let step = (1.0 - x * x) * dp / (nn1 * p);
            x += step;
            if step.abs() < NEWTON_TOL {
                break;
            }
        }
        nodes[j] = x;
        nodes[n - j] = -x;
    }
    if n % 2 == 0 {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let p = legendre_eval(n, x);
            2.0 / (nn1 * p * p)
        })
        .collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Legendre polynomial `l_j(t)` by the three-term recurrence.
pub fn legendre_eval(j: usize, t: f64) -> f64 {
    legendre_with_derivative(j, t).0
}

/// `(l_j(t), l_j'(t))`.
pub(crate) fn legendre_with_derivative(j: usize, t: f64) -> (f64, f64) {
    if j == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = t;
    for m in 1..j {
        let m = m as f64;
        let next = ((2.0 * m + 1.0) * t * cur - m * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    let jf = j as f64;
    let deriv = if (t * t - 1.0).abs() < f64::EPSILON {
        let sign = if t > 0.0 || j % 2 == 1 { 1.0 } else { -1.0 };
        sign * jf * (jf + 1.0) / 2.0
    } else {
        jf * (t * cur - prev) / (t * t - 1.0)
    };
    (cur, deriv)
}

/// M-type polynomial `M_j(t)`: `M_0 = 1`, `M_1 = t`, and for `j >= 2` the
/// antiderivative of `l_{j-1}` vanishing at `±1`, i.e. `(l_j - l_{j-2}) / (2j - 1)`.
pub fn mtype_eval(j: usize, t: f64) -> f64 {
    match j {
        0 => 1.0,
        1 => t,
        _ => (legendre_eval(j, t) - legendre_eval(j - 2, t)) / (2 * j - 1) as f64,
    }
}

/// Tensor-product Gauss-Lobatto approximation of `∫∫ f` over the cell
/// `[x0, x1] × [y0, y1]`.
pub fn quad_cell(
    f: impl Fn(f64, f64) -> f64,
    x: (f64, f64),
    y: (f64, f64),
    rule: &QuadratureRule,
) -> f64 {
    let (hx, hy) = (0.5 * (x.1 - x.0), 0.5 * (y.1 - y.0));
    let (mx, my) = (0.5 * (x.0 + x.1), 0.5 * (y.0 + y.1));
    let mut sum = 0.0;
    for (&s, &ws) in rule.nodes.iter().zip(&rule.weights) {
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            sum += ws * wt * f(mx + hx * s, my + hy * t);
        }
    }
    hx * hy * sum
}

/// One-dimensional analogue of [`quad_cell`] on `[a, b]`.
pub fn quad_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: &QuadratureRule) -> f64 {
    rule.integrate_on(f, a, b)
}

fn dense_rule() -> QuadratureRule {
    gauss_lobatto_rule(DENSE_POINTS).expect("dense rule has more than two points")
}

/// One-dimensional M-type projection coefficients `b_0..=b_k` of `f` on `[-1, 1]`.
///
/// `df` is the derivative of `f`; `b_{j+1} = (j + 1/2) ∫ f' l_j`.
pub fn mtype_project_1d(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    k: usize,
) -> Vec<f64> {
    let rule = dense_rule();
    let (fp, fm) = (f(1.0), f(-1.0));
    let mut b = vec![0.0; k + 1];
    b[0] = 0.5 * (fp + fm);
    if k >= 1 {
        b[1] = 0.5 * (fp - fm);
    }
    for (j, bj) in b.iter_mut().enumerate().skip(2) {
        let l = j - 1;
        *bj = (l as f64 + 0.5) * rule.integrate(|t| df(t) * legendre_eval(l, t));
    }
    b
}

/// Evaluates `Σ b_j M_j(t)`.
pub fn mtype_eval_series(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, b)| b * mtype_eval(j, t))
        .sum()
}

/// A smooth scalar field on the reference cell together with the partial
/// derivatives the M-type expansion needs.
pub struct CellField<'a> {
    pub value: &'a dyn Fn(f64, f64) -> f64,
    pub ds: &'a dyn Fn(f64, f64) -> f64,
    pub dt: &'a dyn Fn(f64, f64) -> f64,
    pub dst: &'a dyn Fn(f64, f64) -> f64,
}

/// Truncated two-dimensional M-type expansion on the reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MTypeExpansion {
    k: usize,
    /// `coeffs[i * (k + 1) + j] = b_{i,j}`, `i` along `s`, `j` along `t`.
    coeffs: Vec<f64>,
}

impl MTypeExpansion {
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * (self.k + 1) + j]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let ms: Vec<f64> = (0..=self.k).map(|i| mtype_eval(i, s)).collect();
        let mt: Vec<f64> = (0..=self.k).map(|j| mtype_eval(j, t)).collect();
        let mut sum = 0.0;
        for (i, msi) in ms.iter().enumerate() {
            for (j, mtj) in mt.iter().enumerate() {
                sum += self.coeff(i, j) * msi * mtj;
            }
        }
        sum
    }
}

/// M-type `Q^k` projection of a field on the reference cell `[-1, 1]^2`.
pub fn mtype_project_2d(field: &CellField<'_>, k: usize) -> MTypeExpansion {
    let rule = dense_rule();
    let f = field.value;
    let m = k + 1;
    let mut coeffs = vec![0.0; m * m];
    coeffs[0] = 0.25 * (f(-1.0, -1.0) + f(-1.0, 1.0) + f(1.0, -1.0) + f(1.0, 1.0));
    for i in 0..m {
        for j in 0..m {
            if i == 0 && j == 0 {
                continue;
            }
            let b = if i <= 1 && j >= 1 {
                let sign = if i == 0 { 1.0 } else { -1.0 };
                let lj = j - 1;
                (2 * j - 1) as f64 / 4.0
                    * rule.integrate(|t| {
                        ((field.dt)(1.0, t) + sign * (field.dt)(-1.0, t)) * legendre_eval(lj, t)
                    })
            } else if j <= 1 {
                let sign = if j == 0 { 1.0 } else { -1.0 };
                let li = i - 1;
                (2 * i - 1) as f64 / 4.0
                    * rule.integrate(|s| {
                        ((field.ds)(s, 1.0) + sign * (field.ds)(s, -1.0)) * legendre_eval(li, s)
                    })
            } else {
                let (li, lj) = (i - 1, j - 1);
                let scale = ((2 * i - 1) * (2 * j - 1)) as f64 / 4.0;
                scale
                    * rule.integrate(|s| {
                        let ls = legendre_eval(li, s);
                        rule.integrate(|t| (field.dst)(s, t) * legendre_eval(lj, t)) * ls
                    })
            };
            coeffs[i * m + j] = b;
        }
    }
    MTypeExpansion { k, coeffs }
}

/// A smooth field on the physical domain with the derivatives needed for its
/// piecewise M-type projection.
pub struct PlaneField<'a> {
    pub value: &'a dyn Fn(f64, f64) -> f64,
    pub dx: &'a dyn Fn(f64, f64) -> f64,
    pub dy: &'a dyn Fn(f64, f64) -> f64,
    pub dxy: &'a dyn Fn(f64, f64) -> f64,
}

/// Values at every grid point of the piecewise M-type `Q^2` projection `u_p`
/// over the cells of a 2D grid.
///
/// `u_p` is continuous across cells, so shared points take the value from the
/// lowest-indexed owning cell.
pub fn piecewise_mtype_projection(grid: &TensorGrid, field: &PlaneField<'_>) -> Result<GridFunction> {
    if grid.dims() != 2 {
        return Err(Error::invalid("piecewise projection needs a 2D grid"));
    }
    let (ax, ay) = (grid.axis(0), grid.axis(1));
    let (hx, hy) = (ax.spacing(), ay.spacing());
    let mut out = GridFunction::zeros(grid, Region::Full);
    for cx in 0..ax.cells() {
        for cy in 0..ay.cells() {
            let xe = ax.coord(2 * cx + 1);
            let ye = ay.coord(2 * cy + 1);
            let value = |s: f64, t: f64| (field.value)(xe + s * hx, ye + t * hy);
            let ds = |s: f64, t: f64| hx * (field.dx)(xe + s * hx, ye + t * hy);
            let dt = |s: f64, t: f64| hy * (field.dy)(xe + s * hx, ye + t * hy);
            let dst = |s: f64, t: f64| hx * hy * (field.dxy)(xe + s * hx, ye + t * hy);
            let cell = CellField {
                value: &value,
                ds: &ds,
                dt: &dt,
                dst: &dst,
            };
            let proj = mtype_project_2d(&cell, 2);
            for a in 0..3 {
                for b in 0..3 {
                    let (ix, iy) = (2 * cx + a, 2 * cy + b);
                    let s = a as f64 - 1.0;
                    let t = b as f64 - 1.0;
                    *out.at_mut(&[ix, iy]) = proj.eval(s, t);
                }
            }
        }
    }
    Ok(out)
}
