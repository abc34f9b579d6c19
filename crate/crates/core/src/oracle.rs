//! Brute-force `Q^2` finite element assembly with Gauss-Lobatto quadrature,
//! cell by cell. Slow and obvious on purpose; used to check [`crate::assembly`].

use crate::assembly::Coefficients;
use crate::error::{Error, Result};
use crate::grid::{flat_index, for_each_index, Region, TensorGrid};
use crate::sparse::{CsrMatrix, TripletBuilder};

const NODES: [f64; 3] = [-1.0, 0.0, 1.0];
const WEIGHTS: [f64; 3] = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];

fn lagrange(i: usize, t: f64) -> f64 {
    let mut v = 1.0;
    for k in 0..3 {
        if k != i {
            v *= (t - NODES[k]) / (NODES[i] - NODES[k]);
        }
    }
    v
}

fn lagrange_deriv(i: usize, t: f64) -> f64 {
    let mut total = 0.0;
    for m in 0..3 {
        if m == i {
            continue;
        }
        let mut term = 1.0 / (NODES[i] - NODES[m]);
        for k in 0..3 {
            if k != i && k != m {
                term *= (t - NODES[k]) / (NODES[i] - NODES[k]);
            }
        }
        total += term;
    }
    total
}

/// Tensor-product Lagrange basis of degree 2 per axis on `[-1,1]^dims`, nodes at
/// the Gauss-Lobatto points. Local node `(l_0, …)` has flat index with the last
/// axis fastest.
#[derive(Debug, Clone, Copy)]
pub struct LocalBasis {
    dims: usize,
}

impl LocalBasis {
    pub fn new(dims: usize) -> Result<Self> {
        if !(1..=2).contains(&dims) {
            return Err(Error::invalid("the oracle supports 1D and 2D cells"));
        }
        Ok(LocalBasis { dims })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        3usize.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn local_index(&self, k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims];
        let mut r = k;
        for d in (0..self.dims).rev() {
            idx[d] = r % 3;
            r /= 3;
        }
        idx
    }

    pub fn value(&self, k: usize, t: &[f64]) -> f64 {
        self.local_index(k)
            .iter()
            .zip(t)
            .map(|(&i, &s)| lagrange(i, s))
            .product()
    }

    /// Reference-cell gradient of basis function `k`.
    pub fn gradient(&self, k: usize, t: &[f64]) -> Vec<f64> {
        let idx = self.local_index(k);
        (0..self.dims)
            .map(|d| {
                (0..self.dims)
                    .map(|e| {
                        if e == d {
                            lagrange_deriv(idx[e], t[e])
                        } else {
                            lagrange(idx[e], t[e])
                        }
                    })
                    .product()
            })
            .collect()
    }

    /// Reference coordinates of node `k`.
    pub fn node(&self, k: usize) -> Vec<f64> {
        self.local_index(k).iter().map(|&i| NODES[i]).collect()
    }

    fn weight(&self, k: usize) -> f64 {
        self.local_index(k).iter().map(|&i| WEIGHTS[i]).product()
    }
}

/// Coefficient samples at the nodes of one cell, indexed like [`LocalBasis`].
#[derive(Debug, Clone)]
pub struct LocalCoefficients {
    pub a: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

/// Element matrix `Σ_q w_q [(a∇φ_j)·∇φ_i + (b·∇φ_j) φ_i + c φ_j φ_i](x_q)` of a
/// cell with half-widths `half` (the grid spacing per axis).
pub fn local_matrix(
    basis: &LocalBasis,
    half: &[f64],
    coeffs: &LocalCoefficients,
) -> Result<Vec<Vec<f64>>> {
    let d = basis.dims();
    let m = basis.len();
    if half.len() != d || coeffs.c.len() != m || coeffs.b.len() != d || coeffs.a.len() != d {
        return Err(Error::invalid("local data does not match the basis"));
    }
    let jac: f64 = half.iter().product();
    let mut out = vec![vec![0.0; m]; m];
    for q in 0..m {
        let xq = basis.node(q);
        let w = basis.weight(q) * jac;
        let grads: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                basis
                    .gradient(k, &xq)
                    .iter()
                    .zip(half)
                    .map(|(g, h)| g / h)
                    .collect()
            })
            .collect();
        let vals: Vec<f64> = (0..m).map(|k| basis.value(k, &xq)).collect();
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for k in 0..d {
                    for l in 0..d {
                        s += coeffs.a[k][l][q] * grads[j][l] * grads[i][k];
                    }
                    s += coeffs.b[k][q] * grads[j][k] * vals[i];
                }
                s += coeffs.c[q] * vals[j] * vals[i];
                out[i][j] += w * s;
            }
        }
    }
    Ok(out)
}

/// Full-grid stiffness matrix obtained by scattering every element matrix.
pub fn global_assemble(grid: &TensorGrid, coeffs: &Coefficients) -> Result<CsrMatrix> {
    let d = grid.dims();
    let basis = LocalBasis::new(d)?;
    let shape = grid.shape(Region::Full);
    let n = grid.len(Region::Full);
    let half: Vec<f64> = grid.axes().iter().map(|a| a.spacing()).collect();
    let cells: Vec<usize> = grid.axes().iter().map(|a| a.cells()).collect();
    let mut builder = TripletBuilder::new(n, n);
    let mut failure = None;
    for_each_index(&cells, |_, cell| {
        if failure.is_some() {
            return;
        }
        let global: Vec<usize> = (0..basis.len())
            .map(|k| {
                let g = grid
                    .cell_to_grid(cell, &basis.local_index(k))
                    .expect("cell index in range");
                flat_index(&shape, &g)
            })
            .collect();
        let pick = |values: &[f64]| -> Vec<f64> { global.iter().map(|&g| values[g]).collect() };
        let local = LocalCoefficients {
            a: (0..d)
                .map(|k| (0..d).map(|l| pick(coeffs.diffusion(k, l).values())).collect())
                .collect(),
            b: (0..d).map(|k| pick(coeffs.convection(k).values())).collect(),
            c: pick(coeffs.reaction().values()),
        };
        match local_matrix(&basis, &half, &local) {
            Ok(mat) => {
                for (i, row) in mat.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            builder.add(global[i], global[j], v);
                        }
                    }
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(builder.build()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn constant_coeffs(d: usize, a: f64, c: f64) -> LocalCoefficients {
        let m = 3usize.pow(d as u32);
        LocalCoefficients {
            a: (0..d)
                .map(|k| (0..d).map(|l| vec![if k == l { a } else { 0.0 }; m]).collect())
                .collect(),
            b: vec![vec![0.0; m]; d],
            c: vec![c; m],
        }
    }

    #[test]
    fn basis_is_nodal_and_partitions_unity() {
        let basis = LocalBasis::new(2).unwrap();
        for q in 0..9 {
            let xq = basis.node(q);
            let mut sum = 0.0;
            let mut gsum = [0.0; 2];
            for k in 0..9 {
                let v = basis.value(k, &xq);
                assert!((v - f64::from(u8::from(k == q))).abs() < 1e-15);
                sum += v;
                let g = basis.gradient(k, &xq);
                gsum[0] += g[0];
                gsum[1] += g[1];
            }
            assert!((sum - 1.0).abs() < 1e-15);
            assert!(gsum[0].abs() < 1e-14 && gsum[1].abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let basis = LocalBasis::new(2).unwrap();
        let m = local_matrix(&basis, &[1.0, 1.0], &constant_coeffs(2, 1.0, 0.0)).unwrap();
        for row in &m {
            assert!(row.iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn reaction_gives_lumped_mass() {
        let basis = LocalBasis::new(2).unwrap();
        let m = local_matrix(&basis, &[0.5, 0.25], &constant_coeffs(2, 0.0, 1.0)).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let expect = if i == j { basis.weight(i) * 0.125 } else { 0.0 };
                assert!((m[i][j] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn one_dimensional_element() {
        let basis = LocalBasis::new(1).unwrap();
        let h = 0.3;
        let m = local_matrix(&basis, &[h], &constant_coeffs(1, 1.0, 0.0)).unwrap();
        let expected = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - expected[i][j] / (6.0 * h)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn single_cell_laplacian_is_tensor_product() {
        let (hx, hy) = (0.5, 1.0);
        let grid = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[1, 1]).unwrap();
        let s = global_assemble(&grid, &Coefficients::laplacian(&grid)).unwrap();
        let k1 = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];
        let m1 = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for i in 0..9 {
            for j in 0..9 {
                let (ix, iy, jx, jy) = (i / 3, i % 3, j / 3, j % 3);
                let dx = if iy == jy { k1[ix][jx] / (6.0 * hx) * m1[iy] * hy } else { 0.0 };
                let dy = if ix == jx { k1[iy][jy] / (6.0 * hy) * m1[ix] * hx } else { 0.0 };
                assert!((s.get(i, j) - dx - dy).abs() < 1e-13, "({i},{j})");
            }
        }
    }

    #[test]
    fn zero_coefficients_give_zero_matrix() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap();
        let c = Coefficients::from_fields(&grid, |_, _, _| 0.0, |_, _| 0.0, |_| 0.0).unwrap();
        assert_eq!(global_assemble(&grid, &c).unwrap().nnz(), 0);
    }
}
