//! Finite-difference form of the `C^0`-`Q^2` scheme with 3×3 Gauss-Lobatto
//! quadrature.
//!
//! Along one axis with `n + 2` points (`n` odd) the scheme is described by three
//! matrices:
//!
//! * `D`, whose row `i` is `h` times the derivative at `x_i` (the average of the
//!   one-sided derivatives at a knot shared by two cells);
//! * `E`, whose row at an interior knot is `h/2` times the jump of the derivative
//!   and which vanishes elsewhere;
//! * `W̄ = diag(1/3, 4/3, 2/3, 4/3, …, 2/3, 4/3, 1/3)`, the lumped quadrature
//!   weights divided by `h`.
//!
//! In 1D the stiffness matrix is `S̄ = (1/h)(Dᵀ W̄ A D + Eᵀ W̄ A E)`. In 2D every
//! block is a Kronecker product of these one-dimensional factors with a
//! diagonal of weighted coefficient samples; [`EllipticOperator::apply_full`]
//! evaluates the sum axis by axis without forming any Kronecker product.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::grid::{flat_index, for_each_index, GridFunction, Region, TensorGrid};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// A matrix with nonzeros only on diagonals `-2..=2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band5 {
    /// `rows[i][k]` is the entry at column `i + k - 2`.
    rows: Vec<[f64; 5]>,
}

impl Band5 {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + 2 < i || j > i + 2 || j >= self.n() {
            0.0
        } else {
            self.rows[i][j + 2 - i]
        }
    }

    /// Nonzero `(col, value)` entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows[i]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(k, &v)| (i + k - 2, v))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    fn from_exact(rows: &[[Rational64; 5]]) -> Self {
        Band5 {
            rows: rows.iter().map(|r| r.map(ratio_to_f64)).collect(),
        }
    }
}

fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn check_points(n_pts: usize) -> Result<()> {
    if n_pts < 3 || (n_pts - 2) % 2 == 0 {
        return Err(Error::invalid(format!(
            "an axis needs n + 2 points with n odd, got {n_pts} points"
        )));
    }
    Ok(())
}

/// The `D`, `E` and `W̄` matrices with exact rational entries, `h = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactStencils {
    /// Pentadiagonal rows, entry `k` at column `i + k - 2`.
    pub d: Vec<[Rational64; 5]>,
    pub e: Vec<[Rational64; 5]>,
    pub w_bar: Vec<Rational64>,
}

pub fn exact_stencils(n_pts: usize) -> Result<ExactStencils> {
    check_points(n_pts)?;
    let z = rat(0, 1);
    let last = n_pts - 1;
    let mut d = vec![[z; 5]; n_pts];
    let mut e = vec![[z; 5]; n_pts];
    let mut w_bar = vec![z; n_pts];
    for i in 0..n_pts {
        if i == 0 {
            d[i] = [z, z, rat(-3, 2), rat(2, 1), rat(-1, 2)];
            w_bar[i] = rat(1, 3);
        } else if i == last {
            d[i] = [rat(1, 2), rat(-2, 1), rat(3, 2), z, z];
            w_bar[i] = rat(1, 3);
        } else if i % 2 == 1 {
            d[i] = [z, rat(-1, 2), z, rat(1, 2), z];
            w_bar[i] = rat(4, 3);
        } else {
            d[i] = [rat(1, 4), rat(-1, 1), z, rat(1, 1), rat(-1, 4)];
            e[i] = [rat(-1, 4), rat(1, 1), rat(-3, 2), rat(1, 1), rat(-1, 4)];
            w_bar[i] = rat(2, 3);
        }
    }
    Ok(ExactStencils { d, e, w_bar })
}

/// Interior rows of `H = M⁻¹ S̄` for `-u''` with `h = 1`, as an `n × n`
/// rational matrix (scale by `1/h²` for other spacings).
pub fn exact_interior_h(n: usize) -> Result<Vec<Vec<Rational64>>> {
    let n_pts = n + 2;
    let st = exact_stencils(n_pts)?;
    let z = rat(0, 1);
    let mut s = vec![vec![z; n_pts]; n_pts];
    for k in 0..n_pts {
        let w = st.w_bar[k];
        for rows in [&st.d, &st.e] {
            for (a, &ra) in rows[k].iter().enumerate() {
                for (b, &rb) in rows[k].iter().enumerate() {
                    if ra != z && rb != z {
                        s[k + a - 2][k + b - 2] += w * ra * rb;
                    }
                }
            }
        }
    }
    Ok((1..=n)
        .map(|i| (1..=n).map(|j| s[i][j] / st.w_bar[i]).collect())
        .collect())
}

/// The one-dimensional matrices of one axis, scaled for spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil1DSet {
    h: f64,
    d: Band5,
    e: Band5,
    w_bar: Vec<f64>,
    w_int: Vec<f64>,
}

impl Stencil1DSet {
    pub fn n_pts(&self) -> usize {
        self.w_bar.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn d(&self) -> &Band5 {
        &self.d
    }

    pub fn e(&self) -> &Band5 {
        &self.e
    }

    pub fn w_bar(&self) -> &[f64] {
        &self.w_bar
    }

    pub fn w_int(&self) -> &[f64] {
        &self.w_int
    }
}

pub fn build_stencils(n_pts: usize, h: f64) -> Result<Stencil1DSet> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("spacing must be positive, got {h}")));
    }
    let ex = exact_stencils(n_pts)?;
    let w_bar: Vec<f64> = ex.w_bar.iter().copied().map(ratio_to_f64).collect();
    let w_int = w_bar[1..n_pts - 1].to_vec();
    Ok(Stencil1DSet {
        h,
        d: Band5::from_exact(&ex.d),
        e: Band5::from_exact(&ex.e),
        w_bar,
        w_int,
    })
}

/// `S̄ = (1/h)(Dᵀ W̄ A D + Eᵀ W̄ A E)` with `A = diag(a_samples)`.
pub fn assemble_stiffness_1d(stencils: &Stencil1DSet, a_samples: &[f64]) -> Result<CsrMatrix> {
    let n = stencils.n_pts();
    if a_samples.len() != n {
        return Err(Error::invalid(format!(
            "need {n} coefficient samples, got {}",
            a_samples.len()
        )));
    }
    let mut b = TripletBuilder::new(n, n);
    for k in 0..n {
        let c = stencils.w_bar[k] * a_samples[k] / stencils.h;
        for band in [&stencils.d, &stencils.e] {
            for (i, vi) in band.row(k) {
                for (j, vj) in band.row(k) {
                    b.add(i, j, c * vi * vj);
                }
            }
        }
    }
    Ok(b.build())
}

/// Dense interior `H = M⁻¹ S̄` for `-u''` on `n` interior points with spacing `h`.
pub fn laplacian_h_1d(n: usize, h: f64) -> Result<Vec<Vec<f64>>> {
    let st = build_stencils(n + 2, h)?;
    let s = assemble_stiffness_1d(&st, &vec![1.0; n + 2])?;
    Ok((1..=n)
        .map(|i| {
            let m = h * st.w_bar[i];
            (1..=n).map(|j| s.get(i, j) / m).collect()
        })
        .collect())
}

/// `H_0 ⊗ I ⊗ I + I ⊗ H_1 ⊗ I + I ⊗ I ⊗ H_2` (for as many factors as given),
/// with the first factor acting on the slowest index.
pub fn kronecker_sum(factors: &[Vec<Vec<f64>>]) -> CsrMatrix {
    let shape: Vec<usize> = factors.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let mut b = TripletBuilder::new(total, total);
    for_each_index(&shape, |row, idx| {
        let mut col_idx = idx.to_vec();
        for (ax, h) in factors.iter().enumerate() {
            for (k, &v) in h[idx[ax]].iter().enumerate() {
                if v != 0.0 {
                    col_idx[ax] = k;
                    b.add(row, flat_index(&shape, &col_idx), v);
                }
            }
            col_idx[ax] = idx[ax];
        }
    });
    b.build()
}

/// Coefficient samples on the full grid for
/// `-∇·(a∇u) + b·∇u + c u`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    diffusion: Vec<Vec<GridFunction>>,
    convection: Vec<GridFunction>,
    reaction: GridFunction,
}

impl Coefficients {
    pub fn new(
        grid: &TensorGrid,
        diffusion: Vec<Vec<GridFunction>>,
        convection: Vec<GridFunction>,
        reaction: GridFunction,
    ) -> Result<Self> {
        let d = grid.dims();
        let full = grid.len(Region::Full);
        let ok = |g: &GridFunction| g.region() == Region::Full && g.len() == full;
        if diffusion.len() != d
            || diffusion.iter().any(|r| r.len() != d || !r.iter().all(ok))
            || convection.len() != d
            || !convection.iter().all(ok)
            || !ok(&reaction)
        {
            return Err(Error::invalid(
                "coefficient samples must cover the full grid with one entry per axis pair",
            ));
        }
        Ok(Coefficients {
            diffusion,
            convection,
            reaction,
        })
    }

    /// Samples closures `a(i, j, x)`, `b(i, x)` and `c(x)` on the full grid.
    pub fn from_fields(
        grid: &TensorGrid,
        a: impl Fn(usize, usize, &[f64]) -> f64,
        b: impl Fn(usize, &[f64]) -> f64,
        c: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        use crate::grid::{sample, SampleRegion};
        let d = grid.dims();
        let diffusion = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| sample(|p| a(i, j, p), grid, SampleRegion::Full))
                    .collect()
            })
            .collect();
        let convection = (0..d)
            .map(|i| sample(|p| b(i, p), grid, SampleRegion::Full))
            .collect();
        let reaction = sample(&c, grid, SampleRegion::Full);
        Coefficients::new(grid, diffusion, convection, reaction)
    }

    /// `a = I`, `b = 0`, `c = 0`.
    pub fn laplacian(grid: &TensorGrid) -> Self {
        Coefficients::from_fields(
            grid,
            |i, j, _| if i == j { 1.0 } else { 0.0 },
            |_, _| 0.0,
            |_| 0.0,
        )
        .expect("samples have grid shape")
    }

    pub fn diffusion(&self, i: usize, j: usize) -> &GridFunction {
        &self.diffusion[i][j]
    }

    pub fn convection(&self, i: usize) -> &GridFunction {
        &self.convection[i]
    }

    pub fn reaction(&self) -> &GridFunction {
        &self.reaction
    }
}

/// Matrix-free finite-difference operator `S̄` on the full grid (1D or 2D).
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    grid: TensorGrid,
    shape: Vec<usize>,
    stencils: Vec<Stencil1DSet>,
    /// `diffusion[i][j] = (Π h / (h_i h_j)) · W̄ ∘ a^{ij}`, `None` if zero.
    diffusion: Vec<Vec<Option<Vec<f64>>>>,
    /// `(Π h / h_i) · W̄ ∘ b^i`.
    convection: Vec<Option<Vec<f64>>>,
    /// `Π h · W̄ ∘ c`.
    reaction: Option<Vec<f64>>,
    min_reaction: f64,
    cross_jumps: bool,
}

/// Applies `band` (or its transpose) along `axis` of a full-grid array and adds
/// the result into `out`.
fn apply_along(
    band: &Band5,
    shape: &[usize],
    axis: usize,
    transpose: bool,
    src: &[f64],
    out: &mut [f64],
) {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    for o in 0..outer {
        let base = o * n * stride;
        for i in 0..n {
            for (j, v) in band.row(i) {
                let (dst, from) = if transpose { (j, i) } else { (i, j) };
                let d0 = base + dst * stride;
                let s0 = base + from * stride;
                let (dst_row, src_row) = (&mut out[d0..d0 + stride], &src[s0..s0 + stride]);
                for (y, x) in dst_row.iter_mut().zip(src_row) {
                    *y += v * x;
                }
            }
        }
    }
}

fn hadamard_acc(weights: &[f64], x: &[f64], out: &mut [f64]) {
    for ((o, w), x) in out.iter_mut().zip(weights).zip(x) {
        *o += w * x;
    }
}

impl EllipticOperator {
    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn stencils(&self, axis: usize) -> &Stencil1DSet {
        &self.stencils[axis]
    }

    pub fn full_len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn interior_len(&self) -> usize {
        self.grid.len(Region::Interior)
    }

    /// Smallest sampled reaction coefficient `c`.
    pub fn min_reaction(&self) -> f64 {
        self.min_reaction
    }

    /// True when `b ≡ 0` and the sampled `a` is symmetric, so `S̄` is symmetric.
    pub fn is_symmetric(&self) -> bool {
        let d = self.grid.dims();
        self.convection.iter().all(Option::is_none)
            && (0..d).all(|i| (0..d).all(|j| self.diffusion[i][j] == self.diffusion[j][i]))
    }

    /// Adds the jump-times-jump products to the mixed-derivative blocks at
    /// points that are knots along both axes.
    ///
    /// These products do not occur when the quadrature is carried out cell by
    /// cell, because on a shared edge the tangential derivative is single
    /// valued; the switch exists to compare the two forms.
    pub fn with_cross_jump_terms(mut self, on: bool) -> Self {
        self.cross_jumps = on;
        self
    }

    /// `S̄ u` for a full-grid vector `u`.
    pub fn apply_full(&self, u: &[f64]) -> Vec<f64> {
        let len = self.full_len();
        assert_eq!(u.len(), len, "operator applied to a vector of the wrong length");
        let d = self.grid.dims();
        let mut du = vec![vec![0.0; len]; d];
        let mut eu = vec![vec![0.0; len]; d];
        for ax in 0..d {
            apply_along(self.stencils[ax].d(), &self.shape, ax, false, u, &mut du[ax]);
            apply_along(self.stencils[ax].e(), &self.shape, ax, false, u, &mut eu[ax]);
        }
        let mut out = vec![0.0; len];
        let mut flux = vec![0.0; len];
        for i in 0..d {
            flux.iter_mut().for_each(|f| *f = 0.0);
            for j in 0..d {
                if let Some(w) = &self.diffusion[i][j] {
                    hadamard_acc(w, &du[j], &mut flux);
                }
            }
            apply_along(self.stencils[i].d(), &self.shape, i, true, &flux, &mut out);

            flux.iter_mut().for_each(|f| *f = 0.0);
            for j in 0..d {
                if j != i && !self.cross_jumps {
                    continue;
                }
                if let Some(w) = &self.diffusion[i][j] {
                    hadamard_acc(w, &eu[j], &mut flux);
                }
            }
            apply_along(self.stencils[i].e(), &self.shape, i, true, &flux, &mut out);
        }
        for (j, conv) in self.convection.iter().enumerate() {
            if let Some(w) = conv {
                hadamard_acc(w, &du[j], &mut out);
            }
        }
        if let Some(w) = &self.reaction {
            hadamard_acc(w, u, &mut out);
        }
        out
    }

    /// Flat full-grid offsets of the interior points, in interior storage order.
    pub fn interior_indices(&self) -> Vec<usize> {
        let inner = self.grid.shape(Region::Interior);
        let mut out = Vec::with_capacity(self.interior_len());
        for_each_index(&inner, |_, idx| {
            let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            out.push(flat_index(&self.shape, &shifted));
        });
        out
    }

    /// Interior block `S = Ĩᵀ S̄ Ĩ` applied to an interior vector.
    pub fn apply_interior(&self, u: &[f64]) -> Vec<f64> {
        let idx = self.interior_indices();
        assert_eq!(u.len(), idx.len(), "interior vector has the wrong length");
        let mut full = vec![0.0; self.full_len()];
        for (&k, &v) in idx.iter().zip(u) {
            full[k] = v;
        }
        let s = self.apply_full(&full);
        idx.iter().map(|&k| s[k]).collect()
    }

    /// Sparse row of `band` along `axis` at full-grid point `idx`.
    fn axis_row(&self, band: &Band5, axis: usize, idx: &[usize]) -> Vec<(usize, f64)> {
        let mut col = idx.to_vec();
        band.row(idx[axis])
            .map(|(j, v)| {
                col[axis] = j;
                (flat_index(&self.shape, &col), v)
            })
            .collect()
    }

    /// Explicit `S̄` in compressed-row form.
    pub fn to_csr(&self) -> CsrMatrix {
        let len = self.full_len();
        let d = self.grid.dims();
        let mut b = TripletBuilder::new(len, len);
        let mut add_outer = |w: f64, left: &[(usize, f64)], right: &[(usize, f64)]| {
            for &(l, vl) in left {
                for &(r, vr) in right {
                    b.add(l, r, w * vl * vr);
                }
            }
        };
        for_each_index(&self.shape, |p, idx| {
            let drows: Vec<_> = (0..d)
                .map(|ax| self.axis_row(self.stencils[ax].d(), ax, idx))
                .collect();
            let erows: Vec<_> = (0..d)
                .map(|ax| self.axis_row(self.stencils[ax].e(), ax, idx))
                .collect();
            let id = [(p, 1.0)];
            for i in 0..d {
                for j in 0..d {
                    if let Some(w) = &self.diffusion[i][j] {
                        add_outer(w[p], &drows[i], &drows[j]);
                        if i == j || self.cross_jumps {
                            add_outer(w[p], &erows[i], &erows[j]);
                        }
                    }
                }
                if let Some(w) = &self.convection[i] {
                    add_outer(w[p], &id, &drows[i]);
                }
            }
            if let Some(w) = &self.reaction {
                add_outer(w[p], &id, &id);
            }
        });
        b.build()
    }

    /// Explicit interior block `S`.
    pub fn interior_csr(&self) -> CsrMatrix {
        let idx = self.interior_indices();
        self.to_csr().select(&idx, &idx)
    }

    /// Diagonal of the lumped mass `M̄ = Π h_s · W̄_x ⊗ W̄_y` on the full grid.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let measure = self.grid.point_measure();
        let mut out = vec![0.0; self.full_len()];
        for_each_index(&self.shape, |k, idx| {
            out[k] = measure
                * idx
                    .iter()
                    .enumerate()
                    .map(|(ax, &i)| self.stencils[ax].w_bar()[i])
                    .product::<f64>();
        });
        out
    }
}

/// Assembles the operator of `-∇·(a∇u) + b·∇u + c u` on a 1D or 2D grid.
pub fn assemble_operator(grid: &TensorGrid, coeffs: &Coefficients) -> Result<EllipticOperator> {
    let d = grid.dims();
    if d > 2 {
        return Err(Error::invalid(
            "variable-coefficient assembly is available in 1D and 2D only",
        ));
    }
    if coeffs.convection.len() != d || coeffs.reaction.len() != grid.len(Region::Full) {
        return Err(Error::invalid("coefficient samples do not match the grid"));
    }
    let shape = grid.shape(Region::Full);
    let stencils = grid
        .axes()
        .iter()
        .map(|a| build_stencils(a.points(), a.spacing()))
        .collect::<Result<Vec<_>>>()?;
    let spacing: Vec<f64> = grid.axes().iter().map(|a| a.spacing()).collect();
    let measure = grid.point_measure();
    let mut weights = vec![0.0; shape.iter().product()];
    for_each_index(&shape, |k, idx| {
        weights[k] = idx
            .iter()
            .enumerate()
            .map(|(ax, &i)| stencils[ax].w_bar()[i])
            .product();
    });
    let weighted = |g: &GridFunction, scale: f64| -> Option<Vec<f64>> {
        if g.values().iter().all(|&v| v == 0.0) {
            return None;
        }
        Some(
            g.values()
                .iter()
                .zip(&weights)
                .map(|(v, w)| scale * w * v)
                .collect(),
        )
    };
    let diffusion = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| weighted(&coeffs.diffusion[i][j], measure / (spacing[i] * spacing[j])))
                .collect()
        })
        .collect();
    let convection = (0..d)
        .map(|i| weighted(&coeffs.convection[i], measure / spacing[i]))
        .collect();
    let reaction = weighted(&coeffs.reaction, measure);
    let min_reaction = coeffs
        .reaction
        .values()
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    Ok(EllipticOperator {
        grid: grid.clone(),
        shape,
        stencils,
        diffusion,
        convection,
        reaction,
        min_reaction,
        cross_jumps: false,
    })
}

/// 2D entry point; identical to [`assemble_operator`] but insists on a 2D grid.
pub fn assemble_operator_2d(grid: &TensorGrid, coeffs: &Coefficients) -> Result<EllipticOperator> {
    if grid.dims() != 2 {
        return Err(Error::invalid("assemble_operator_2d needs a 2D grid"));
    }
    assemble_operator(grid, coeffs)
}

/// Interior system of the nonhomogeneous Dirichlet problem,
/// `S u = Π h · (W ⊗ W) f − Ĩᵀ S̄ Ḡ`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub rhs: Vec<f64>,
    lifting: GridFunction,
}

impl ReducedSystem {
    /// The boundary-data grid function `Ḡ` (zero at interior points).
    pub fn lifting(&self) -> &GridFunction {
        &self.lifting
    }

    /// `u_h = Infl(u) + Ḡ` on the full grid.
    pub fn full_solution(&self, interior: &[f64]) -> Result<GridFunction> {
        let grid = self.lifting.grid();
        let u = GridFunction::from_values(grid, Region::Interior, interior.to_vec())?.inflate()?;
        let values = u
            .values()
            .iter()
            .zip(self.lifting.values())
            .map(|(a, b)| a + b)
            .collect();
        GridFunction::from_values(grid, Region::Full, values)
    }
}

/// Builds the interior system for `u = g` on the boundary.
///
/// `f` may be given on the full grid or on the interior; `g` must be a
/// full-grid function whose interior entries are ignored.
pub fn reduce_dirichlet(
    op: &EllipticOperator,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<ReducedSystem> {
    let grid = op.grid();
    if g.region() != Region::Full || g.len() != op.full_len() {
        return Err(Error::invalid("boundary data must be a full-grid function"));
    }
    let f_int = match f.region() {
        Region::Full => f.restrict()?,
        Region::Interior => f.clone(),
    };
    if f_int.len() != op.interior_len() {
        return Err(Error::invalid("right-hand side does not match the grid"));
    }
    let mut lifting = g.clone();
    let shape = grid.shape(Region::Full);
    for_each_index(&shape, |k, idx| {
        if !grid.is_boundary(idx) {
            lifting.values_mut()[k] = 0.0;
        }
    });
    let mass = op.lumped_mass();
    let s_g = op.apply_full(lifting.values());
    let rhs = op
        .interior_indices()
        .iter()
        .zip(f_int.values())
        .map(|(&k, &fv)| mass[k] * fv - s_g[k])
        .collect();
    Ok(ReducedSystem { rhs, lifting })
}

/// Boundary flux `(a∇u)·n` sampled on every face of the grid.
#[derive(Debug, Clone)]
pub struct BoundaryFlux {
    /// `faces[axis][side]` holds the samples over the face `x_axis = lo`
    /// (side 0) or `hi` (side 1), in full-grid storage order with `axis` removed.
    faces: Vec<[Vec<f64>; 2]>,
}

impl BoundaryFlux {
    /// Samples `flux(point, axis, outward_sign)` where the outward normal is
    /// `outward_sign · e_axis`.
    pub fn sample(grid: &TensorGrid, flux: impl Fn(&[f64], usize, f64) -> f64) -> Self {
        let shape = grid.shape(Region::Full);
        let faces = (0..grid.dims())
            .map(|ax| {
                let mut face_shape = shape.clone();
                face_shape.remove(ax);
                let sides = [0usize, 1].map(|side| {
                    let fixed = if side == 0 { 0 } else { shape[ax] - 1 };
                    let sign = if side == 0 { -1.0 } else { 1.0 };
                    let mut vals = Vec::with_capacity(face_shape.iter().product());
                    for_each_index(&face_shape, |_, fidx| {
                        let mut idx = fidx.to_vec();
                        idx.insert(ax, fixed);
                        vals.push(flux(&grid.point(&idx), ax, sign));
                    });
                    vals
                });
                sides
            })
            .collect();
        BoundaryFlux { faces }
    }

    /// Gauss-Lobatto face quadrature `∫_∂Ω g v` against each nodal basis function.
    fn load(&self, op: &EllipticOperator) -> Vec<f64> {
        let grid = op.grid();
        let shape = grid.shape(Region::Full);
        let mut out = vec![0.0; op.full_len()];
        for (ax, sides) in self.faces.iter().enumerate() {
            let mut face_shape = shape.clone();
            face_shape.remove(ax);
            for (side, vals) in sides.iter().enumerate() {
                let fixed = if side == 0 { 0 } else { shape[ax] - 1 };
                for_each_index(&face_shape, |k, fidx| {
                    let mut idx = fidx.to_vec();
                    idx.insert(ax, fixed);
                    let w: f64 = (0..grid.dims())
                        .filter(|&m| m != ax)
                        .map(|m| grid.axis(m).spacing() * op.stencils(m).w_bar()[idx[m]])
                        .product();
                    out[flat_index(&shape, &idx)] += w * vals[k];
                });
            }
        }
        out
    }
}

/// Full-grid system `S̄ u = M̄ f (+ boundary flux load)` of the Neumann problem.
#[derive(Debug, Clone)]
pub struct FullSystem {
    pub rhs: Vec<f64>,
}

/// Builds the Neumann system over all grid points. Requires `c > 0` at every
/// grid point, since with `c = 0` constants are in the kernel of `S̄`.
pub fn neumann_full_system(
    op: &EllipticOperator,
    f: &GridFunction,
    flux: Option<&BoundaryFlux>,
) -> Result<FullSystem> {
    if op.min_reaction() <= 0.0 {
        return Err(Error::invalid(format!(
            "Neumann problems need c > 0 on the grid (min c = {})",
            op.min_reaction()
        )));
    }
    if f.region() != Region::Full || f.len() != op.full_len() {
        return Err(Error::invalid("Neumann right-hand side must be a full-grid function"));
    }
    let mass = op.lumped_mass();
    let mut rhs: Vec<f64> = mass.iter().zip(f.values()).map(|(m, v)| m * v).collect();
    if let Some(flux) = flux {
        for (r, g) in rhs.iter_mut().zip(flux.load(op)) {
            *r += g;
        }
    }
    Ok(FullSystem { rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, sample, SampleRegion};
    use rand::{Rng, SeedableRng};

    fn unit_grid_1d(cells: usize) -> TensorGrid {
        build_grid(&[(0.0, 1.0)], &[cells]).unwrap()
    }

    #[test]
    fn stencil_rows_match_displayed_matrices() {
        let st = build_stencils(7, 1.0).unwrap();
        let d = st.d().to_dense();
        assert_eq!(&d[0][..3], &[-1.5, 2.0, -0.5]);
        assert_eq!(&d[1][..3], &[-0.5, 0.0, 0.5]);
        assert_eq!(&d[2][..5], &[0.25, -1.0, 0.0, 1.0, -0.25]);
        assert_eq!(&d[6][4..], &[0.5, -2.0, 1.5]);
        let e = st.e().to_dense();
        for i in [0, 1, 3, 5, 6] {
            assert!(e[i].iter().all(|&v| v == 0.0), "row {i}");
        }
        assert_eq!(&e[2][..5], &[-0.25, 1.0, -1.5, 1.0, -0.25]);
        assert_eq!(st.w_bar(), &[1.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(st.w_int(), &[4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0]);
    }

    #[test]
    fn rejects_even_interior_counts() {
        assert!(matches!(build_stencils(6, 0.1), Err(Error::InvalidArgument(_))));
        assert!(build_stencils(2, 0.1).is_err());
        assert!(build_stencils(5, 0.0).is_err());
    }

    #[test]
    fn d_rows_annihilate_constants_and_differentiate_quadratics() {
        let n_pts = 9;
        let h = 0.125;
        let st = build_stencils(n_pts, h).unwrap();
        let ones = vec![1.0; n_pts];
        assert!(st.d().mul_vec(&ones).iter().all(|v| v.abs() < 1e-15));
        assert!(st.e().mul_vec(&ones).iter().all(|v| v.abs() < 1e-15));
        let x: Vec<f64> = (0..n_pts).map(|i| i as f64 * h).collect();
        let p: Vec<f64> = x.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let dp = st.d().mul_vec(&p);
        for (i, &xi) in x.iter().enumerate() {
            assert!((dp[i] - h * (6.0 * xi - 1.0)).abs() < 1e-13);
        }
        // A global quadratic has no derivative jumps.
        assert!(st.e().mul_vec(&p).iter().all(|v| v.abs() < 1e-13));
    }

    /// Brute-force `∫ a v_i' v_j'` on one cell with the 3-point Lobatto rule,
    /// using the Lagrange basis on nodes `(0, h, 2h)`.
    fn p2_cell_stiffness(h: f64, a: [f64; 3]) -> [[f64; 3]; 3] {
        let nodes = [0.0, h, 2.0 * h];
        let dphi = |i: usize, x: f64| -> f64 {
            let others: Vec<f64> = (0..3).filter(|&k| k != i).map(|k| nodes[k]).collect();
            let denom = (nodes[i] - others[0]) * (nodes[i] - others[1]);
            (2.0 * x - others[0] - others[1]) / denom
        };
        let w = [h / 3.0, 4.0 * h / 3.0, h / 3.0];
        let mut s = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = (0..3).map(|q| w[q] * a[q] * dphi(i, nodes[q]) * dphi(j, nodes[q])).sum();
            }
        }
        s
    }

    #[test]
    fn single_cell_stiffness() {
        let h = 0.5;
        let st = build_stencils(3, h).unwrap();
        let s = assemble_stiffness_1d(&st, &[1.0; 3]).unwrap().to_dense();
        let expected = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];
        let oracle = p2_cell_stiffness(h, [1.0; 3]);
        for i in 0..3 {
            for j in 0..3 {
                assert!((s[i][j] - expected[i][j] / (6.0 * h)).abs() < 1e-13);
                assert!((s[i][j] - oracle[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn stiffness_1d_matches_cellwise_assembly() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let n_pts = 11;
        let h = 0.1;
        let a: Vec<f64> = (0..n_pts).map(|_| rng.gen_range(0.5..2.0)).collect();
        let st = build_stencils(n_pts, h).unwrap();
        let s = assemble_stiffness_1d(&st, &a).unwrap();
        let mut oracle = vec![vec![0.0; n_pts]; n_pts];
        for c in 0..(n_pts - 1) / 2 {
            let k = 2 * c;
            let local = p2_cell_stiffness(h, [a[k], a[k + 1], a[k + 2]]);
            for i in 0..3 {
                for j in 0..3 {
                    oracle[k + i][k + j] += local[i][j];
                }
            }
        }
        for i in 0..n_pts {
            let row_sum: f64 = (0..n_pts).map(|j| s.get(i, j)).sum();
            assert!(row_sum.abs() < 1e-12);
            for j in 0..n_pts {
                assert!((s.get(i, j) - oracle[i][j]).abs() < 1e-12, "({i},{j})");
            }
        }
        assert!(assemble_stiffness_1d(&st, &a[1..]).is_err());
    }

    #[test]
    fn exact_h_rows() {
        let h = exact_interior_h(7).unwrap();
        let r = |n, d| Rational64::new(n, d);
        let z = r(0, 1);
        assert_eq!(h[0], vec![r(2, 1), r(-1, 1), z, z, z, z, z]);
        assert_eq!(h[1], vec![r(-2, 1), r(7, 2), r(-2, 1), r(1, 4), z, z, z]);
        assert_eq!(h[2], vec![z, r(-1, 1), r(2, 1), r(-1, 1), z, z, z]);
        assert_eq!(h[3], vec![z, r(1, 4), r(-2, 1), r(7, 2), r(-2, 1), r(1, 4), z]);
        assert_eq!(h[6], vec![z, z, z, z, z, r(-1, 1), r(2, 1)]);
        let hf = laplacian_h_1d(7, 0.5).unwrap();
        assert!((hf[3][3] - 3.5 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn kronecker_sum_matches_definition() {
        let a = vec![vec![2.0, -1.0], vec![-1.0, 2.0]];
        let b = vec![vec![1.0, 0.0, 0.5], vec![0.0, 3.0, 0.0], vec![0.5, 0.0, 1.0]];
        let k = kronecker_sum(&[a.clone(), b.clone()]).to_dense();
        for i0 in 0..2 {
            for j0 in 0..3 {
                for i1 in 0..2 {
                    for j1 in 0..3 {
                        let expect = a[i0][i1] * f64::from(u8::from(j0 == j1))
                            + b[j0][j1] * f64::from(u8::from(i0 == i1));
                        assert_eq!(k[i0 * 3 + j0][i1 * 3 + j1], expect);
                    }
                }
            }
        }
    }

    fn random_coeffs(grid: &TensorGrid, seed: u64, with_convection: bool) -> Coefficients {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let p: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Coefficients::from_fields(
            grid,
            |i, j, x| {
                let s = if i == j { 3.0 } else { 0.0 };
                let m = if i == j { p[i] } else { p[2] };
                s + m * (x[0] + 0.5 * x[x.len() - 1]).sin()
            },
            |i, x| if with_convection { p[4 + i] * (x[0] * x[x.len() - 1]).cos() } else { 0.0 },
            |x| 1.0 + p[6] * p[6] * x[0],
        )
        .unwrap()
    }

    #[test]
    fn matrix_free_apply_matches_sparse_export() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let grid = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[3, 4]).unwrap();
        for (seed, conv) in [(1, false), (2, true)] {
            let op = assemble_operator_2d(&grid, &random_coeffs(&grid, seed, conv)).unwrap();
            let s = op.to_csr();
            let u: Vec<f64> = (0..op.full_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = op.apply_full(&u);
            let b = s.mul_vec(&u);
            let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-13 * scale);
            }
            let ui: Vec<f64> = (0..op.interior_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ai = op.apply_interior(&ui);
            let bi = op.interior_csr().mul_vec(&ui);
            for (x, y) in ai.iter().zip(&bi) {
                assert!((x - y).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn symmetric_coefficients_give_symmetric_matrix() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[3, 3]).unwrap();
        let op = assemble_operator_2d(&grid, &random_coeffs(&grid, 5, false)).unwrap();
        assert!(op.is_symmetric());
        let s = op.to_csr();
        assert!(s.max_abs_diff(&s.transpose()) <= 1e-13 * s.max_abs());
        let op = assemble_operator_2d(&grid, &random_coeffs(&grid, 5, true)).unwrap();
        assert!(!op.is_symmetric());
    }

    #[test]
    fn reaction_only_is_lumped_mass() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[2, 3]).unwrap();
        let c = Coefficients::from_fields(&grid, |_, _, _| 0.0, |_, _| 0.0, |_| 1.0).unwrap();
        let op = assemble_operator_2d(&grid, &c).unwrap();
        let s = op.to_csr();
        let mass = op.lumped_mass();
        assert_eq!(s.nnz(), op.full_len());
        for (k, m) in mass.iter().enumerate() {
            assert!((s.get(k, k) - m).abs() < 1e-15);
        }
        // Total mass is the domain area.
        assert!((mass.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn pure_diffusion_rows_sum_to_zero() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[3, 2]).unwrap();
        let mut c = random_coeffs(&grid, 9, false);
        c.reaction = GridFunction::zeros(&grid, Region::Full);
        let op = assemble_operator_2d(&grid, &c).unwrap();
        let r = op.apply_full(&vec![1.0; op.full_len()]);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn bilinear_solution_is_reproduced() {
        // -Δu = 0 with u = xy: the interior residual of the reduced system vanishes.
        let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[3, 3]).unwrap();
        let op = assemble_operator_2d(&grid, &Coefficients::laplacian(&grid)).unwrap();
        let u = sample(|p| p[0] * p[1], &grid, SampleRegion::Full);
        let g = sample(|p| p[0] * p[1], &grid, SampleRegion::Boundary);
        let f = GridFunction::zeros(&grid, Region::Interior);
        let sys = reduce_dirichlet(&op, &f, &g).unwrap();
        let ui = u.restrict().unwrap();
        let su = op.apply_interior(ui.values());
        for (a, b) in su.iter().zip(&sys.rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_boundary_data_leaves_mass_weighted_rhs() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[2, 2]).unwrap();
        let op = assemble_operator_2d(&grid, &Coefficients::laplacian(&grid)).unwrap();
        let f = sample(|p| 1.0 + p[0], &grid, SampleRegion::Interior);
        let g = GridFunction::zeros(&grid, Region::Full);
        let sys = reduce_dirichlet(&op, &f, &g).unwrap();
        let (hx, hy) = (0.25, 0.5);
        let (wx, wy) = (op.stencils(0).w_int(), op.stencils(1).w_int());
        for i in 0..3 {
            for j in 0..3 {
                let expect = hx * hy * wx[i] * wy[j] * f.at(&[i, j]);
                assert!((sys.rhs[i * 3 + j] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn neumann_requires_positive_reaction() {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap();
        let op = assemble_operator_2d(&grid, &Coefficients::laplacian(&grid)).unwrap();
        let f = GridFunction::zeros(&grid, Region::Full);
        assert!(matches!(
            neumann_full_system(&op, &f, None),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn one_dimensional_operator_matches_stiffness() {
        let grid = unit_grid_1d(4);
        let a: Vec<f64> = grid.axis(0).coords().iter().map(|x| 1.0 + x * x).collect();
        let coeffs = Coefficients::from_fields(&grid, |_, _, p| 1.0 + p[0] * p[0], |_, _| 0.0, |_| 0.0)
            .unwrap();
        let op = assemble_operator(&grid, &coeffs).unwrap();
        let s = assemble_stiffness_1d(op.stencils(0), &a).unwrap();
        assert!(op.to_csr().max_abs_diff(&s) < 1e-13);
    }
}
