//! Uniform tensor-product grids and grid functions.
//!
//! A grid with `N` quadratic cells along an axis has `n = 2N - 1` interior
//! points and `n + 2` points in total; these are exactly the Gauss-Lobatto
//! points of the `Q^2` mesh. Grid functions are stored with the last axis
//! varying fastest, which for 2D is the column-by-column vectorization of a
//! matrix whose rows follow `y` and whose columns follow `x`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// One axis of a tensor grid: `[lo, hi]` split into `cells` quadratic cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    lo: f64,
    hi: f64,
    cells: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::invalid("cell count per axis must be at least 1"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid(format!("bad axis extent [{lo}, {hi}]")));
        }
        Ok(Axis { lo, hi, cells })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Number of finite element cells.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Number of interior grid points, always odd.
    pub fn interior(&self) -> usize {
        2 * self.cells - 1
    }

    /// Number of grid points including both boundary points.
    pub fn points(&self) -> usize {
        2 * self.cells + 1
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (2 * self.cells) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.points() {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points()).map(|i| self.coord(i)).collect()
    }
}

/// Which part of the grid a [`GridFunction`] covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// All `n + 2` points per axis.
    Full,
    /// The `n` interior points per axis.
    Interior,
}

/// Where [`sample`] evaluates a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleRegion {
    Full,
    Interior,
    /// Full-grid function equal to the field on boundary points and zero inside.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    axes: Vec<Axis>,
}

impl TensorGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::invalid(format!(
                "grids have 1 to 3 dimensions, got {}",
                axes.len()
            )));
        }
        Ok(TensorGrid { axes })
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self, region: Region) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| match region {
                Region::Full => a.points(),
                Region::Interior => a.interior(),
            })
            .collect()
    }

    pub fn len(&self, region: Region) -> usize {
        self.shape(region).iter().product()
    }

    /// Product of the axis spacings; the weight of one point in the discrete
    /// 2-norm.
    pub fn point_measure(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Physical coordinates of a full-grid multi-index.
    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.coord(i))
            .collect()
    }

    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.axes)
            .any(|(&i, a)| i == 0 || i + 1 == a.points())
    }

    /// Full-grid multi-index of local Gauss-Lobatto point `local` (entries in
    /// `0..3`) of cell `cell`.
    pub fn cell_to_grid(&self, cell: &[usize], local: &[usize]) -> Result<Vec<usize>> {
        if cell.len() != self.dims() || local.len() != self.dims() {
            return Err(Error::invalid("index dimension does not match grid"));
        }
        cell.iter()
            .zip(local)
            .zip(&self.axes)
            .map(|((&c, &l), a)| {
                if c >= a.cells() || l > 2 {
                    Err(Error::invalid(format!("cell {c} / local {l} out of range")))
                } else {
                    Ok(2 * c + l)
                }
            })
            .collect()
    }

    /// Every `(cell, local)` pair that owns a full-grid point. Knots are shared
    /// by up to `2^dims` cells.
    pub fn grid_to_cells(&self, idx: &[usize]) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        if idx.len() != self.dims() {
            return Err(Error::invalid("index dimension does not match grid"));
        }
        let mut per_axis: Vec<Vec<(usize, usize)>> = Vec::with_capacity(self.dims());
        for (&i, a) in idx.iter().zip(&self.axes) {
            if i >= a.points() {
                return Err(Error::invalid(format!("grid index {i} out of range")));
            }
            let mut owners = Vec::new();
            if i % 2 == 1 {
                owners.push(((i - 1) / 2, 1));
            } else {
                if i > 0 {
                    owners.push((i / 2 - 1, 2));
                }
                if i / 2 < a.cells() {
                    owners.push((i / 2, 0));
                }
            }
            per_axis.push(owners);
        }
        let mut out = vec![(Vec::new(), Vec::new())];
        for owners in per_axis {
            let mut next = Vec::with_capacity(out.len() * owners.len());
            for (cell, local) in &out {
                for &(c, l) in &owners {
                    let mut cell = cell.clone();
                    let mut local = local.clone();
                    cell.push(c);
                    local.push(l);
                    next.push((cell, local));
                }
            }
            out = next;
        }
        Ok(out)
    }
}

/// Builds a grid over the box `extents` with the given number of quadratic
/// cells per axis.
pub fn build_grid(extents: &[(f64, f64)], cells: &[usize]) -> Result<TensorGrid> {
    if extents.len() != cells.len() {
        return Err(Error::invalid(format!(
            "{} extents but {} cell counts",
            extents.len(),
            cells.len()
        )));
    }
    let axes = extents
        .iter()
        .zip(cells)
        .map(|(&(lo, hi), &c)| Axis::new(lo, hi, c))
        .collect::<Result<Vec<_>>>()?;
    TensorGrid::new(axes)
}

/// Values on a grid region, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TensorGrid,
    region: Region,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &TensorGrid, region: Region) -> Self {
        GridFunction {
            grid: grid.clone(),
            region,
            values: vec![0.0; grid.len(region)],
        }
    }

    pub fn from_values(grid: &TensorGrid, region: Region, values: Vec<f64>) -> Result<Self> {
        let expected = grid.len(region);
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "grid function needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(GridFunction {
            grid: grid.clone(),
            region,
            values,
        })
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn shape(&self) -> Vec<usize> {
        self.grid.shape(self.region)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        flat_index(&self.shape(), idx)
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    pub fn at_mut(&mut self, idx: &[usize]) -> &mut f64 {
        let k = self.flat_index(idx);
        &mut self.values[k]
    }

    /// Entrywise `self - other`; both must live on the same region.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.region != other.region || self.values.len() != other.values.len() {
            return Err(Error::invalid("grid functions live on different regions"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            region: self.region,
            values,
        })
    }

    /// Drops boundary points.
    pub fn restrict(&self) -> Result<GridFunction> {
        if self.region != Region::Full {
            return Err(Error::invalid("restrict expects a full-grid function"));
        }
        let full = self.grid.shape(Region::Full);
        let mut out = GridFunction::zeros(&self.grid, Region::Interior);
        let inner = out.shape();
        for_each_index(&inner, |k, idx| {
            let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            out.values[k] = self.values[flat_index(&full, &shifted)];
        });
        Ok(out)
    }

    /// Pads an interior function with zero boundary values.
    pub fn inflate(&self) -> Result<GridFunction> {
        if self.region != Region::Interior {
            return Err(Error::invalid("inflate expects an interior function"));
        }
        let full = self.grid.shape(Region::Full);
        let mut out = GridFunction::zeros(&self.grid, Region::Full);
        for_each_index(&self.shape(), |k, idx| {
            let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            out.values[flat_index(&full, &shifted)] = self.values[k];
        });
        Ok(out)
    }

    /// Writes one CSV row per grid line. In 2D row `j` holds the values at
    /// `y_j` for increasing `x`; in 1D there is a single row; in 3D row
    /// `(i, j)` (with `i` slowest) holds the values along `z`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let shape = self.shape();
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        let fmt = |v: f64| format!("{v:e}");
        match shape.len() {
            1 => w.write_record(self.values.iter().map(|&v| fmt(v)))?,
            2 => {
                for j in 0..shape[1] {
                    w.write_record((0..shape[0]).map(|i| fmt(self.values[i * shape[1] + j])))?;
                }
            }
            _ => {
                for row in self.values.chunks(shape[2]) {
                    w.write_record(row.iter().map(|&v| fmt(v)))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout written by [`GridFunction::write_csv`].
    pub fn read_csv<R: Read>(reader: R, grid: &TensorGrid, region: Region) -> Result<Self> {
        let shape = grid.shape(region);
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::invalid(format!("bad CSV value `{s}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let mut values = vec![0.0; grid.len(region)];
        let bad = || Error::invalid("CSV dimensions do not match the grid");
        match shape.len() {
            1 => {
                if rows.len() != 1 || rows[0].len() != shape[0] {
                    return Err(bad());
                }
                values.copy_from_slice(&rows[0]);
            }
            2 => {
                if rows.len() != shape[1] || rows.iter().any(|r| r.len() != shape[0]) {
                    return Err(bad());
                }
                for (j, row) in rows.iter().enumerate() {
                    for (i, &v) in row.iter().enumerate() {
                        values[i * shape[1] + j] = v;
                    }
                }
            }
            _ => {
                if rows.len() != shape[0] * shape[1] || rows.iter().any(|r| r.len() != shape[2]) {
                    return Err(bad());
                }
                values = rows.concat();
            }
        }
        GridFunction::from_values(grid, region, values)
    }
}

/// Flat offset of a multi-index, last axis fastest.
pub fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter()
        .zip(shape)
        .fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Calls `f(flat, multi_index)` for every index of `shape` in storage order.
pub fn for_each_index(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    for k in 0..total {
        f(k, &idx);
        for d in (0..shape.len()).rev() {
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Samples `field` at the points of `region`; coordinates are passed in axis
/// order.
pub fn sample(
    field: impl Fn(&[f64]) -> f64,
    grid: &TensorGrid,
    region: SampleRegion,
) -> GridFunction {
    let stored = match region {
        SampleRegion::Interior => Region::Interior,
        SampleRegion::Full | SampleRegion::Boundary => Region::Full,
    };
    let offset = usize::from(stored == Region::Interior);
    let mut out = GridFunction::zeros(grid, stored);
    let shape = out.shape();
    let mut coords = vec![0.0; grid.dims()];
    for_each_index(&shape, |k, idx| {
        let full: Vec<usize> = idx.iter().map(|i| i + offset).collect();
        if region == SampleRegion::Boundary && !grid.is_boundary(&full) {
            return;
        }
        for (d, &i) in full.iter().enumerate() {
            coords[d] = grid.axis(d).coord(i);
        }
        out.values[k] = field(&coords);
    });
    out
}

/// Discrete 2-norm over the points of `err`: `[Π h_s · Σ |e|^2]^{1/2}`.
pub fn norm_2_z0(err: &GridFunction) -> f64 {
    let sum: f64 = err.values.iter().map(|v| v * v).sum();
    (err.grid.point_measure() * sum).sqrt()
}

/// Maximum absolute value over the points of `err`.
pub fn norm_inf_z0(err: &GridFunction) -> f64 {
    err.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes_follow_cell_counts() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[2, 4]).unwrap();
        assert_eq!(g.shape(Region::Interior), vec![3, 7]);
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[64, 128]).unwrap();
        assert_eq!(g.shape(Region::Interior), vec![127, 255]);
        assert_eq!(g.shape(Region::Full), vec![129, 257]);
        let g = build_grid(&[(0.0, 1.0)], &[1]).unwrap();
        assert_eq!(g.axis(0).interior(), 1);
        assert_eq!(g.axis(0).spacing(), 0.5);
        assert_eq!(g.axis(0).coords(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_zero_cells_and_mismatches() {
        assert!(build_grid(&[(0.0, 1.0)], &[0]).is_err());
        assert!(build_grid(&[(0.0, 1.0)], &[1, 2]).is_err());
        assert!(build_grid(&[(1.0, 0.0)], &[1]).is_err());
    }

    #[test]
    fn sampling_regions() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap();
        let ones = sample(|_| 1.0, &g, SampleRegion::Interior);
        assert_eq!(ones.values(), &[1.0; 9]);

        let g1 = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[1, 1]).unwrap();
        let gb = sample(|p| p[0], &g1, SampleRegion::Boundary);
        assert_eq!(gb.at(&[1, 1]), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                if (i, j) != (1, 1) {
                    assert_eq!(gb.at(&[i, j]), g1.axis(0).coord(i));
                }
            }
        }
    }

    #[test]
    fn sample_of_variable_coefficient_at_origin() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[2, 4]).unwrap();
        let a11 = sample(
            |p| 10.0 + 30.0 * p[1].powi(5) + p[0] * p[1].cos() + p[1],
            &g,
            SampleRegion::Full,
        );
        assert_eq!(a11.at(&[0, 0]), 10.0);
    }

    #[test]
    fn vec_layout_is_column_major_with_rows_along_y() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[2, 3]).unwrap();
        let f = |p: &[f64]| p[0] + 10.0 * p[1];
        let s = sample(f, &g, SampleRegion::Full);
        let rows = g.axis(1).points();
        for i in 1..=g.axis(0).points() {
            for j in 1..=rows {
                // Matrix entry (j, i), 1-based, sits at vec position (i-1)*rows + (j-1).
                let v = s.values()[(i - 1) * rows + (j - 1)];
                let (x, y) = (g.axis(0).coord(i - 1), g.axis(1).coord(j - 1));
                assert_eq!(v, f(&[x, y]));
            }
        }
    }

    #[test]
    fn norms() {
        // Four points with h_x h_y = 1/4.
        let g = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[1, 1]).unwrap();
        let ones = GridFunction::from_values(&g, Region::Full, vec![1.0; 9]).unwrap();
        assert!((norm_2_z0(&ones) - (9.0f64 / 4.0).sqrt()).abs() < 1e-15);
        let g = build_grid(&[(0.0, 1.0)], &[1]).unwrap();
        let z = GridFunction::zeros(&g, Region::Full);
        assert_eq!(norm_2_z0(&z), 0.0);
        assert_eq!(norm_inf_z0(&z), 0.0);
        let mut e = GridFunction::zeros(&g, Region::Full);
        e.values_mut()[0] = 3.0;
        e.values_mut()[1] = 4.0;
        assert!((norm_2_z0(&e) - 12.5f64.sqrt()).abs() < 1e-15);
        e.values_mut()[0] = -3.0;
        e.values_mut()[1] = 2.0;
        assert_eq!(norm_inf_z0(&e), 3.0);
    }

    #[test]
    fn unit_norm_on_m_points() {
        // 25 points with h = 1/5 per axis.
        let g = build_grid(&[(0.0, 0.8), (0.0, 0.8)], &[2, 2]).unwrap();
        let ones = GridFunction::from_values(&g, Region::Full, vec![1.0; 25]).unwrap();
        assert!((norm_2_z0(&ones) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inflate_restrict() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[1, 1]).unwrap();
        let one = GridFunction::from_values(&g, Region::Interior, vec![1.0]).unwrap();
        let full = one.inflate().unwrap();
        assert_eq!(full.values().iter().sum::<f64>(), 1.0);
        assert_eq!(full.at(&[1, 1]), 1.0);
        assert_eq!(full.restrict().unwrap(), one);
        assert!(one.restrict().is_err());
        assert!(full.inflate().is_err());
    }

    #[test]
    fn cell_grid_round_trip() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[3, 2]).unwrap();
        for cx in 0..3 {
            for cy in 0..2 {
                for a in 0..3 {
                    for b in 0..3 {
                        let p = g.cell_to_grid(&[cx, cy], &[a, b]).unwrap();
                        let owners = g.grid_to_cells(&p).unwrap();
                        assert!(owners.contains(&(vec![cx, cy], vec![a, b])));
                        for (c, l) in owners {
                            assert_eq!(g.cell_to_grid(&c, &l).unwrap(), p);
                        }
                    }
                }
            }
        }
        assert_eq!(g.grid_to_cells(&[2, 2]).unwrap().len(), 4);
        assert_eq!(g.grid_to_cells(&[0, 1]).unwrap().len(), 1);
        assert!(g.cell_to_grid(&[3, 0], &[0, 0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[2, 3]).unwrap();
        let f = sample(|p| p[0].sin() + p[1] * p[1], &g, SampleRegion::Full);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), g.axis(1).points());
        let back = GridFunction::read_csv(buf.as_slice(), &g, Region::Full).unwrap();
        assert_eq!(back, f);
        assert!(GridFunction::read_csv(buf.as_slice(), &g, Region::Interior).is_err());

        let g3 = build_grid(&[(0.0, 1.0); 3], &[1, 2, 1]).unwrap();
        let f3 = sample(|p| p[0] + 2.0 * p[1] + 3.0 * p[2], &g3, SampleRegion::Interior);
        let mut buf = Vec::new();
        f3.write_csv(&mut buf).unwrap();
        assert_eq!(GridFunction::read_csv(buf.as_slice(), &g3, Region::Interior).unwrap(), f3);
    }
}
