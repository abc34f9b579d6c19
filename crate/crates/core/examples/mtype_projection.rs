//! Superapproximation of the piecewise M-type projection at the grid points.

use q2fd::grid::{build_grid, norm_2_z0, sample, SampleRegion};
use q2fd::harness::convergence_order;
use q2fd::quadrature::{piecewise_mtype_projection, PlaneField};

fn main() -> q2fd::Result<()> {
    let u = |x: f64, y: f64| (x + 2.0 * y).sin() * (0.5 * x).exp();
    let dx = |x: f64, y: f64| ((x + 2.0 * y).cos() + 0.5 * (x + 2.0 * y).sin()) * (0.5 * x).exp();
    let dy = |x: f64, y: f64| 2.0 * (x + 2.0 * y).cos() * (0.5 * x).exp();
    let dxy = |x: f64, y: f64| {
        2.0 * (-(x + 2.0 * y).sin() + 0.5 * (x + 2.0 * y).cos()) * (0.5 * x).exp()
    };
    let field = PlaneField { value: &u, dx: &dx, dy: &dy, dxy: &dxy };

    let mut prev = None;
    for cells in [2, 4, 8, 16, 32] {
        let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[cells, cells])?;
        let up = piecewise_mtype_projection(&grid, &field)?;
        let exact = sample(|p| u(p[0], p[1]), &grid, SampleRegion::Full);
        let err = norm_2_z0(&up.sub(&exact)?);
        match prev {
            Some(p) => println!("{cells:>3} cells  error {err:.3e}  order {:.2}", convergence_order(p, err)),
            None => println!("{cells:>3} cells  error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
