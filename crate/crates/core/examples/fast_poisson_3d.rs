//! Fast diagonalization solve of the 3D Laplacian, checked against a direct solve.

use q2fd::assembly::{kronecker_sum, laplacian_h_1d};
use q2fd::grid::{build_grid, sample, Region, SampleRegion};
use q2fd::solvers::{direct_solve, fast_poisson_solve};
use std::f64::consts::PI;

fn main() -> q2fd::Result<()> {
    let u = |p: &[f64]| (PI * p[0]).sin() * (PI * p[1]).sin() * (PI * p[2]).sin();
    for cells in [4, 8, 16] {
        let grid = build_grid(&[(0.0, 1.0); 3], &[cells; 3])?;
        let f = sample(|p| 3.0 * PI * PI * u(p), &grid, SampleRegion::Interior);
        let fast = fast_poisson_solve(&grid, f.values())?;
        let exact = sample(u, &grid, SampleRegion::Interior);
        let err = fast
            .solution
            .iter()
            .zip(exact.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        print!("{:>3}^3 points: max error {err:.3e}, {:.4}s", grid.shape(Region::Interior)[0], fast.wall_time);
        if cells <= 8 {
            let n = grid.shape(Region::Interior)[0];
            let h = laplacian_h_1d(n, grid.axis(0).spacing())?;
            let a = kronecker_sum(&[h.clone(), h.clone(), h]);
            let direct = direct_solve(&a, f.values())?;
            let diff = direct
                .solution
                .iter()
                .zip(&fast.solution)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            print!(", |fast - direct| {diff:.1e}");
        }
        println!();
    }
    Ok(())
}
