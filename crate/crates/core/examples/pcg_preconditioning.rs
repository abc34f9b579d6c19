//! Conjugate gradients with and without the Laplacian eigen preconditioner.

use q2fd::assembly::{assemble_operator, reduce_dirichlet, Coefficients};
use q2fd::grid::{build_grid, sample, SampleRegion};
use q2fd::problems::builtin;
use q2fd::solvers::{default_maxit, pcg, EigenPreconditioner, InteriorOperator, Preconditioner};

fn main() -> q2fd::Result<()> {
    let spec = builtin("dirichlet2d")?;
    let (f, u) = (spec.rhs()?, spec.u.clone().unwrap());
    for cells in [[4, 8], [8, 16], [16, 32], [32, 64]] {
        let grid = build_grid(&spec.domain, &cells)?;
        let coeffs = Coefficients::from_fields(
            &grid,
            |i, j, p| spec.a[i][j].eval(p),
            |i, p| spec.b[i].eval(p),
            |p| spec.c.eval(p),
        )?;
        let op = assemble_operator(&grid, &coeffs)?;
        let fs = sample(|p| f.eval(p), &grid, SampleRegion::Full);
        let g = sample(|p| u.eval(p), &grid, SampleRegion::Boundary);
        let sys = reduce_dirichlet(&op, &fs, &g)?;
        let maxit = 20 * default_maxit(op.interior_len());
        let plain = pcg(&InteriorOperator(&op), &sys.rhs, &Preconditioner::Identity, 1e-12, maxit)?;
        let eigen = Preconditioner::Eigen(EigenPreconditioner::new(&grid)?);
        let pre = pcg(&InteriorOperator(&op), &sys.rhs, &eigen, 1e-12, maxit)?;
        println!(
            "{:>3}x{:<3} plain {:>5} its   eigen {:>4} its (residual {:.1e})",
            cells[0], cells[1], plain.iterations, pre.iterations, pre.relative_residual
        );
    }
    Ok(())
}
