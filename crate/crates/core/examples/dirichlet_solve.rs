//! Variable-coefficient Dirichlet and Neumann solves on one mesh.

use q2fd::harness::{run_solve, SolverConfig, SolverKind};
use q2fd::problems::builtin;

fn main() -> q2fd::Result<()> {
    for (name, solver) in [
        ("dirichlet2d", SolverKind::Auto),
        ("dirichlet2d", SolverKind::Direct),
        ("neumann2d", SolverKind::Auto),
        ("convection2d", SolverKind::Auto),
    ] {
        let spec = builtin(name)?;
        let config = SolverConfig { solver, ..SolverConfig::default() };
        let out = run_solve(&spec, &[16, 32], &config)?;
        let (l2, linf) = out.errors.unwrap();
        println!(
            "{name:<13} {:?}: {} iterations, l2 {l2:.3e}, linf {linf:.3e}, {:.3}s",
            out.solver, out.report.iterations, out.report.wall_time
        );
    }
    Ok(())
}
