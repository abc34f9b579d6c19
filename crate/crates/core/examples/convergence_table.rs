//! Mesh-doubling study with observed orders.
//!
//! `cargo run --release --example convergence_table -- neumann2d 4`

use q2fd::harness::{default_meshes, doubling_meshes, run_convergence, SolverConfig, TableFormat};
use q2fd::problems::resolve;

fn main() -> q2fd::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "dirichlet2d".into());
    let levels: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let spec = resolve(&name)?;
    let base = default_meshes(&spec.name).map_or(vec![2; spec.dims()], |m| m[0].clone());
    let table = run_convergence(&spec, &doubling_meshes(&base, levels), &SolverConfig::default())?;
    print!("{}", table.render(TableFormat::Txt));
    Ok(())
}
