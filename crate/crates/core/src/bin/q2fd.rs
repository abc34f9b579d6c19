use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use q2fd::harness::{
    default_meshes, doubling_meshes, dump_stencil, run_convergence, run_solve, PrecondKind,
    SolverConfig, SolverKind, TableFormat,
};
use q2fd::problems::resolve;
use q2fd::Error;

#[derive(Parser)]
#[command(name = "q2fd", version, about = "Fourth-order finite difference elliptic solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem on one mesh.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Cells per axis, e.g. `16,32`.
        #[arg(long, value_delimiter = ',', required = true)]
        mesh: Vec<usize>,
        /// Write the full-grid solution as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a mesh-doubling convergence study.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Coarsest mesh; defaults to the problem's standard sequence.
        #[arg(long, value_delimiter = ',')]
        mesh: Option<Vec<usize>>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value = "txt")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print D, E, W̄ and H as exact rationals.
    Stencil {
        #[arg(long, default_value_t = 3)]
        cells: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Built-in problem name or problem file.
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "auto")]
    solver: SolverKind,
    #[arg(long, default_value = "eigen")]
    precond: PrecondKind,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    maxit: Option<usize>,
}

impl Common {
    fn config(&self) -> SolverConfig {
        let mut c = SolverConfig {
            solver: self.solver,
            precond: self.precond,
            maxit: self.maxit,
            ..SolverConfig::default()
        };
        if let Some(tol) = self.tol {
            c.tol = tol;
        }
        c
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> q2fd::Result<()> {
    match cli.command {
        Command::Solve { common, mesh, out } => {
            let spec = resolve(&common.problem)?;
            let res = run_solve(&spec, &mesh, &common.config())?;
            let r = &res.report;
            println!("problem    {}", spec.name);
            println!("mesh       {:?}", mesh);
            println!("solver     {:?}", res.solver);
            println!("iterations {}", r.iterations);
            println!("residual   {:.3e}", r.relative_residual);
            println!("time       {:.3}s", r.wall_time);
            if let Some((l2, linf)) = res.errors {
                println!("l2 error   {l2:.3e}");
                println!("linf error {linf:.3e}");
            }
            if let Some(path) = out {
                res.solution.write_csv(BufWriter::new(File::create(path)?))?;
            }
        }
        Command::Convergence {
            common,
            mesh,
            levels,
            format,
            out,
        } => {
            let spec = resolve(&common.problem)?;
            let meshes = match (mesh, default_meshes(&spec.name)) {
                (Some(base), _) => doubling_meshes(&base, levels.unwrap_or(4)),
                (None, Some(std)) => match levels {
                    Some(l) => doubling_meshes(&std[0], l),
                    None => std,
                },
                (None, None) => {
                    return Err(Error::InvalidArgument(
                        "--mesh is required for problems without a standard sequence".into(),
                    ))
                }
            };
            let table = run_convergence(&spec, &meshes, &common.config())?;
            output(&out)?.write_all(table.render(format).as_bytes())?;
        }
        Command::Stencil { cells, out } => {
            output(&out)?.write_all(dump_stencil(cells)?.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 2 } else { 3 })
        }
    }
}
