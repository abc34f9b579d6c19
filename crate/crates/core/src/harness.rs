//! Single solves, convergence studies and stencil dumps.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Rational64;

use crate::assembly::{
    assemble_operator, exact_interior_h, exact_stencils, neumann_full_system, reduce_dirichlet,
    BoundaryFlux, Coefficients,
};
use crate::error::{Error, Result};
use crate::grid::{build_grid, norm_2_z0, norm_inf_z0, sample, GridFunction, Region, SampleRegion, TensorGrid};
use crate::problems::{BoundaryCondition, Expr, ProblemSpec};
use crate::quadrature::gauss_lobatto_rule;
use crate::solvers::{
    default_maxit, direct_solve, pcg, EigenPreconditioner, FastPoissonSolver, FullOperator,
    InteriorOperator, LinearOperator, Preconditioner, SolveReport, DEFAULT_PCG_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// PCG for symmetric 2D Dirichlet problems, the fast solver in 3D, LU otherwise.
    #[default]
    Auto,
    Direct,
    Fast,
    Pcg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecondKind {
    #[default]
    Eigen,
    None,
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolverKind::Auto),
            "direct" => Ok(SolverKind::Direct),
            "fast" => Ok(SolverKind::Fast),
            "pcg" => Ok(SolverKind::Pcg),
            _ => Err(Error::invalid(format!("unknown solver `{s}` (auto, direct, fast, pcg)"))),
        }
    }
}

impl FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(PrecondKind::Eigen),
            "none" => Ok(PrecondKind::None),
            _ => Err(Error::invalid(format!("unknown preconditioner `{s}` (eigen, none)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub solver: SolverKind,
    pub precond: PrecondKind,
    pub tol: f64,
    /// `None` selects `10 √N`.
    pub maxit: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            solver: SolverKind::Auto,
            precond: PrecondKind::Eigen,
            tol: DEFAULT_PCG_TOL,
            maxit: None,
        }
    }
}

/// Result of [`run_solve`].
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Full-grid numerical solution, boundary values included.
    pub solution: GridFunction,
    pub report: SolveReport,
    /// Solver that actually ran.
    pub solver: SolverKind,
    /// `(ℓ², ℓ∞)` errors over all grid points, when an exact solution is known.
    pub errors: Option<(f64, f64)>,
}

fn sample_expr(e: &Expr, grid: &TensorGrid, region: SampleRegion) -> Result<GridFunction> {
    let g = sample(|p| e.eval(p), grid, region);
    if let Some(v) = g.values().iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("`{e}` sampled to {v}")));
    }
    Ok(g)
}

fn coefficients(spec: &ProblemSpec, grid: &TensorGrid) -> Result<Coefficients> {
    let d = spec.dims();
    let diffusion = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| sample_expr(&spec.a[i][j], grid, SampleRegion::Full))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let convection = spec
        .b
        .iter()
        .map(|e| sample_expr(e, grid, SampleRegion::Full))
        .collect::<Result<Vec<_>>>()?;
    let reaction = sample_expr(&spec.c, grid, SampleRegion::Full)?;
    Coefficients::new(grid, diffusion, convection, reaction)
}

fn maxit(config: &SolverConfig, n: usize) -> usize {
    config.maxit.unwrap_or_else(|| default_maxit(n))
}

fn run_pcg(
    op: &dyn LinearOperator,
    b: &[f64],
    precond: &Preconditioner,
    config: &SolverConfig,
) -> Result<SolveReport> {
    let cap = maxit(config, op.len());
    let report = pcg(op, b, precond, config.tol, cap)?;
    if report.iterations >= cap && report.relative_residual > config.tol {
        return Err(Error::SolverFailure(format!(
            "conjugate gradients stopped at {cap} iterations with relative residual {:.2e} > {:.0e}; \
             raise --maxit or use the direct solver",
            report.relative_residual, config.tol
        )));
    }
    Ok(report)
}

/// Discretizes and solves `spec` on a grid with `cells` quadratic cells per axis.
pub fn run_solve(spec: &ProblemSpec, cells: &[usize], config: &SolverConfig) -> Result<SolveOutcome> {
    spec.validate()?;
    if cells.len() != spec.dims() {
        return Err(Error::invalid(format!(
            "a {}D problem needs {} cell counts, got {}",
            spec.dims(),
            spec.dims(),
            cells.len()
        )));
    }
    let grid = build_grid(&spec.domain, cells)?;
    let f = sample_expr(&spec.rhs()?, &grid, SampleRegion::Full)?;
    let (solution, report, solver) = if spec.dims() == 3 {
        solve_laplace_3d(spec, &grid, &f, config)?
    } else {
        match spec.bc {
            BoundaryCondition::Dirichlet => solve_dirichlet(spec, &grid, &f, config)?,
            BoundaryCondition::Neumann => solve_neumann(spec, &grid, &f, config)?,
        }
    };
    let errors = match &spec.u {
        Some(u) => {
            let exact = sample_expr(u, &grid, SampleRegion::Full)?;
            let err = solution.sub(&exact)?;
            Some((norm_2_z0(&err), norm_inf_z0(&err)))
        }
        None => None,
    };
    Ok(SolveOutcome {
        solution,
        report,
        solver,
        errors,
    })
}

fn boundary_data(spec: &ProblemSpec, grid: &TensorGrid) -> Result<GridFunction> {
    match &spec.u {
        Some(u) => sample_expr(u, grid, SampleRegion::Boundary),
        None => Ok(GridFunction::zeros(grid, Region::Full)),
    }
}

fn solve_dirichlet(
    spec: &ProblemSpec,
    grid: &TensorGrid,
    f: &GridFunction,
    config: &SolverConfig,
) -> Result<(GridFunction, SolveReport, SolverKind)> {
    let op = assemble_operator(grid, &coefficients(spec, grid)?)?;
    let g = boundary_data(spec, grid)?;
    let system = reduce_dirichlet(&op, f, &g)?;
    let solver = match config.solver {
        SolverKind::Auto if grid.dims() == 2 && op.is_symmetric() => SolverKind::Pcg,
        SolverKind::Auto => SolverKind::Direct,
        s => s,
    };
    let report = match solver {
        SolverKind::Direct | SolverKind::Auto => direct_solve(&op.interior_csr(), &system.rhs)?,
        SolverKind::Pcg => {
            let precond = match config.precond {
                PrecondKind::Eigen if grid.dims() >= 2 => {
                    Preconditioner::Eigen(EigenPreconditioner::new(grid)?)
                }
                _ => Preconditioner::Identity,
            };
            run_pcg(&InteriorOperator(&op), &system.rhs, &precond, config)?
        }
        SolverKind::Fast => {
            if !spec.is_laplacian() || grid.dims() < 2 {
                return Err(Error::invalid(
                    "the fast solver needs a 2D or 3D Laplacian (a = I, b = 0, c = 0)",
                ));
            }
            // S = Π h (W ⊗ W)(H_x ⊕ H_y) for the Laplacian.
            let precond = EigenPreconditioner::new(grid)?;
            let start = std::time::Instant::now();
            let solution = precond.apply_inverse(&system.rhs)?;
            let s = op.apply_interior(&solution);
            let r: f64 = s.iter().zip(&system.rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let nb: f64 = system.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            SolveReport {
                solution,
                iterations: 0,
                relative_residual: if nb > 0.0 { r / nb } else { r },
                wall_time: start.elapsed().as_secs_f64(),
                residual_history: Vec::new(),
            }
        }
    };
    let full = system.full_solution(&report.solution)?;
    Ok((full, report, solver))
}

fn solve_neumann(
    spec: &ProblemSpec,
    grid: &TensorGrid,
    f: &GridFunction,
    config: &SolverConfig,
) -> Result<(GridFunction, SolveReport, SolverKind)> {
    let op = assemble_operator(grid, &coefficients(spec, grid)?)?;
    let flux = match &spec.u {
        Some(_) => {
            let q = spec.flux()?;
            Some(BoundaryFlux::sample(grid, |p, axis, sign| sign * q[axis].eval(p)))
        }
        None => None,
    };
    let system = neumann_full_system(&op, f, flux.as_ref())?;
    let solver = match config.solver {
        SolverKind::Auto | SolverKind::Direct => SolverKind::Direct,
        SolverKind::Pcg if config.precond == PrecondKind::None => SolverKind::Pcg,
        SolverKind::Pcg => {
            return Err(Error::invalid(
                "the eigen preconditioner covers Dirichlet problems only; use --precond none",
            ))
        }
        SolverKind::Fast => {
            return Err(Error::invalid("the fast solver covers Dirichlet Laplacians only"))
        }
    };
    let report = match solver {
        SolverKind::Pcg => run_pcg(&FullOperator(&op), &system.rhs, &Preconditioner::Identity, config)?,
        _ => direct_solve(&op.to_csr(), &system.rhs)?,
    };
    let full = GridFunction::from_values(grid, Region::Full, report.solution.clone())?;
    Ok((full, report, solver))
}

fn solve_laplace_3d(
    spec: &ProblemSpec,
    grid: &TensorGrid,
    f: &GridFunction,
    config: &SolverConfig,
) -> Result<(GridFunction, SolveReport, SolverKind)> {
    if !spec.is_laplacian() || spec.bc != BoundaryCondition::Dirichlet {
        return Err(Error::invalid(
            "3D problems are limited to the Dirichlet Laplacian (a = I, b = 0, c = 0)",
        ));
    }
    let g = boundary_data(spec, grid)?;
    let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if g.values().iter().any(|v| v.abs() > 1e-12 * scale) {
        return Err(Error::invalid("3D problems need homogeneous Dirichlet data"));
    }
    let solver = match config.solver {
        SolverKind::Auto | SolverKind::Fast => SolverKind::Fast,
        SolverKind::Direct => SolverKind::Direct,
        SolverKind::Pcg => {
            return Err(Error::invalid(
                "the 3D operator H is not symmetric; use the fast or direct solver",
            ))
        }
    };
    // Rows of H = M⁻¹ S̄, so the right-hand side is f itself.
    let rhs = f.restrict()?;
    let report = match solver {
        SolverKind::Direct => {
            let hs = grid
                .axes()
                .iter()
                .map(|a| crate::assembly::laplacian_h_1d(a.interior(), a.spacing()))
                .collect::<Result<Vec<_>>>()?;
            direct_solve(&crate::assembly::kronecker_sum(&hs), rhs.values())?
        }
        _ => {
            let start = std::time::Instant::now();
            let fast = FastPoissonSolver::new(grid)?;
            let solution = fast.solve(rhs.values())?;
            let s = fast.apply(&solution);
            let r: f64 = s.iter().zip(rhs.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let nb: f64 = rhs.values().iter().map(|v| v * v).sum::<f64>().sqrt();
            SolveReport {
                solution,
                iterations: 0,
                relative_residual: if nb > 0.0 { r / nb } else { r },
                wall_time: start.elapsed().as_secs_f64(),
                residual_history: Vec::new(),
            }
        }
    };
    let full = GridFunction::from_values(grid, Region::Interior, report.solution.clone())?.inflate()?;
    Ok((full, report, solver))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Quadratic cells per axis.
    pub cells: Vec<usize>,
    /// Finite-difference unknowns per axis: interior points for Dirichlet
    /// problems, all points for Neumann problems.
    pub fd_grid: Vec<usize>,
    pub l2: f64,
    pub l2_order: Option<f64>,
    pub linf: f64,
    pub linf_order: Option<f64>,
    pub iterations: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub problem: String,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Txt,
    Csv,
    Md,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "txt" => Ok(TableFormat::Txt),
            "csv" => Ok(TableFormat::Csv),
            "md" => Ok(TableFormat::Md),
            _ => Err(Error::invalid(format!("unknown format `{s}` (txt, csv, md)"))),
        }
    }
}

/// `log₂(previous / current)`, the observed order under halving of `h`.
pub fn convergence_order(previous: f64, current: f64) -> f64 {
    (previous / current).log2()
}

fn join_dims(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("x")
}

fn fmt_order(o: Option<f64>) -> String {
    o.map_or_else(String::new, |v| format!("{v:.2}"))
}

impl ConvergenceTable {
    /// Builds rows with orders from raw `(cells, fd_grid, l2, linf)` data.
    pub fn from_errors(problem: &str, data: Vec<(Vec<usize>, Vec<usize>, f64, f64)>) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(data.len());
        for (cells, fd_grid, l2, linf) in data {
            let prev = rows.last();
            rows.push(ConvergenceRow {
                l2_order: prev.map(|p| convergence_order(p.l2, l2)),
                linf_order: prev.map(|p| convergence_order(p.linf, linf)),
                cells,
                fd_grid,
                l2,
                linf,
                iterations: 0,
                wall_time: 0.0,
            });
        }
        ConvergenceTable {
            problem: problem.to_string(),
            rows,
        }
    }

    pub fn render(&self, format: TableFormat) -> String {
        let header = ["FEM mesh", "FD grid", "l2 error", "order", "linf error", "order"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    join_dims(&r.cells),
                    join_dims(&r.fd_grid),
                    format!("{:.2e}", r.l2),
                    fmt_order(r.l2_order),
                    format!("{:.2e}", r.linf),
                    fmt_order(r.linf_order),
                ]
            })
            .collect();
        let mut out = String::new();
        match format {
            TableFormat::Csv => {
                out.push_str("fem_mesh,fd_grid,l2_error,l2_order,linf_error,linf_order\n");
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{:e},{},{:e},{}",
                        join_dims(&r.cells),
                        join_dims(&r.fd_grid),
                        r.l2,
                        r.l2_order.map_or_else(String::new, |v| v.to_string()),
                        r.linf,
                        r.linf_order.map_or_else(String::new, |v| v.to_string()),
                    );
                }
            }
            TableFormat::Md => {
                let _ = writeln!(out, "| {} |", header.join(" | "));
                let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
                for c in &cells {
                    let _ = writeln!(out, "| {} |", c.join(" | "));
                }
            }
            TableFormat::Txt => {
                let mut widths = header.map(str::len);
                for c in &cells {
                    for (w, s) in widths.iter_mut().zip(c) {
                        *w = (*w).max(s.len());
                    }
                }
                let _ = writeln!(out, "{}", self.problem);
                let line = |items: Vec<&str>| -> String {
                    items
                        .iter()
                        .zip(widths)
                        .map(|(s, w)| format!("{s:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                let _ = writeln!(out, "{}", line(header.to_vec()));
                for c in &cells {
                    let _ = writeln!(out, "{}", line(c.iter().map(String::as_str).collect()));
                }
            }
        }
        out
    }
}

/// Meshes obtained by doubling `base` `levels - 1` times.
pub fn doubling_meshes(base: &[usize], levels: usize) -> Vec<Vec<usize>> {
    (0..levels)
        .map(|l| base.iter().map(|c| c << l).collect())
        .collect()
}

/// Standard refinement sequence of a built-in problem.
pub fn default_meshes(problem: &str) -> Option<Vec<Vec<usize>>> {
    let (base, levels): (&[usize], usize) = match problem {
        "dirichlet2d" => (&[2, 4], 6),
        "neumann2d" | "convection2d" => (&[2, 4], 5),
        "laplace3d" => (&[4, 4, 4], 4),
        "quadratic1d" => (&[1], 5),
        "bilinear2d" => (&[1, 1], 5),
        _ => return None,
    };
    Some(doubling_meshes(base, levels))
}

/// Worker count from `Q2FD_THREADS`, or the available parallelism.
pub fn thread_limit() -> usize {
    std::env::var("Q2FD_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Solves `spec` on every mesh and tabulates errors and observed orders.
///
/// Meshes run concurrently (up to [`thread_limit`] at a time); rows are ordered
/// by mesh index, so the table does not depend on scheduling.
pub fn run_convergence(
    spec: &ProblemSpec,
    meshes: &[Vec<usize>],
    config: &SolverConfig,
) -> Result<ConvergenceTable> {
    if spec.u.is_none() {
        return Err(Error::invalid("a convergence study needs an exact solution u"));
    }
    if meshes.is_empty() {
        return Err(Error::invalid("no meshes given"));
    }
    for w in meshes.windows(2) {
        if w[0].len() != w[1].len() || w[0].iter().zip(&w[1]).any(|(a, b)| 2 * a != *b) {
            return Err(Error::invalid(format!(
                "meshes must double along every axis, got {} then {}",
                join_dims(&w[0]),
                join_dims(&w[1])
            )));
        }
    }
    let threads = thread_limit().min(meshes.len());
    let mut results: Vec<Option<Result<SolveOutcome>>> = (0..meshes.len()).map(|_| None).collect();
    // Largest meshes first so the slowest solves start early.
    let order: Vec<usize> = (0..meshes.len()).rev().collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(&m) = order.get(k) else { break };
                let outcome = run_solve(spec, &meshes[m], config);
                slots.lock().expect("no worker panicked")[m] = Some(outcome);
            });
        }
    });
    let mut table = ConvergenceTable {
        problem: spec.name.clone(),
        rows: Vec::new(),
    };
    let mut data = Vec::new();
    let mut stats = Vec::new();
    for (mesh, result) in meshes.iter().zip(results) {
        let outcome = result.expect("every mesh was solved")?;
        let (l2, linf) = outcome.errors.expect("exact solution present");
        let fd_grid = match spec.bc {
            BoundaryCondition::Neumann if spec.dims() < 3 => outcome.solution.shape(),
            _ => outcome.solution.grid().shape(Region::Interior),
        };
        data.push((mesh.clone(), fd_grid, l2, linf));
        stats.push((outcome.report.iterations, outcome.report.wall_time));
    }
    let built = ConvergenceTable::from_errors(&spec.name, data);
    for (mut row, (it, t)) in built.rows.into_iter().zip(stats) {
        row.iterations = it;
        row.wall_time = t;
        table.rows.push(row);
    }
    Ok(table)
}

fn fmt_ratio(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn dense_rows(rows: &[[Rational64; 5]]) -> Vec<Vec<Rational64>> {
    let n = rows.len();
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let mut full = vec![Rational64::new(0, 1); n];
            for (k, &v) in r.iter().enumerate() {
                if let Some(j) = (i + k).checked_sub(2).filter(|&j| j < n) {
                    full[j] = v;
                }
            }
            full
        })
        .collect()
}

fn write_matrix(out: &mut String, title: &str, rows: &[Vec<Rational64>]) {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| fmt_ratio(v)).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let _ = writeln!(out, "{title}");
    for r in &cells {
        let line: Vec<String> = r.iter().map(|s| format!("{s:>width$}")).collect();
        let _ = writeln!(out, "  {}", line.join(" "));
    }
}

/// Text dump of `D`, `E`, `W̄` and the interior rows of `H` for `cells`
/// quadratic cells at `h = 1` (scale `D`, `E` by 1, `H` by `1/h²`), together
/// with the 3-point Gauss-Lobatto rule.
pub fn dump_stencil(cells: usize) -> Result<String> {
    if cells == 0 {
        return Err(Error::invalid("need at least one cell"));
    }
    let n_pts = 2 * cells + 1;
    let ex = exact_stencils(n_pts)?;
    let h = exact_interior_h(n_pts - 2)?;
    let rule = gauss_lobatto_rule(3)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{cells} cells, {} interior points, h = 1 (H scales as 1/h^2)",
        n_pts - 2
    );
    let _ = writeln!(
        out,
        "Gauss-Lobatto nodes {:?} weights {:?}",
        rule.nodes(),
        rule.weights()
    );
    write_matrix(&mut out, "D", &dense_rows(&ex.d));
    write_matrix(&mut out, "E", &dense_rows(&ex.e));
    write_matrix(&mut out, "W_bar (diagonal)", &[ex.w_bar.clone()]);
    write_matrix(&mut out, "H (interior)", &h);
    Ok(out)
}
