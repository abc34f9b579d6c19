use std::process::Command;

use q2fd::assembly::{assemble_operator, Coefficients};
use q2fd::grid::{build_grid, sample, GridFunction, Region, SampleRegion};
use q2fd::harness::{run_solve, SolverConfig};
use q2fd::problems::builtin;
use q2fd::sparse::CsrMatrix;

fn q2fd(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_q2fd")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn solution_csv_round_trips() {
    let spec = builtin("dirichlet2d").unwrap();
    let out = run_solve(&spec, &[2, 4], &SolverConfig::default()).unwrap();
    let mut buf = Vec::new();
    out.solution.write_csv(&mut buf).unwrap();
    let back = GridFunction::read_csv(buf.as_slice(), out.solution.grid(), Region::Full).unwrap();
    assert_eq!(back, out.solution);

    let wrong = build_grid(&spec.domain, &[4, 4]).unwrap();
    assert!(GridFunction::read_csv(buf.as_slice(), &wrong, Region::Full).is_err());
}

#[test]
fn matrix_market_round_trips() {
    let grid = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[2, 3]).unwrap();
    let coeffs = Coefficients::from_fields(
        &grid,
        |i, j, p| if i == j { 2.0 + p[0] } else { 0.3 * p[1] },
        |i, p| if i == 0 { p[1] } else { -p[0] },
        |p| 1.0 + p[0] * p[1],
    )
    .unwrap();
    let a = assemble_operator(&grid, &coeffs).unwrap().to_csr();
    let mut buf = Vec::new();
    a.write_matrix_market(&mut buf).unwrap();
    let back = CsrMatrix::read_matrix_market(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.max_abs_diff(&a), 0.0);
}

#[test]
fn neumann_constant_is_reproduced() {
    let spec = q2fd::problems::ProblemSpec::from_text(
        "one",
        "domain=0,1,0,2\nbc=neumann\na11=1+x*y\na22=2\nc=1+x\nu=1\n",
    )
    .unwrap();
    let out = run_solve(&spec, &[3, 2], &SolverConfig::default()).unwrap();
    let one = sample(|_| 1.0, out.solution.grid(), SampleRegion::Full);
    let err = out.solution.sub(&one).unwrap();
    assert!(err.values().iter().all(|e| e.abs() < 1e-12));
}

#[test]
fn cli_solve_and_exit_codes() {
    let (code, stdout, _) = q2fd(&["solve", "--problem", "dirichlet2d", "--mesh", "4,8"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("l2 error"), "{stdout}");

    let (code, _, stderr) = q2fd(&["solve", "--problem", "nosuch", "--mesh", "4,8"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("dirichlet2d"), "{stderr}");

    let (code, _, _) = q2fd(&["solve", "--problem", "dirichlet2d"]);
    assert_eq!(code, 3);

    let (code, _, _) = q2fd(&["solve", "--problem", "convection2d", "--mesh", "2,4", "--solver", "pcg"]);
    assert_eq!(code, 3);

    let (code, _, stderr) = q2fd(&[
        "solve", "--problem", "dirichlet2d", "--mesh", "8,16", "--solver", "pcg", "--maxit", "2",
    ]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn cli_convergence_and_stencil() {
    let (code, stdout, _) = q2fd(&["convergence", "--problem", "laplace3d", "--levels", "2", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3, "{stdout}");

    let (code, stdout, _) = q2fd(&["stencil", "--cells", "4"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("1/4   -2 7/2   -2  1/4") || stdout.contains("7/2"), "{stdout}");
}
