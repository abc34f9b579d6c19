//! Exports the assembled operator in Matrix Market format and reads it back.

use q2fd::assembly::{assemble_operator, Coefficients};
use q2fd::grid::build_grid;
use q2fd::sparse::CsrMatrix;

fn main() -> q2fd::Result<()> {
    let grid = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2])?;
    let coeffs = Coefficients::from_fields(
        &grid,
        |i, j, p| if i == j { 1.0 + p[0] * p[1] } else { 0.25 },
        |_, _| 0.0,
        |p| 1.0 + p[0],
    )?;
    let op = assemble_operator(&grid, &coeffs)?;
    let a = op.to_csr();

    let mut buf = Vec::new();
    a.write_matrix_market(&mut buf)?;
    let text = String::from_utf8(buf).expect("matrix market output is ascii");
    for line in text.lines().take(6) {
        println!("{line}");
    }
    println!("... {} entries", a.nnz());

    let back = CsrMatrix::read_matrix_market(&text)?;
    println!("round trip max difference {:.1e}", a.max_abs_diff(&back));
    println!("symmetric: {}", op.is_symmetric());
    Ok(())
}
