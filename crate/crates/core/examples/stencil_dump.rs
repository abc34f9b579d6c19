//! Prints the one-dimensional difference matrices and the interior stencil rows.

use q2fd::assembly::exact_interior_h;
use q2fd::harness::dump_stencil;

fn main() -> q2fd::Result<()> {
    print!("{}", dump_stencil(4)?);

    let h = exact_interior_h(7)?;
    let row = |r: &[_]| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    println!("cell center row: {}", row(&h[2][1..4]));
    println!("knot row x 4h^2: {}", row(&h[3][1..6].iter().map(|r| *r * 4).collect::<Vec<_>>()));
    Ok(())
}
