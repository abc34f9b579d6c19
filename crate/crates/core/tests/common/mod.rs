use q2fd::assembly::Coefficients;
use q2fd::grid::TensorGrid;
use rand::Rng;

/// Smooth random coefficients built from a handful of trigonometric modes.
pub fn random_coefficients(grid: &TensorGrid, rng: &mut impl Rng, symmetric: bool) -> Coefficients {
    let d = grid.dims();
    let mut modes = || -> Vec<(f64, f64, f64, f64)> {
        (0..3)
            .map(|_| {
                (
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(0.0..6.0),
                )
            })
            .collect()
    };
    let field = |m: &[(f64, f64, f64, f64)], p: &[f64]| -> f64 {
        let y = if p.len() > 1 { p[1] } else { 0.0 };
        m.iter().map(|(a, kx, ky, ph)| a * (kx * p[0] + ky * y + ph).sin()).sum()
    };
    let a: Vec<Vec<_>> = (0..d).map(|_| (0..d).map(|_| modes()).collect()).collect();
    let b: Vec<_> = (0..d).map(|_| modes()).collect();
    let c = modes();
    Coefficients::from_fields(
        grid,
        |i, j, p| {
            let (i, j) = if symmetric && i > j { (j, i) } else { (i, j) };
            let diag = if i == j { 2.0 } else { 0.0 };
            diag + field(&a[i][j], p)
        },
        |i, p| field(&b[i], p),
        |p| 1.0 + field(&c, p),
    )
    .unwrap()
}
