use std::f64::consts::PI;

use q2fd::problems::{builtin, resolve, ProblemSpec, BUILTIN_PROBLEMS};
use rand::{Rng, SeedableRng};

/// Right-hand side of the variable-coefficient Dirichlet problem, derived by hand.
fn dirichlet2d_rhs(x: f64, y: f64) -> f64 {
    let (p, px, pxx) = (
        (PI * x).sin() + x.powi(3),
        PI * (PI * x).cos() + 3.0 * x * x,
        -PI * PI * (PI * x).sin() + 6.0 * x,
    );
    let (q, qy, qyy) = (
        (PI * y).sin() + y.powi(3),
        PI * (PI * y).cos() + 3.0 * y * y,
        -PI * PI * (PI * y).sin() + 6.0 * y,
    );
    let r = x.powi(4) + y.powi(3);
    let (sr, cr) = r.sin_cos();

    let u = 0.1 * p * q + cr;
    let ux = 0.1 * px * q - 4.0 * x.powi(3) * sr;
    let uy = 0.1 * p * qy - 3.0 * y * y * sr;
    let uxx = 0.1 * pxx * q - 16.0 * x.powi(6) * cr - 12.0 * x * x * sr;
    let uyy = 0.1 * p * qyy - 9.0 * y.powi(4) * cr - 6.0 * y * sr;
    let uxy = 0.1 * px * qy - 12.0 * x.powi(3) * y * y * cr;

    let a11 = 10.0 + 30.0 * y.powi(5) + x * y.cos() + y;
    let a11_x = y.cos();
    let a12 = 2.0 + 0.5 * p * q + cr;
    let a12_x = 0.5 * px * q - 4.0 * x.powi(3) * sr;
    let a12_y = 0.5 * p * qy - 3.0 * y * y * sr;
    let a22 = 10.0 + x.powi(5);
    let c = 1.0 + x.powi(4) * y.powi(3);

    let div = a11_x * ux + a11 * uxx + a12_x * uy + a12 * uxy + a12_y * ux + a12 * uxy + a22 * uyy;
    -div + c * u
}

#[test]
fn manufactured_rhs_matches_hand_derivation() {
    let f = builtin("dirichlet2d").unwrap().rhs().unwrap();
    let got = f.eval(&[0.5, 1.0]);
    let want = dirichlet2d_rhs(0.5, 1.0);
    assert!((got - want).abs() <= 1e-10 * want.abs(), "{got} vs {want}");

    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..100 {
        let (x, y) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0));
        let (got, want) = (f.eval(&[x, y]), dirichlet2d_rhs(x, y));
        assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()), "({x}, {y}): {got} vs {want}");
    }
}

fn all_exprs(spec: &ProblemSpec) -> Vec<(String, q2fd::problems::Expr)> {
    let mut out = Vec::new();
    for (i, row) in spec.a.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out.push((format!("a{}{}", i + 1, j + 1), e.clone()));
        }
    }
    for (i, e) in spec.b.iter().enumerate() {
        out.push((format!("b{}", i + 1), e.clone()));
    }
    out.push(("c".into(), spec.c.clone()));
    if let Some(u) = &spec.u {
        out.push(("u".into(), u.clone()));
    }
    out
}

#[test]
fn symbolic_derivatives_agree_with_central_differences() {
    const STEP: f64 = 1e-5;
    let mut rng = rand::rngs::StdRng::seed_from_u64(17);
    for name in BUILTIN_PROBLEMS {
        let spec = builtin(name).unwrap();
        for (label, e) in all_exprs(&spec) {
            for var in 0..spec.dims() {
                let d = e.differentiate(var);
                for _ in 0..20 {
                    let p: Vec<f64> = spec.domain.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
                    let (mut plus, mut minus) = (p.clone(), p.clone());
                    plus[var] += STEP;
                    minus[var] -= STEP;
                    let fd = (e.eval(&plus) - e.eval(&minus)) / (2.0 * STEP);
                    let exact = d.eval(&p);
                    assert!(
                        (fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()),
                        "{name} {label} d/d{var} at {p:?}: {exact} vs {fd}"
                    );
                }
            }
        }
    }
}

#[test]
fn convection_field_is_divergence_free() {
    let spec = builtin("convection2d").unwrap();
    let div = q2fd::problems::Expr::add(spec.b[0].differentiate(0), spec.b[1].differentiate(1));
    let mut rng = rand::rngs::StdRng::seed_from_u64(99);
    for _ in 0..1000 {
        let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0)];
        assert!(div.eval(&p).abs() < 1e-12, "div b = {} at {p:?}", div.eval(&p));
    }
}

#[test]
fn problem_text_round_trips() {
    for name in BUILTIN_PROBLEMS {
        let spec = builtin(name).unwrap();
        let again = ProblemSpec::from_text(name, &spec.to_text()).unwrap();
        assert_eq!(again.domain, spec.domain);
        assert_eq!(again.bc, spec.bc);
        for ((_, a), (_, b)) in all_exprs(&spec).iter().zip(all_exprs(&again)) {
            assert_eq!(a.to_string(), b.to_string());
        }
    }
}

#[test]
fn problem_files_load_from_disk() {
    let dir = std::env::temp_dir().join(format!("q2fd-problem-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cubic.txt");
    std::fs::write(&path, "domain=0,1\n# comment\na11=1+x\nu=x^3\n").unwrap();
    let spec = resolve(path.to_str().unwrap()).unwrap();
    assert_eq!(spec.dims(), 1);
    // f = -((1+x) 3x^2)' = -(3x^2 + 6x(1+x))
    let f = spec.rhs().unwrap();
    assert!((f.eval(&[0.5]) + (0.75 + 4.5)).abs() < 1e-14);
    std::fs::remove_dir_all(dir).unwrap();
}
