//! Problem definitions for `-∇·(a∇u) + b·∇u + c u = f`.

mod expr;
mod parser;

use std::fmt;
use std::path::Path;

pub use expr::{Expr, Func, VAR_NAMES};
pub use parser::parse;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    /// `(lo, hi)` per axis; its length is the dimension.
    pub domain: Vec<(f64, f64)>,
    /// `a[i][j]`, a `d × d` array.
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Expr>,
    pub c: Expr,
    pub u: Option<Expr>,
    pub f: Option<Expr>,
    pub bc: BoundaryCondition,
}

fn p(s: &str) -> Expr {
    parse(s).expect("built-in formula parses")
}

pub const BUILTIN_PROBLEMS: [&str; 6] = [
    "dirichlet2d",
    "neumann2d",
    "convection2d",
    "laplace3d",
    "quadratic1d",
    "bilinear2d",
];

const SMOOTH_U: &str = "0.1*(sin(pi*x)+x^3)*(sin(pi*y)+y^3)+cos(x^4+y^3)";
const A12: &str = "2+0.5*(sin(pi*x)+x^3)*(sin(pi*y)+y^3)+cos(x^4+y^3)";

/// A built-in problem by name.
pub fn builtin(name: &str) -> Result<ProblemSpec> {
    let zero = || Expr::num(0.0);
    let laplace = |d: usize| -> Vec<Vec<Expr>> {
        (0..d)
            .map(|i| (0..d).map(|j| Expr::num(if i == j { 1.0 } else { 0.0 })).collect())
            .collect()
    };
    let spec = match name {
        "dirichlet2d" | "neumann2d" => ProblemSpec {
            name: name.to_string(),
            domain: vec![(0.0, 1.0), (0.0, 2.0)],
            a: vec![
                vec![p("10+30*y^5+x*cos(y)+y"), p(A12)],
                vec![p(A12), p("10+x^5")],
            ],
            b: vec![zero(), zero()],
            c: p("1+x^4*y^3"),
            u: Some(p(SMOOTH_U)),
            f: None,
            bc: if name == "dirichlet2d" {
                BoundaryCondition::Dirichlet
            } else {
                BoundaryCondition::Neumann
            },
        },
        "convection2d" => {
            let psi = p("x*exp(x^2+y)");
            ProblemSpec {
                name: name.to_string(),
                domain: vec![(0.0, 1.0), (0.0, 2.0)],
                a: vec![
                    vec![p("100+30*y^5+x*cos(y)+y"), p(A12)],
                    vec![p(A12), p("100+x^5")],
                ],
                b: vec![psi.differentiate(1), Expr::neg(psi.differentiate(0))],
                c: p("1+x^4*y^3"),
                u: Some(p(SMOOTH_U)),
                f: None,
                bc: BoundaryCondition::Dirichlet,
            }
        }
        "laplace3d" => ProblemSpec {
            name: name.to_string(),
            domain: vec![(0.0, 1.0); 3],
            a: laplace(3),
            b: vec![zero(), zero(), zero()],
            c: zero(),
            u: Some(p(
                "sin(pi*x)*sin(2*pi*y)*sin(3*pi*z)+(x-x^3)*(y^2-y^4)*(z-z^2)",
            )),
            f: None,
            bc: BoundaryCondition::Dirichlet,
        },
        "quadratic1d" => ProblemSpec {
            name: name.to_string(),
            domain: vec![(0.0, 1.0)],
            a: laplace(1),
            b: vec![zero()],
            c: zero(),
            u: Some(p("x*(1-x)")),
            f: None,
            bc: BoundaryCondition::Dirichlet,
        },
        "bilinear2d" => ProblemSpec {
            name: name.to_string(),
            domain: vec![(0.0, 1.0), (0.0, 1.0)],
            a: laplace(2),
            b: vec![zero(), zero()],
            c: zero(),
            u: Some(p("x*y")),
            f: None,
            bc: BoundaryCondition::Dirichlet,
        },
        _ => {
            return Err(Error::UnknownProblem {
                name: name.to_string(),
                available: BUILTIN_PROBLEMS.to_vec(),
            })
        }
    };
    Ok(spec)
}

/// A built-in name, or else a path to a problem file.
pub fn resolve(name_or_path: &str) -> Result<ProblemSpec> {
    if BUILTIN_PROBLEMS.contains(&name_or_path) {
        return builtin(name_or_path);
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        return ProblemSpec::load(path);
    }
    Err(Error::UnknownProblem {
        name: name_or_path.to_string(),
        available: BUILTIN_PROBLEMS.to_vec(),
    })
}

impl ProblemSpec {
    pub fn dims(&self) -> usize {
        self.domain.len()
    }

    /// Checks shapes, `a_ij = a_ji` at sample points, and that `u` or `f` is given.
    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        if !(1..=3).contains(&d) {
            return Err(Error::invalid(format!("domain must have 1 to 3 axes, got {d}")));
        }
        if let Some(&(lo, hi)) = self.domain.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::invalid(format!("empty domain interval [{lo}, {hi}]")));
        }
        if self.a.len() != d || self.a.iter().any(|r| r.len() != d) || self.b.len() != d {
            return Err(Error::invalid("coefficient arrays do not match the dimension"));
        }
        if self.u.is_none() && self.f.is_none() {
            return Err(Error::invalid("a problem needs an exact solution u or a right-hand side f"));
        }
        for var in d..3 {
            let mut all = vec![&self.c];
            all.extend(self.a.iter().flatten());
            all.extend(&self.b);
            all.extend(self.u.iter());
            all.extend(self.f.iter());
            if all.iter().any(|e| e.depends_on(var)) {
                return Err(Error::invalid(format!(
                    "`{}` is not a coordinate of a {d}D problem",
                    VAR_NAMES[var]
                )));
            }
        }
        for point in self.probe_points() {
            for i in 0..d {
                for j in i + 1..d {
                    let (aij, aji) = (self.a[i][j].eval(&point), self.a[j][i].eval(&point));
                    if (aij - aji).abs() > 1e-12 * aij.abs().max(aji.abs()).max(1.0) {
                        return Err(Error::invalid(format!(
                            "a{}{} and a{}{} differ at {point:?}",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn probe_points(&self) -> Vec<Vec<f64>> {
        let fractions = [0.0, 0.137, 0.5, 0.861, 1.0];
        let d = self.dims();
        let total = fractions.len().pow(d as u32);
        (0..total)
            .map(|mut k| {
                self.domain
                    .iter()
                    .map(|&(lo, hi)| {
                        let t = fractions[k % fractions.len()];
                        k /= fractions.len();
                        lo + t * (hi - lo)
                    })
                    .collect()
            })
            .collect()
    }

    /// True for `a = I`, `b = 0`, `c = 0`.
    pub fn is_laplacian(&self) -> bool {
        let d = self.dims();
        (0..d).all(|i| {
            (0..d).all(|j| self.a[i][j] == Expr::num(if i == j { 1.0 } else { 0.0 }))
        }) && self.b.iter().all(|e| *e == Expr::num(0.0))
            && self.c == Expr::num(0.0)
    }

    /// `(a∇u)_k` for every axis `k`.
    pub fn flux(&self) -> Result<Vec<Expr>> {
        let u = self
            .u
            .as_ref()
            .ok_or_else(|| Error::invalid("the flux needs an exact solution u"))?;
        let d = self.dims();
        let grad: Vec<Expr> = (0..d).map(|j| u.differentiate(j)).collect();
        Ok((0..d)
            .map(|k| {
                (0..d).fold(Expr::num(0.0), |acc, j| {
                    Expr::add(acc, Expr::mul(self.a[k][j].clone(), grad[j].clone()))
                })
            })
            .collect())
    }

    /// The given `f`, or else the one manufactured from `u`.
    pub fn rhs(&self) -> Result<Expr> {
        match &self.f {
            Some(f) => Ok(f.clone()),
            None => manufacture_rhs(self),
        }
    }

    /// Parses the `key=expression` file format.
    pub fn from_text(name: &str, text: &str) -> Result<ProblemSpec> {
        let mut domain = None;
        let mut entries: Vec<(String, Expr)> = Vec::new();
        let mut bc = BoundaryCondition::Dirichlet;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "line {}: expected key=value, got `{line}`",
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "domain" => {
                    let nums: Vec<f64> = value
                        .split(',')
                        .map(|t| {
                            t.trim().parse::<f64>().map_err(|_| {
                                Error::invalid(format!("line {}: bad domain bound `{t}`", lineno + 1))
                            })
                        })
                        .collect::<Result<_>>()?;
                    if nums.is_empty() || nums.len() % 2 != 0 || nums.len() > 6 {
                        return Err(Error::invalid(format!(
                            "line {}: domain needs lo,hi pairs for 1 to 3 axes",
                            lineno + 1
                        )));
                    }
                    domain = Some(nums.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>());
                }
                "bc" => {
                    bc = match value {
                        "dirichlet" => BoundaryCondition::Dirichlet,
                        "neumann" => BoundaryCondition::Neumann,
                        other => {
                            return Err(Error::invalid(format!(
                                "line {}: unknown boundary condition `{other}`",
                                lineno + 1
                            )))
                        }
                    }
                }
                _ => entries.push((key.to_string(), parse(value)?)),
            }
        }
        let domain = domain.ok_or_else(|| Error::invalid("problem file has no `domain=` line"))?;
        let d = domain.len();
        let mut spec = ProblemSpec {
            name: name.to_string(),
            domain,
            a: (0..d)
                .map(|i| (0..d).map(|j| Expr::num(if i == j { 1.0 } else { 0.0 })).collect())
                .collect(),
            b: vec![Expr::num(0.0); d],
            c: Expr::num(0.0),
            u: None,
            f: None,
            bc,
        };
        for (key, e) in entries {
            let digits: Vec<usize> = key
                .chars()
                .skip(1)
                .map(|c| c.to_digit(10).map_or(usize::MAX, |v| v as usize))
                .collect();
            let in_range = |k: usize| (1..=d).contains(&k);
            match (key.chars().next(), digits.as_slice()) {
                (Some('a'), [i, j]) if in_range(*i) && in_range(*j) => spec.a[i - 1][j - 1] = e,
                (Some('b'), [i]) if in_range(*i) => spec.b[i - 1] = e,
                _ if key == "c" => spec.c = e,
                _ if key == "u" => spec.u = Some(e),
                _ if key == "f" => spec.f = Some(e),
                _ => return Err(Error::invalid(format!("unknown key `{key}` for a {d}D problem"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<ProblemSpec> {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map_or_else(|| "problem".to_string(), |s| s.to_string_lossy().into_owned());
        ProblemSpec::from_text(&name, &text)
    }

    /// Renders the spec in the file format read by [`ProblemSpec::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let bounds: Vec<String> = self
            .domain
            .iter()
            .flat_map(|(lo, hi)| [lo.to_string(), hi.to_string()])
            .collect();
        out.push_str(&format!("domain={}\nbc={}\n", bounds.join(","), self.bc));
        for (i, row) in self.a.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out.push_str(&format!("a{}{}={e}\n", i + 1, j + 1));
            }
        }
        for (i, e) in self.b.iter().enumerate() {
            out.push_str(&format!("b{}={e}\n", i + 1));
        }
        out.push_str(&format!("c={}\n", self.c));
        if let Some(u) = &self.u {
            out.push_str(&format!("u={u}\n"));
        }
        if let Some(f) = &self.f {
            out.push_str(&format!("f={f}\n"));
        }
        out
    }
}

/// `f = -Σ_i ∂_i(Σ_j a_ij ∂_j u) + Σ_i b_i ∂_i u + c u`, symbolically.
pub fn manufacture_rhs(spec: &ProblemSpec) -> Result<Expr> {
    let u = spec
        .u
        .as_ref()
        .ok_or_else(|| Error::invalid("cannot manufacture f without an exact solution u"))?;
    let d = spec.dims();
    let flux = spec.flux()?;
    let mut f = Expr::num(0.0);
    for (i, q) in flux.iter().enumerate() {
        f = Expr::sub(f, q.differentiate(i));
    }
    for i in 0..d {
        f = Expr::add(f, Expr::mul(spec.b[i].clone(), u.differentiate(i)));
    }
    Ok(Expr::add(f, Expr::mul(spec.c.clone(), u.clone())))
}
