//! Parsing, printing and differentiating coefficient formulas, and loading a
//! problem from its text form.

use q2fd::problems::{parse, ProblemSpec};

const PROBLEM: &str = "\
domain = 0,1,0,1
bc = dirichlet
a11 = 1 + x^2
a22 = 1 + x^2
c = 1
u = sin(pi*x)*exp(y)
";

fn main() -> q2fd::Result<()> {
    let e = parse("x^3*sin(pi*y) - exp(-x*y)/2")?;
    println!("e      = {e}");
    println!("de/dx  = {}", e.differentiate(0));
    println!("de/dy  = {}", e.differentiate(1));
    println!("e(0.5, 0.25) = {:.6}", e.eval(&[0.5, 0.25]));

    for bad in ["x*(1+y", "x^2.5", "tan(x)"] {
        println!("{bad:<8} -> {}", parse(bad).unwrap_err());
    }

    let spec = ProblemSpec::from_text("custom", PROBLEM)?;
    println!("f = {}", spec.rhs()?);
    print!("{}", spec.to_text());
    Ok(())
}
