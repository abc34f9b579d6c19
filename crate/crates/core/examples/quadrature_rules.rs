//! Gauss-Lobatto rules and the degree at which they stop being exact.

use q2fd::quadrature::{gauss_lobatto_rule, legendre_eval, mtype_eval};

fn main() -> q2fd::Result<()> {
    for n in 2..=5 {
        let rule = gauss_lobatto_rule(n)?;
        println!("{n} points, exact to degree {}", rule.exact_degree());
        println!("  nodes   {:?}", rule.nodes());
        println!("  weights {:?}", rule.weights());
    }

    let rule = gauss_lobatto_rule(3)?;
    for p in 0..=5 {
        let computed = rule.integrate(|s| s.powi(p));
        let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
        println!("s^{p}: {computed:.6} vs {exact:.6}");
    }

    // M_3 vanishes at the 3-point nodes.
    for &s in rule.nodes() {
        println!("P_2({s}) = {:.3}, M_3({s}) = {:.1e}", legendre_eval(2, s), mtype_eval(3, s));
    }
    Ok(())
}
