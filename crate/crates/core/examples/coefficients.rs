//! Shifted BDF2 weights: the closed uniform form, a nonuniform triple, and
//! the two independent routes that build it.
//!
//! cargo run --example coefficients -- [beta]

use kpp_imex::coeffs::StepCoefficients;

fn main() -> kpp_imex::Result<()> {
    let beta: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("beta"))
        .unwrap_or(std::f64::consts::SQRT_2);

    let u = StepCoefficients::uniform(beta)?;
    println!("uniform, dt-scaled, beta = {beta}");
    println!("  a = {:?}\n  b = {:?}\n  c = {:?}", u.a, u.b, u.c);

    let (t0, t1, t2) = (0.0, 0.3, 1.0);
    let v = StepCoefficients::nonuniform(t0, t1, t2, beta)?;
    let l = StepCoefficients::lagrange(t0, t1, t2, beta)?;
    println!("nodes ({t0}, {t1}, {t2}), collocation at t = {:.6}", v.t_eval);
    println!("  vandermonde a = {:?}", v.a);
    println!("  lagrange    a = {:?}", l.a);
    println!(
        "  largest relative route difference {:.2e}",
        v.max_relative_difference(&l)
    );
    let worst = v
        .consistency_residuals(t0, t1, t2)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    println!("  largest consistency residual {worst:.2e}");

    // nearly coincident nodes are rejected rather than returning garbage
    match StepCoefficients::nonuniform(0.0, 1e-12, 1.0, beta) {
        Ok(_) => println!("degenerate triple accepted"),
        Err(e) => println!("degenerate triple rejected: {e}"),
    }
    Ok(())
}
