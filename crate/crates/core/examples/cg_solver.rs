//! The implicit step's SPD system `(σI − κL)x = b`: Jacobi CG with smoothed,
//! non-increasing residuals, checked against the dense Cholesky oracle.
//!
//! cargo run --release --example cg_solver -- [N]

use kpp_imex::linsolve::{cg_solve, direct_solve_small, ShiftedOperator};
use kpp_imex::spatial::{Rectangle, SpaceGrid};

fn main() -> kpp_imex::Result<()> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().expect("N")).unwrap_or(32);
    let grid = SpaceGrid::new(Rectangle::square(0.0, std::f64::consts::PI), n, n)?;
    // coefficients of a β = 2, Δt = 1/40 step with D = 1
    let op = ShiftedOperator::new(2.5 * 40.0, 2.0, &grid)?;
    let rhs = grid.sample(|x, y| (3.0 * x).sin() * y.cos() + x * y);
    let x0 = vec![0.0; grid.len()];

    let sol = cg_solve(&op, &rhs, &x0, 1e-12, 1000)?;
    println!(
        "{} unknowns, {} iterations, relative residual {:.2e}",
        grid.len(),
        sol.iterations,
        sol.residual
    );
    let monotone = sol.history.windows(2).all(|w| w[1] <= w[0]);
    println!("residual history non-increasing: {monotone}");
    for (k, r) in sol.history.iter().enumerate().step_by((sol.history.len() / 8).max(1)) {
        println!("  iter {k:>4}  {r:.3e}");
    }
    if grid.len() <= kpp_imex::spatial::DENSE_LIMIT {
        let direct = direct_solve_small(&op, &rhs)?;
        println!("max |cg - cholesky| = {:.2e}", sol.x.max_abs_diff(&direct));
    }
    Ok(())
}
