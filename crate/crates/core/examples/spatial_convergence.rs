//! Space refinement at a fine time step, uniform against graded in time.
//!
//! cargo run --release --example spatial_convergence -- [M]

use kpp_imex::analysis::{spatial_sweep, SweepSpec};
use kpp_imex::problems::example1;
use kpp_imex::stepper::IntegrateOptions;
use kpp_imex::timegrid::GridKind;

fn main() -> kpp_imex::Result<()> {
    let m: usize = std::env::args().nth(1).map(|s| s.parse().expect("M")).unwrap_or(2000);
    for grid_kind in [GridKind::Uniform, GridKind::Graded { gamma: 0.75 }] {
        let spec = SweepSpec {
            problem: example1(),
            beta: std::f64::consts::SQRT_2,
            grid_kind,
            options: IntegrateOptions::default(),
            workers: 4,
        };
        let table = spatial_sweep(&spec, &[8, 16, 32, 64], m)?;
        println!("{}", table.describe());
        for r in &table.rows {
            let o = r.order_inf.map(|v| format!("{v:.3}")).unwrap_or_default();
            println!("  N={:>3}  Linf {:.4e}  order {o}", r.param, r.linf);
        }
    }
    Ok(())
}
