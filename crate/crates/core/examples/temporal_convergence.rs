//! Time refinement on the manufactured solution for several β.
//!
//! The spatial error at fixed N does not shrink with Δt, so on coarse N the
//! finest levels overshoot or undershoot second order. Raise N to watch the
//! observed order settle at 2.
//!
//! cargo run --release --example temporal_convergence -- [N] [workers]

use kpp_imex::analysis::{temporal_sweep, SweepSpec};
use kpp_imex::problems::example1;
use kpp_imex::stepper::IntegrateOptions;
use kpp_imex::timegrid::GridKind;

fn main() -> kpp_imex::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("N")).unwrap_or(64);
    let workers: usize = args.next().map(|s| s.parse().expect("workers")).unwrap_or(4);
    for beta in [std::f64::consts::SQRT_2, 2.0, std::f64::consts::PI] {
        let spec = SweepSpec {
            problem: example1(),
            beta,
            grid_kind: GridKind::Uniform,
            options: IntegrateOptions::default(),
            workers,
        };
        let table = temporal_sweep(&spec, &[10, 20, 40, 80], n)?;
        println!("{}", table.describe());
        table.write_csv(std::io::stdout().lock(), "example")?;
        println!();
    }
    Ok(())
}
