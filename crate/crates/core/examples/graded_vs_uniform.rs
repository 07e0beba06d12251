//! Final-time error of uniform and graded grids at the same step count, with
//! the CG cost of each run.
//!
//! cargo run --release --example graded_vs_uniform -- [N] [M]

use kpp_imex::analysis::linf_error;
use kpp_imex::problems::example1;
use kpp_imex::spatial::SpaceGrid;
use kpp_imex::stepper::{integrate, IntegrateOptions};
use kpp_imex::timegrid::GridKind;

fn main() -> kpp_imex::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("N")).unwrap_or(64);
    let m: usize = args.next().map(|s| s.parse().expect("M")).unwrap_or(40);
    let problem = example1();
    let sgrid = SpaceGrid::new(problem.domain, n, n)?;
    let exact = problem.exact_at(&sgrid, problem.t_final).expect("manufactured");
    let kinds = [
        GridKind::Uniform,
        GridKind::Graded { gamma: 0.75 },
        GridKind::Graded { gamma: 1.0 },
        GridKind::Graded { gamma: 1.5 },
    ];
    println!("{:>20} {:>8} {:>12} {:>9}", "grid", "beta", "Linf", "CG iters");
    for beta in [std::f64::consts::SQRT_2, 2.0] {
        for kind in kinds {
            let tgrid = kind.build(problem.t_final, m)?;
            let run = integrate(&problem, &tgrid, &sgrid, beta, &IntegrateOptions::default())?;
            println!(
                "{:>20} {beta:>8.4} {:>12.4e} {:>9}",
                kind.label(),
                linf_error(&run.field, &exact)?,
                run.report.total_cg_iters()
            );
        }
    }
    Ok(())
}
