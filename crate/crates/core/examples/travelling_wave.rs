//! Fisher front on [−50, 50]² moving along (1, −1)/√2. Writes the final
//! field and reports the error against the closed-form wave.
//!
//! cargo run --release --example travelling_wave -- [N] [M] [out.csv]

use std::fs::File;
use std::io::BufWriter;

use kpp_imex::analysis::{l2_error, linf_error};
use kpp_imex::problems::example2;
use kpp_imex::spatial::SpaceGrid;
use kpp_imex::stepper::{integrate, IntegrateOptions};
use kpp_imex::timegrid::TimeGrid;

fn main() -> kpp_imex::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("N")).unwrap_or(128);
    let m: usize = args.next().map(|s| s.parse().expect("M")).unwrap_or(40);
    let out = args.next();

    let problem = example2();
    let sgrid = SpaceGrid::new(problem.domain, n, n)?;
    let tgrid = TimeGrid::graded(problem.t_final, m, 0.75)?;
    let run = integrate(&problem, &tgrid, &sgrid, 2.0, &IntegrateOptions::default())?;
    let exact = problem.exact_at(&sgrid, problem.t_final).expect("closed form");
    println!(
        "N={n} M={m}: Linf {:.3e}  L2 {:.3e}  ({} CG iterations, {:.2}s)",
        linf_error(&run.field, &exact)?,
        l2_error(&run.field, &exact, &sgrid)?,
        run.report.total_cg_iters(),
        run.report.wall_seconds
    );
    let (lo, hi) = run
        .field
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!("solution range [{lo:.4}, {hi:.4}]");
    if let Some(path) = out {
        run.field.write_csv(&sgrid, BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
