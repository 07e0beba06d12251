//! Uniform and tanh-graded time grids, with their step-size spread.
//!
//! cargo run --example time_grids -- [M]

use kpp_imex::timegrid::TimeGrid;

fn main() -> kpp_imex::Result<()> {
    let m: usize = std::env::args().nth(1).map(|s| s.parse().expect("M")).unwrap_or(10);
    let uniform = TimeGrid::uniform(1.0, m)?;
    println!(
        "{:>8} {:>12} {:>12} {:>10}",
        "grid", "first step", "last step", "max ratio"
    );
    let show = |name: &str, g: &TimeGrid| {
        let h = g.step_sizes();
        println!(
            "{name:>8} {:>12.4e} {:>12.4e} {:>10.4}",
            h[0],
            h[h.len() - 1],
            g.step_ratio()
        );
    };
    show("uniform", &uniform);
    for gamma in [0.5, 0.75, 1.0, 1.5, 3.0] {
        show(&format!("γ={gamma}"), &TimeGrid::graded(1.0, m, gamma)?);
    }
    println!();
    TimeGrid::graded(1.0, m, 0.75)?.write_csv(std::io::stdout().lock())?;
    Ok(())
}
