//! Drive a run from key = value text, as the CLI does, and list the files it writes.
//!
//! cargo run --release --example config_run -- [out_dir]

use kpp_imex::cli::{cmd_run, parse_config};

const CONFIG: &str = "
# travelling wave, graded steps
example = wave
beta = 2
gamma = 3/4
M = 40
N = 64
solver = cg
tol = 1e-10
";

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/config_run".into());
    let config = match parse_config(Some(CONFIG), &[("out".into(), out)]) {
        Ok(c) => c,
        Err(errors) => {
            errors.iter().for_each(|e| eprintln!("{e}"));
            std::process::exit(2);
        }
    };
    println!("config hash {}", config.hash());
    match cmd_run(&config) {
        Ok(a) => {
            println!("field  {}\nreport {}", a.field.display(), a.report.display());
            if let Some((linf, l2)) = a.final_errors {
                println!("errors Linf {linf:.3e} L2 {l2:.3e}");
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            std::process::exit(1);
        }
    }
}
