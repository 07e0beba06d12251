use clap::Parser;

fn main() {
    let cli = kpp_imex::cli::Cli::parse();
    std::process::exit(kpp_imex::cli::run(cli));
}
