use clap::Parser;

fn main() {
    std::process::exit(sfbm::cli::main_with(sfbm::cli::Cli::parse()));
}
