use clap::Parser;

fn main() {
    let cli = oext::cli::Cli::parse();
    std::process::exit(oext::cli::main_with(cli));
}
