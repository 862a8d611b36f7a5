use clap::Parser;

fn main() {
    let args = ris_energy::cli::Args::parse();
    std::process::exit(ris_energy::cli::main_with(args));
}
