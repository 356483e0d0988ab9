use clap::Parser;

fn main() {
    let cli = phasecat_cli::Cli::parse();
    if let Err(e) = phasecat_cli::run(cli) {
        eprintln!("phasecat: {e}");
        std::process::exit(e.exit_code());
    }
}
