use clap::Parser;

fn main() {
    let cli = borel_flow_cli::Cli::parse();
    if let Err(e) = borel_flow_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
