use clap::Parser;
use covertsim::{run, Cli, WORKERS_ENV};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli.command, std::env::var(WORKERS_ENV).ok()) {
        eprintln!("covertsim: {e}");
        std::process::exit(e.exit_code());
    }
}
