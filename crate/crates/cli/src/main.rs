use std::process::ExitCode;

use clap::Parser;

use critnls_cli::app::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("critnls: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("critnls: {e}");
            ExitCode::from(1)
        }
    }
}
