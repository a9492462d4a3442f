use cavity_ramsey::cli::{self, Cli};
use clap::Parser;
use std::io::Write;

fn main() {
    let cli = Cli::parse();
    match cli::execute(cli) {
        Ok(output) => {
            // stdout may be a closed pipe (e.g. `| head`); that is not an error.
            let _ = std::io::stdout().write_all(output.as_bytes());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(cli::exit_code(&e));
        }
    }
}
