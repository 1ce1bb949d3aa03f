//! `lpcoresets`: the command-line harness.
//!
//! Exit codes: 0 success, 2 usage error (bad flags, unreadable or malformed
//! inputs), 3 verification failure.

mod opts;
mod run;

use clap::Parser;

fn main() {
    // clap itself exits with code 2 on bad usage.
    let cli = opts::Cli::parse();
    match run::dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
