use std::process::ExitCode;

use clap::Parser;

use isocalc::cli::{run, Cli};
use isocalc::io::ErrorWire;

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            println!(
                "{}",
                serde_json::to_string(&ErrorWire::new(&e)).expect("error doc serializes")
            );
            ExitCode::from(1)
        }
    }
}
