use clap::Parser;
use std::process::ExitCode;
use viscoshell_cli::commands::{run, Cli};

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
