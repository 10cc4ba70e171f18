use std::process::ExitCode;

use carleman_cli::{parse_args, run, ArgsOutcome, EXIT_OK, EXIT_USAGE};

fn main() -> ExitCode {
    let code = match parse_args(std::env::args_os()) {
        Ok(config) => run(&config),
        Err(ArgsOutcome::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(ArgsOutcome::Usage(msg)) => {
            eprintln!("{msg}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code as u8)
}
