use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(betapoly_cli::run(std::env::args_os()))
}
