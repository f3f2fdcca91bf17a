use std::process::ExitCode;

fn main() -> ExitCode {
    plateloc_cli::app::run(std::env::args_os())
}
