use std::process::ExitCode;

fn main() -> ExitCode {
    prioq::cli::run(std::env::args_os())
}
