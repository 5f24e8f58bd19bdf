use std::process::ExitCode;

fn main() -> ExitCode {
    moi_lab::cli::run(std::env::args_os()).into()
}
