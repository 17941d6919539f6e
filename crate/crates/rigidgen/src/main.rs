use std::process::ExitCode;

fn main() -> ExitCode {
    rigidgen::cli::run()
}
