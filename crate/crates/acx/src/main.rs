use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(acx::cli::run() as u8)
}
