use std::process::ExitCode;

fn main() -> ExitCode {
    germext::cli::main_entry()
}
