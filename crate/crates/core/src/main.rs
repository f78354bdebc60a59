use std::process::ExitCode;

fn main() -> ExitCode {
    synthpatient::cli::main()
}
