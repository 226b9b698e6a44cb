use std::process::ExitCode;

fn main() -> ExitCode {
    nbody_loops::cli::main()
}
