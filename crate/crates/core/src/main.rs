use std::process::ExitCode;

fn main() -> ExitCode {
    qdkt::cli::main()
}
