use std::process::ExitCode;

fn main() -> ExitCode {
    symtomo::cli::run(std::env::args_os())
}
