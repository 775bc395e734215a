use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    ExitCode::from(blab::cli::main_with(args, &mut std::io::stdout(), &mut std::io::stderr()))
}
