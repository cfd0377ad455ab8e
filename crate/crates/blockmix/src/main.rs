use std::process::ExitCode;

fn main() -> ExitCode {
    // The default hook has already printed the panic message.
    let code = std::panic::catch_unwind(|| blockmix::cli::main(std::env::args_os())).unwrap_or(blockmix::exit::SOFTWARE);
    ExitCode::from(code)
}
