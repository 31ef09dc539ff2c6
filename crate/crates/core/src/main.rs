use std::process::ExitCode;

fn main() -> ExitCode {
    let code = scenario_testbench::cli::run_with(std::env::args_os(), &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
