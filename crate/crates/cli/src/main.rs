use std::process::ExitCode;

use bss_cli::CliError;

fn main() -> ExitCode {
    match bss_cli::run(std::env::args()) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        // clap renders help, version and usage errors itself.
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("bss: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
