use std::io;
use std::process::ExitCode;

use clap::Parser;

use shardsec::{run, Cli, Io};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return ExitCode::from(code as u8);
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut io = Io { stdout: &mut stdout.lock(), stderr: &mut stderr.lock() };
    match run(&cli, &mut io) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let _ = writeln!(io.stderr, "error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
