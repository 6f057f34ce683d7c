use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use histopush_cli::acceptance::run_all_with;
use histopush_cli::commands::{run, Cli, Cmd};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Cmd::Verify = cli.command {
        let exe = match std::env::current_exe() {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        let reports = run_all_with(&exe, |r| println!("{r}"));
        let failed = reports.iter().filter(|r| !r.passed).count();
        println!("{} of {} criteria passed", reports.len() - failed, reports.len());
        return if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) };
    }
    match run(&cli.command) {
        Ok((out, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
