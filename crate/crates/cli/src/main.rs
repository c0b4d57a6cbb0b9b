use std::process::ExitCode;

use clap::Parser;
use xlim_cli::{is_parameter_error, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, inv) = cli.command.split();
    let result = inv.resolve().and_then(|cfg| {
        let report = run(kind, &cfg)?;
        report.write(cfg.out.as_deref(), cfg.format())
    });
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_parameter_error(&e) { 2 } else { 1 })
        }
    }
}
