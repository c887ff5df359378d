use std::process::ExitCode;

use clap::Parser;
use qwalk::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match qwalk::run(&cli) {
        Ok(summary) => {
            if let Command::Fit(_) = cli.command {
                println!("{}", serde_json::to_string_pretty(&summary.results).unwrap_or_default());
            } else {
                for name in &summary.outputs {
                    println!("{}", cli.out.join(name).display());
                }
                eprintln!("{} finished in {:.2} s", summary.command, summary.wall_time_seconds);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
