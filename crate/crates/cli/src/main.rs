use std::process::ExitCode;

use clap::Parser;

use pwi_cli::app::{run, Cli};
use pwi_cli::commands::Report;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli).and_then(Report::finish);
    match outcome {
        Ok((written, summary)) => {
            for line in summary {
                println!("{line}");
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
