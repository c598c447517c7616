use std::process::ExitCode;

use clap::Parser;
use hwga::cli::{parse_config, run_experiment, Args};

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let spec = match parse_config(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("hwga: {e}");
            return ExitCode::from(1);
        }
    };
    match run_experiment(&spec) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hwga: {e}");
            ExitCode::from(2)
        }
    }
}
