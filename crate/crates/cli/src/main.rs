use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use logvoa::cli::{run, OutputFormat, RunConfig};

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(out) => {
            if cfg.global.out.is_none() {
                let body = match cfg.global.format {
                    OutputFormat::Json => &out.json,
                    OutputFormat::Text => &out.text,
                };
                let _ = std::io::stdout().write_all(body.as_bytes());
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {:#}", anyhow::Error::new(e));
            ExitCode::from(2)
        }
    }
}
