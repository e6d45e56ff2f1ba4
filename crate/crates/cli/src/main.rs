use std::io::Write;
use std::process::ExitCode;

use icf_cli::{prepare_output, write_output, RunConfig};

fn main() -> ExitCode {
    let cfg = match RunConfig::from_args(std::env::args()) {
        Ok(c) => c,
        Err(e) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                clap_err.exit();
            }
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = prepare_output(&cfg).and_then(|out| write_output(&cfg, &out));
    match result {
        Ok(Some(table)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(table.as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
