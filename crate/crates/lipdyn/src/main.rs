use std::io::Write;

use clap::Parser;
use lipdyn::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (report, secs) = run(&cli);
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(report.to_json().as_bytes());
    let _ = out.flush();
    if let Some(e) = &report.error {
        eprintln!("error: {}", e.message);
    }
    eprintln!("wall time: {secs:.3} s");
    std::process::exit(report.status.exit_code());
}
