use std::io::Write;

use clap::Parser;
use dynpair_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let (out, code) = execute(&cli);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    std::process::exit(code);
}
