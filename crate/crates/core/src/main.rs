use std::io::{self, BufReader, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use outlier_order::cli::{execute, Cli};

fn main() -> ExitCode {
    // clap prints help/version itself and exits 2 on argument errors
    let cli = Cli::parse();
    let mut stdin = BufReader::new(io::stdin());
    let mut stdout = BufWriter::new(io::stdout());
    match execute(cli, &mut stdin, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
