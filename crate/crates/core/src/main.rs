use clap::Parser;
use eigvar::cli::{execute, Cli, EXIT_ERROR};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the generic error code, not clap's 2
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(execute(cli));
}
