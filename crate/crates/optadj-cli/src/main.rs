mod cli;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Format};

/// Runs one command line, returning the exit code and the text for stdout
/// and stderr.
fn run<I, S>(argv: I) -> (u8, String, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            return if code == 0 {
                (0, rendered, String::new())
            } else {
                (2, String::new(), rendered)
            };
        }
    };
    match commands::execute(&cli.command) {
        Ok(out) => match cli.format {
            Format::Json => (0, format!("{}\n", out.json), String::new()),
            Format::Text => (0, out.text, String::new()),
        },
        Err(e) => {
            let code = e.exit_code() as u8;
            match cli.format {
                Format::Json => (code, format!("{}\n", e.to_json()), format!("error: {e}\n")),
                Format::Text => (code, String::new(), format!("error: {e}\n")),
            }
        }
    }
}

fn main() -> ExitCode {
    let (code, out, err) = run(std::env::args_os());
    // A closed pipe is not worth reporting.
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    ExitCode::from(code)
}
