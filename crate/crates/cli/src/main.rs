// SPDX-License-Identifier: Apache-2.0

use std::io;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use ecoprompt_cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                let rendered = e.render().to_string();
                if !rendered.contains("Usage:") {
                    eprintln!("\n{}", Cli::command().render_usage());
                }
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut out = io::stdout().lock();
    let mut err = io::stderr();
    match ecoprompt_cli::run(cli, &mut out, &mut err) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
