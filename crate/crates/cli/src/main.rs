mod args;
mod commands;
mod format;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<()> {
    let (text, out) = match &cli.command {
        Command::SingleUse(a) => (commands::single_use(a)?, &a.output),
        Command::Probs(a) => (commands::probs(a)?, &a.output),
        Command::Discriminate(a) => (commands::discriminate(a)?, &a.output),
        Command::Fig1(a) => (commands::fig1(a)?, &a.output),
        Command::Fig2(a) => (commands::fig2(a)?, &a.output),
    };
    match &out.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catcoh: error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
