mod args;
mod commands;
mod output;

use clap::Parser;

use args::{Cli, Command, UaAction};
use output::CliError;

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("KQUANT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("KQUANT_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    init_threads()?;
    match &cli.command {
        Command::Quantize(a) => commands::quantize(a),
        Command::Variation(a) => commands::variation(a),
        Command::Ua(ua) => match &ua.action {
            Some(UaAction::Adversarial(a)) => commands::adversarial(a),
            None => commands::ua(&ua.family),
        },
        Command::Covering(a) => commands::covering(a),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kquant: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
