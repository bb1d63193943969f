use clap::Parser;

use hetrax_cli::commands;
use hetrax_cli::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Workload(args) => commands::cmd_workload(args),
        Command::Optimize(args) => commands::cmd_optimize(args),
        Command::Evaluate(args) => commands::cmd_evaluate(args),
        Command::Baseline(args) => commands::cmd_baseline(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
