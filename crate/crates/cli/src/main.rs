use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sqdb_cli::model::InvolutionChoice;
use sqdb_cli::{
    cmd_classical, cmd_epr, cmd_specialize, cmd_sqdb, cmd_stationary, cmd_tc_check, cmd_zero_epr_rep, CliError,
    Report,
};

/// Detailed balance, entropy production and representation analysis for
/// finite-dimensional Lindblad generators.
#[derive(Parser)]
#[command(name = "sqdb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Model file (JSON); for `classical`, a square array of rates.
    path: PathBuf,
    /// Overrides `options.tol` from the model file.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InvolutionChoice::Declared)]
    involution: InvolutionChoice,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary state of the generator.
    Stationary(Common),
    /// Entropy production rate at the stationary state.
    Epr(Common),
    /// Standard quantum detailed balance verdict and certificate.
    Sqdb(Common),
    /// Special (and, if possible, special TC) representation.
    Specialize(Common),
    /// Zero-EPR special representation for the declared pairing.
    ZeroEprRep(Common),
    /// Thermodynamic consistency of the declared pairing.
    TcCheck(Common),
    /// Classical chain: stationary law, EPR and detailed balance.
    Classical(Common),
}

type Handler = fn(&str, Option<f64>, InvolutionChoice) -> Result<Report, CliError>;

fn run(cli: Cli) -> Result<(Report, Option<PathBuf>), CliError> {
    let (f, args): (Handler, Common) = match cli.command {
        Command::Stationary(a) => (cmd_stationary, a),
        Command::Epr(a) => (cmd_epr, a),
        Command::Sqdb(a) => (cmd_sqdb, a),
        Command::Specialize(a) => (cmd_specialize, a),
        Command::ZeroEprRep(a) => (cmd_zero_epr_rep, a),
        Command::TcCheck(a) => (cmd_tc_check, a),
        Command::Classical(a) => (|t, tol, _| cmd_classical(t, tol), a),
    };
    let text = std::fs::read_to_string(&args.path)?;
    Ok((f(&text, args.tol, args.involution)?, args.out))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((report, out)) => {
            let json = report.to_json();
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, json) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{json}");
            }
            eprintln!("{}", report.summary());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
