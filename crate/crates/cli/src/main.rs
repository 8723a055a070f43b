use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use satbeam_cli::commands::{self, CurveRequest, Output};
use satbeam_cli::{CliError, ConfigDoc, Format};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "satbeam",
    version,
    about = "Satellite beamforming solves and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the single instance in [problem].
    Solve(Common),
    /// Run the Monte Carlo sweep in [experiment].
    Sweep(Common),
    /// Sample the AM/AM and AM/PM curves of one amplifier.
    PaCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long, default_value_t = 3.0)]
        r_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha_phi: Option<f64>,
        #[arg(long)]
        beta_phi: Option<f64>,
    },
    /// Report every violation in a config without running anything.
    Validate(Common),
}

fn load(common: &Common, required: bool) -> Result<ConfigDoc, CliError> {
    match &common.config {
        Some(path) => ConfigDoc::load(path),
        None if required => Err(CliError::Usage("--config is required".into())),
        None => Ok(ConfigDoc::default()),
    }
}

fn format(common: &Common, default: Format) -> Format {
    match common.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => default,
    }
}

fn run(cli: &Cli) -> Result<(Output, &Common), CliError> {
    Ok(match &cli.command {
        Command::Solve(c) => (
            commands::solve(&load(c, true)?, c.seed, format(c, Format::Json))?,
            c,
        ),
        Command::Sweep(c) => (
            commands::sweep(&load(c, true)?, c.seed, format(c, Format::Csv), c.verbose)?,
            c,
        ),
        Command::PaCurve {
            common,
            r_min,
            r_max,
            step,
            alpha,
            beta,
            alpha_phi,
            beta_phi,
        } => {
            let req = CurveRequest {
                r_min: *r_min,
                r_max: *r_max,
                step: *step,
                alpha: *alpha,
                beta: *beta,
                alpha_phi: *alpha_phi,
                beta_phi: *beta_phi,
            };
            let doc = load(common, false)?;
            (
                commands::pa_curve(&doc, &req, format(common, Format::Csv))?,
                common,
            )
        }
        Command::Validate(c) => (commands::validate(&load(c, true)?), c),
    })
}

fn emit(out: &Output, path: Option<&PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, &out.body).map_err(|source| CliError::Write {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: "stdout".into(),
                    source,
                })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(out, common)| {
        emit(&out, common.out.as_ref())?;
        Ok(out.exit_code)
    });
    match result {
        Ok(code) => {
            if code == satbeam_cli::EXIT_NOT_CONVERGED {
                eprintln!("error: solver did not converge; best iterate reported");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
