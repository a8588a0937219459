use std::path::PathBuf;
use std::process::ExitCode;

use bridgewave::runner::{preset, run, Mode, RunConfig, RunError, PRESETS};
use clap::{Args, Parser, Subcommand};
use log::error;

/// Solve, prove and check localized traveling waves of the 2D suspension
/// bridge equation.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Newton solve on the Galerkin truncation.
    Solve(Common),
    /// Solve (or load) and run the computer-assisted proof.
    Prove(Common),
    /// Natural continuation in c.
    Continue(Common),
    /// Continuation with truncated power-series nonlinearities.
    Parity(Common),
    /// Re-verify the radii polynomial of a stored certificate.
    CheckCert {
        certificate: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print a preset as TOML.
    Preset { name: String },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped configuration name.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn load(common: &Common, mode: Mode) -> Result<RunConfig, RunError> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.clone(), source })?;
            let mut value: toml::Table = text.parse().map_err(|e: toml::de::Error| RunError::Parse(e.to_string()))?;
            value.entry("mode").or_insert_with(|| mode.name().into());
            RunConfig::from_toml(&value.to_string())?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) if mode == Mode::CheckCert => RunConfig::new(mode, 1.0, [1.0, 1.0], Default::default()),
        (None, None) => return Err(RunError::Missing("every verb except check-cert", "--config or --preset")),
    };
    cfg.mode = mode;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (mode, common, cert) = match cli.verb {
        Verb::Solve(c) => (Mode::Solve, c, None),
        Verb::Prove(c) => (Mode::Prove, c, None),
        Verb::Continue(c) => (Mode::Continue, c, None),
        Verb::Parity(c) => (Mode::Parity, c, None),
        Verb::CheckCert { certificate, common } => (Mode::CheckCert, common, Some(certificate)),
        Verb::Preset { name } => {
            return match preset(&name) {
                Ok(c) => {
                    print!("{}", c.to_toml());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    error!("{e}");
                    eprintln!("presets: {}", PRESETS.join(", "));
                    ExitCode::from(2)
                }
            };
        }
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error!("cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = load(&common, mode).and_then(|mut cfg| {
        if cert.is_some() {
            cfg.certificate = cert;
        }
        run(&cfg, &common.out_dir)
    });
    match result {
        Ok(outcome) => {
            println!("{:?}: artifacts in {}", outcome.status, outcome.dir.display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
