// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavity_cli::config::Scenario;
use cavity_cli::units::{parse_quantity, Dimension};
use cavity_cli::{execute, execute_sweep, load, load_with, resolve, RunError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cavity", version, about = "Cavity coupled to a broadened spin ensemble: propagators, coefficients, correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write its outputs.
    Run(Common),
    /// Run every point of the scenario's [sweep] section.
    Sweep(Common),
    /// Find localized modes inside spectral holes and print them.
    Modes(Common),
    /// Parse and validate a scenario without solving.
    Check {
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    config: PathBuf,
    /// Output directory (default: [outputs] directory, else <config stem>_out).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Override the time step, e.g. "0.25 ns".
    #[arg(long)]
    dt: Option<String>,
    /// Override the time horizon, e.g. "3 us".
    #[arg(long)]
    horizon: Option<String>,
}

impl Common {
    fn scenario(&self, require_outputs: bool) -> Result<Scenario, RunError> {
        let mut s = load_with(&self.config, require_outputs)?;
        let time = |flag: &str, text: &str| {
            parse_quantity(text, Dimension::Time, None).map_err(|m| RunError::Usage(format!("--{flag}: {m}")))
        };
        if let Some(dt) = &self.dt {
            s.grid.dt = time("dt", dt)?;
        }
        if let Some(h) = &self.horizon {
            s.grid.horizon = time("horizon", h)?;
        }
        Ok(s)
    }

    fn out_dir(&self, s: &Scenario) -> PathBuf {
        if let Some(o) = &self.out {
            return o.clone();
        }
        let base = self.config.parent().unwrap_or(Path::new("."));
        match &s.directory {
            Some(d) => base.join(d),
            None => {
                let stem = self.config.file_stem().map_or("cavity".into(), |s| s.to_string_lossy().into_owned());
                base.join(format!("{stem}_out"))
            }
        }
    }
}

fn configure_threads() -> Result<(), RunError> {
    if let Ok(v) = std::env::var("CAVITY_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| RunError::Usage(format!("CAVITY_THREADS must be a number, got '{v}'")))?;
        // a second initialization only happens in tests; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    configure_threads()?;
    match cli.command {
        Command::Check { config } => {
            let s = load(&config)?;
            let r = resolve(&s)?;
            println!(
                "ok: coupling {:.6} rad/us, {} steps of {} us, {} output(s)",
                r.model.coupling(),
                r.grid.steps,
                r.grid.dt,
                s.outputs.len()
            );
            Ok(())
        }
        Command::Run(c) => {
            let s = c.scenario(true)?;
            let dir = c.out_dir(&s);
            let sum = execute(&s, &dir)?;
            if let Some(g) = sum.regime {
                let label = if g.inconclusive {
                    "inconclusive"
                } else if g.markovian {
                    "markovian"
                } else {
                    "non-Markovian"
                };
                eprintln!("regime: {label} ({} sign changes of gamma)", g.sign_changes);
            }
            eprintln!("wrote {} file(s) to {}", sum.files.len() + 1, dir.display());
            Ok(())
        }
        Command::Sweep(c) => {
            let s = c.scenario(true)?;
            let dir = c.out_dir(&s);
            let outcome = execute_sweep(&s, &dir)?;
            for (i, p) in outcome.points.iter().enumerate() {
                if let Err(e) = p {
                    eprintln!("point {i}: {e}");
                }
            }
            eprintln!("wrote {} point(s) to {}", outcome.points.len(), dir.display());
            match outcome.failures() {
                0 => Ok(()),
                failed => Err(RunError::Sweep { failed, total: outcome.points.len() }),
            }
        }
        Command::Modes(c) => {
            let mut s = c.scenario(false)?;
            s.outputs = [cavity_cli::config::Output::LocalizedModes].into();
            let dir = c.out_dir(&s);
            let sum = execute(&s, &dir)?;
            let r = resolve(&s)?;
            let modes = sum.modes.unwrap_or_default();
            if modes.is_empty() {
                println!("no localized modes");
            } else {
                println!("{:>18} {:>14} {:>10} {:>12}", "frequency", "offset", "residue", "slope");
                for m in &modes {
                    println!("{:>18.6} {:>14.6} {:>10.6} {:>12.6}", m.frequency, m.frequency - r.model.center(), m.residue, m.slope);
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
