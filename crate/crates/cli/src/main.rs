//! `rass`: risk-averse storage scheduling experiments from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rass_core::experiment::data::{errors_csv, prices_csv, write_text};
use rass_core::experiment::{self, emit_report, ExperimentConfig, SweepResult, SyntheticParams};
use rass_core::milp::write_lp;
use rass_core::{assemble_rass, build_scenarios, Error, TimeGrid};

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(
    name = "rass",
    version,
    about = "Risk-averse self-scheduling of energy storage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full-horizon solve of every grid cell.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write each cell's instance as a fixed-format dump and an LP file.
        #[arg(long)]
        export: bool,
    },
    /// Rolling-window simulation of every grid cell.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the grid in the mode named by the config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a synthetic pre-dispatch curve, error pool and realized path.
    Synth {
        #[arg(long = "K")]
        horizon: usize,
        #[arg(long)]
        kappa: u32,
        #[arg(long)]
        obs: usize,
        #[arg(long)]
        sigma0: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn out_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    cli.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn report(result: &SweepResult, dir: &Path) -> Result<(), Error> {
    let files = emit_report(result, dir)?;
    for f in files.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn export_instances(cfg: &ExperimentConfig, dir: &Path) -> Result<(), Error> {
    let inputs = cfg.load_inputs()?;
    let scenarios = build_scenarios(&inputs.predispatch, &inputs.pool, cfg.n_scenarios, cfg.seed)?;
    let sub = dir.join("instances");
    std::fs::create_dir_all(&sub).map_err(|e| Error::Io {
        path: sub.clone(),
        source: e,
    })?;
    for key in cfg.cells() {
        let spec = match key.e_max {
            Some(e) => inputs.storage.with_capacity(e)?,
            None => inputs.storage,
        };
        let model = assemble_rass(&spec, &inputs.grid, &scenarios, &key.risk()?)?;
        let label = key.label();
        let dump = sub.join(format!("{label}.txt"));
        let lp = sub.join(format!("{label}.lp"));
        write_text(&dump, &model.instance.dump())?;
        write_text(&lp, &write_lp(&model.instance))?;
        println!("{}", dump.display());
        println!("{}", lp.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve {
            config,
            out,
            export,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir(out, &cfg);
            report(&experiment::run_static(&cfg)?, &dir)?;
            if export {
                export_instances(&cfg, &dir)?;
            }
        }
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir(out, &cfg);
            report(&experiment::run_rolling(&cfg)?, &dir)?;
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir(out, &cfg);
            report(&experiment::run(&cfg)?, &dir)?;
        }
        Command::Synth {
            horizon,
            kappa,
            obs,
            sigma0,
            gamma,
            seed,
            out,
        } => {
            let grid = TimeGrid::new(kappa, horizon)?;
            let params = SyntheticParams {
                observations: obs,
                sigma0,
                gamma,
                seed,
                noisy_realized: true,
            };
            let data = experiment::synthetic::synthesize(&grid, &params)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            for (name, text) in [
                ("predispatch.csv", prices_csv(&data.predispatch)),
                ("errors.csv", errors_csv(&data.pool)),
                ("realized.csv", prices_csv(&data.realized)),
            ] {
                let path = out.join(name);
                write_text(&path, &text)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rass: {e}");
            if e.is_solver_failure() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
