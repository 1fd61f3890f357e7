use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mprk_cli::experiments::{halving_steps, CONVERGENCE_K, CONVERGENCE_T_END};
use mprk_cli::output::region_csv;
use mprk_cli::{
    run_convergence, run_integration, run_named, write_file, write_files, CliError,
    ExperimentConfig, NamedExperiment, Result,
};
use mprk_core::{critical_time_step, raster_region, SchemeParams, Variant};

/// Positive, conservative MPRK22 integration and stability experiments.
#[derive(Parser, Debug)]
#[command(name = "mprk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the 2x2 test problem from a JSON configuration
    Integrate {
        #[arg(long)]
        config: PathBuf,
        /// Overwrite existing output files
        #[arg(long)]
        overwrite: bool,
    },
    /// Reproduce a named experiment
    Named {
        #[arg(value_enum)]
        experiment: NamedExperiment,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
    /// Rasterize the MPRK22ncs(alpha) stability region over [zmin, 0)^2
    Region {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        zmin: f64,
        #[arg(long)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
    /// Critical MPRK22ncs(alpha) step size for rates a, b
    CriticalDt {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        alpha: f64,
    },
    /// Error and observed order under step halving on the test problem
    Convergence {
        #[arg(long)]
        alpha: f64,
        /// cs or ncs
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = CONVERGENCE_T_END)]
        t_end: f64,
        #[arg(long, default_value_t = *CONVERGENCE_K.start())]
        k_min: u32,
        #[arg(long, default_value_t = *CONVERGENCE_K.end())]
        k_max: u32,
        #[arg(long)]
        overwrite: bool,
    },
}

fn usage(e: mprk_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Integrate { config, overwrite } => {
            let job = ExperimentConfig::from_file(&config)?.validate()?;
            let path = job.output_path();
            let csv = run_integration(&job)?;
            write_file(&path, &csv, overwrite || job.overwrite)?;
            println!("{}", path.display());
        }
        Command::Named {
            experiment,
            out,
            overwrite,
        } => {
            let files = run_named(experiment)?;
            for path in write_files(&out, &files, overwrite)? {
                println!("{}", path.display());
            }
        }
        Command::Region {
            alpha,
            zmin,
            resolution,
            out,
            overwrite,
        } => {
            let raster = raster_region(alpha, zmin, resolution).map_err(usage)?;
            write_file(&out, &region_csv(&raster), overwrite)?;
            println!("{}", out.display());
        }
        Command::CriticalDt { a, b, alpha } => {
            let dt = critical_time_step(a, b, alpha).map_err(usage)?;
            println!("{dt}");
        }
        Command::Convergence {
            alpha,
            variant,
            out,
            t_end,
            k_min,
            k_max,
            overwrite,
        } => {
            if k_min > k_max || k_max > 30 {
                return Err(CliError::Usage(format!(
                    "need k_min <= k_max <= 30, got {k_min}..={k_max}"
                )));
            }
            let params = SchemeParams::new(alpha, variant).map_err(usage)?;
            let table = run_convergence(params, t_end, &halving_steps(t_end, k_min..=k_max))?;
            write_file(&out, &table.to_csv(), overwrite)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
