use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mri_cli::commands;
use mri_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mri", version, about = "Minimal rational interpolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "MRI_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build one surrogate and write interpolant.json.
    Build(Common),
    /// Pole and surrogate errors over the sample range, written to sweep.csv.
    Sweep(Common),
    /// Residuals and estimators of an interpolant file over a grid.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Interpolant file; defaults to <out>/interpolant.json.
        #[arg(long)]
        interpolant: Option<PathBuf>,
    },
    /// Residual-driven adaptive sampling.
    Greedy {
        #[command(flatten)]
        common: Common,
        /// Overrides greedy.tol from the config.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Dump the sample nodes of every S in the range.
    Nodes(Common),
}

fn load(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Build(common) => {
            let cfg = load(&common)?;
            let out = commands::cmd_build(&cfg)?;
            print!("{}", commands::build_summary(&out));
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            let (path, out) = commands::cmd_sweep(&cfg)?;
            println!("wrote {} ({} rows)", path.display(), out.rows.len());
            if !out.failed.is_empty() {
                eprintln!("build failed for S = {:?}", out.failed);
            }
        }
        Command::Estimate { common, interpolant } => {
            let cfg = load(&common)?;
            let file = interpolant.unwrap_or_else(|| cfg.output_dir.join("interpolant.json"));
            let (path, out) = commands::cmd_estimate(&cfg, &file)?;
            let worst = out.rows.iter().map(|r| (r.ratio() - 1.0).abs()).filter(|x| x.is_finite()).fold(0.0, f64::max);
            println!(
                "wrote {} ({} rows), calibrated at {} {:+}i, max |calibrated/exact - 1| = {:e}",
                path.display(),
                out.rows.len(),
                out.calibration_point.re,
                out.calibration_point.im,
                worst
            );
        }
        Command::Greedy { common, tol } => {
            let cfg = load(&common)?;
            let tol = tol.unwrap_or(cfg.greedy.tol);
            match commands::cmd_greedy(&cfg, tol) {
                Ok((path, run)) => {
                    println!("wrote {}, converged with S = {}", path.display(), run.interpolant.samples().len());
                }
                Err(CliError::BudgetExhausted) => {
                    println!("wrote {}", cfg.output_dir.join("greedy_history.csv").display());
                    return Err(CliError::BudgetExhausted);
                }
                Err(e) => return Err(e),
            }
        }
        Command::Nodes(common) => {
            let cfg = load(&common)?;
            println!("wrote {}", commands::cmd_nodes(&cfg)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
