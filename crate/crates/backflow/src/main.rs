use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use backflow::check::run_checks;
use backflow::{run, ExperimentConfig};

#[derive(Parser)]
#[command(name = "backflow", version, about = "Maximal quantum backflow for 1D scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the final kernel matrix (point, eigenfunction, frames).
        #[arg(long)]
        save_kernel: bool,
    },
    /// Run the invariant suite on small grids.
    Check,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            threads,
            out,
            save_kernel,
        } => {
            if let Some(t) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            let out = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
            match run(&cfg, &out, save_kernel) {
                Ok(report) => {
                    for line in &report.lines {
                        println!("{line}");
                    }
                    for f in &report.failures {
                        eprintln!("failed: {f}");
                    }
                    for f in &report.files {
                        println!("wrote {}", f.display());
                    }
                    if report.nan_rows > 0 {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Check => {
            let results = run_checks();
            let mut ok = true;
            for r in &results {
                println!("{} {:<20} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
