use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use apfcbf::harness::{self, exit, RunConfig, Suite};

#[derive(Parser)]
#[command(
    name = "apfcbf",
    version,
    about = "Potential-field and barrier-filter navigation runs and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every controller in the config and write CSV, metrics and report files.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in numerical verification suites.
    Verify {
        config: PathBuf,
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the report to `<dir>/verify_report.txt`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<RunConfig, i32> {
    RunConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            output_dir,
            seed,
        } => match load(&config) {
            Err(code) => code,
            Ok(mut cfg) => {
                if let Some(dir) = output_dir {
                    cfg.output_dir = dir;
                }
                if let Some(seed) = seed {
                    cfg.seed = seed;
                }
                match harness::run(&cfg) {
                    Ok(outcome) => {
                        for r in &outcome.runs {
                            println!(
                                "{}: {:?} after {} samples",
                                r.name,
                                r.trajectory.terminal,
                                r.trajectory.samples.len()
                            );
                            if let Some(err) = &r.trajectory.error {
                                eprintln!("{}: {err}", r.name);
                            }
                        }
                        println!("wrote {}", outcome.output_dir.display());
                        outcome.exit_code()
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        e.exit_code()
                    }
                }
            }
        },
        Command::Verify {
            config,
            suite,
            seed,
            output_dir,
        } => match load(&config) {
            Err(code) => code,
            Ok(cfg) => {
                let report = harness::verify(&cfg, suite, seed.unwrap_or(cfg.seed));
                let text = report.to_string();
                print!("{text}");
                if let Some(dir) = output_dir {
                    if let Err(e) =
                        std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(dir.join("verify_report.txt"), &text))
                    {
                        eprintln!("error: cannot write report: {e}");
                        return ExitCode::from(exit::CONFIG as u8);
                    }
                }
                if report.passed() {
                    exit::OK
                } else {
                    exit::FAILURE
                }
            }
        },
    };
    ExitCode::from(code as u8)
}
