use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bric::cli_io::{self, exit, presets, CliError};

/// Barrier integral control experiments.
#[derive(Parser)]
#[command(name = "bric", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML config and write CSV, metrics JSON and a log.
    Run {
        /// Preset name or path to a config file.
        scenario: String,
        /// Output directory (overrides BRIC_OUT_DIR and the config).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    ListPresets {
        /// Print each preset as TOML.
        #[arg(long)]
        show: bool,
    },
    /// Check a config file and report every problem found.
    Validate { config: String },
    /// Compare two completed runs (names in the output directory or metrics JSON paths).
    Compare {
        run_a: String,
        run_b: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out_dir } => {
            let loaded = match cli_io::resolve(&scenario) {
                Ok(l) => l,
                Err(e) => return fail(&e),
            };
            for n in &loaded.notes {
                eprintln!("note: {n}");
            }
            let dir = cli_io::output_dir(&loaded.config, out_dir.as_deref());
            match cli_io::run_loaded(&loaded, &dir) {
                Ok((art, done)) => {
                    print!("{}", cli_io::emit::summary_lines(&done.report));
                    println!("wrote {}", art.csv.display());
                    println!("wrote {}", art.metrics.display());
                    println!("wrote {}", art.log.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::ListPresets { show } => {
            for cfg in presets::all() {
                if show {
                    println!("# {}\n{}", cfg.name, cfg.to_toml());
                } else {
                    println!(
                        "{:<18} {}",
                        cfg.name,
                        cfg.description.as_deref().unwrap_or("")
                    );
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match cli_io::resolve(&config) {
            Ok(loaded) => {
                for n in &loaded.notes {
                    println!("note: {n}");
                }
                println!("{}: ok", loaded.config.name);
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Compare {
            run_a,
            run_b,
            out_dir,
        } => {
            let dir = out_dir
                .or_else(|| std::env::var_os(cli_io::OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(cli_io::DEFAULT_OUT_DIR));
            let load = |s: &str| cli_io::load_report(s, &dir);
            match (load(&run_a), load(&run_b)) {
                (Ok(a), Ok(b)) => {
                    print!("{}", cli_io::compare_report(&a, &b));
                    ExitCode::from(exit::SUCCESS as u8)
                }
                (Err(e), _) | (_, Err(e)) => fail(&e),
            }
        }
    }
}
