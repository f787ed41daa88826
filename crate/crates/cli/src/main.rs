use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmps_cli::table::format_float;
use qmps_cli::{compare_files, run, validate, Result, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "qmps",
    version,
    about = "Variational time evolution of circuit iMPS states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config or manifest file.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's `output`, then $QMPS_OUTPUT_DIR, then `.`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two trajectory tables and write a per-step report.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config without running it and print the resolved form.
    Validate { config: PathBuf },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let summary = run(&config, out.as_deref())?;
            println!("table: {}", summary.table_path.display());
            println!("manifest: {}", summary.manifest_path.display());
            println!("total shots: {}", summary.total_shots);
            for (k, v) in &summary.results {
                println!("{k}: {}", format_float(*v));
            }
        }
        Command::Compare { a, b, out } => {
            let report = compare_files(&a, &b, &out)?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            println!("report: {}", out.display());
        }
        Command::Validate { config } => {
            let resolved = validate(&config)?;
            println!(
                "{} is valid ({} run(s))",
                config.display(),
                resolved.seeds().len()
            );
            let dir = qmps_cli::output_dir(None, &resolved);
            println!(
                "output directory: {} (override with --out or {OUTPUT_DIR_ENV})",
                dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
