use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use densel_cli::commands::{self, Example, GenArgs, VerifyArgs};
use densel_cli::CliError;
use densel_core::oracle::DeltaMode;
use densel_core::selectors::Algorithm;

#[derive(Parser)]
#[command(name = "densel", version, about = "Select a density from a finite family by L1 test-function comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Restricted,
}

#[derive(Subcommand)]
enum Command {
    /// Run one selector and print its report as JSON.
    Select {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        empirical: PathBuf,
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check every guarantee on seeded random instances and the fixed constructions.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 6)]
        max_omega: usize,
        #[arg(long, default_value_t = 8)]
        max_family: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "full")]
        delta_mode: Mode,
        /// Where to write the first counterexample on failure.
        #[arg(long, default_value = "counterexample.json")]
        dump: PathBuf,
        #[arg(long, hide = true)]
        fault_draw_removes_first: bool,
    },
    /// Count inner products per selector and family size, as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8, 16])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 6)]
        omega: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an example instance (family.json, empirical.json, truth.json).
    Gen {
        #[arg(long, value_enum)]
        example: Example,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Support size for `random`.
        #[arg(long, default_value_t = 6)]
        omega: usize,
        /// Family size for `random`.
        #[arg(long, default_value_t = 4)]
        family_size: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    let print = |out: &mut io::StdoutLock, s: &str| out.write_all(s.as_bytes()).map_err(|e| CliError::Io(e.to_string()));
    match cli.command {
        Command::Select {
            family,
            empirical,
            algorithm,
            seed,
        } => print(&mut stdout, &commands::select(&family, &empirical, algorithm, seed)?),
        Command::Verify {
            trials,
            max_omega,
            max_family,
            seed,
            delta_mode,
            dump,
            fault_draw_removes_first,
        } => {
            let out = commands::verify(&VerifyArgs {
                trials,
                max_omega,
                max_family,
                seed,
                delta_mode: match delta_mode {
                    Mode::Full => DeltaMode::Full,
                    Mode::Restricted => DeltaMode::Restricted,
                },
                fault_draw_removes_first,
                dump,
            })?;
            print(&mut stdout, &out.json)?;
            if fault_draw_removes_first {
                eprintln!(
                    "fault mode (Draw removes f_i): suite {}",
                    if out.summary.passed() { "still passes" } else { "fails" }
                );
            }
            match out.dump {
                Some(path) => Err(CliError::Verification(format!(
                    "{} failing checks; counterexample written to {}",
                    out.summary.failures(),
                    path.display()
                ))),
                None => Ok(()),
            }
        }
        Command::Bench { sizes, omega, seed, out } => {
            let rows = commands::bench_rows(&sizes, omega, seed)?;
            match out {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    commands::write_bench_csv(&rows, file)
                }
                None => commands::write_bench_csv(&rows, stdout),
            }
        }
        Command::Gen {
            example,
            eps,
            n,
            seed,
            omega,
            family_size,
            noise,
            out,
        } => {
            let written = commands::gen(&GenArgs {
                example,
                eps,
                n,
                seed,
                omega,
                family_size,
                noise,
                out,
            })?;
            for path in written {
                print(&mut stdout, &format!("{}\n", path.display()))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("densel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
