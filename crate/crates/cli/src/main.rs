use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gausshcrb::hcrb::MinimizerConfig;
use gausshcrb::{bounds_report, Model, ModelPoint};
use gausshcrb_cli::error::{CliError, CliResult};
use gausshcrb_cli::scan::{self, Quantity, RRange, ScanSpec};
use gausshcrb_cli::verify::{self, Check, ModelChoice, VerifyOptions};
use gausshcrb_cli::{bounds_table, plot};

#[derive(Parser)]
#[command(name = "gausshcrb", version, about = "Quantum estimation bounds for squeezed displaced Gaussian states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Single,
    Two,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Single => Model::SingleMode,
            ModelArg::Two => Model::TwoMode,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundsFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScanFormat {
    Csv,
    Json,
    Table,
}

#[derive(clap::Args)]
struct MinimizerArgs {
    /// Seed of the restart sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of minimizer restarts.
    #[arg(long, default_value_t = 24)]
    restarts: usize,
    /// Convergence tolerance on the Holevo function value.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl MinimizerArgs {
    fn config(&self) -> CliResult<MinimizerConfig> {
        let cfg = MinimizerConfig { restarts: self.restarts, tol: self.tol, seed: self.seed, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// SLD and Holevo bounds, quantumness and measurement precisions at one point.
    Bounds {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Squeezing r ≥ 0.
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta2: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: BoundsFormat,
        #[command(flatten)]
        minimizer: MinimizerArgs,
    },
    /// Tabulate quantities over a range of squeezing values.
    Scan {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Squeezing grid `min:max:steps`.
        #[arg(long = "r-range", visible_alias = "r", default_value = "0:1.5:7", allow_hyphen_values = true)]
        r_range: RRange,
        /// Comma-separated subset of c_s, c_h, heterodyne, z_opt, f_opt, double_homodyne.
        #[arg(long, value_delimiter = ',')]
        quantities: Vec<Quantity>,
        #[arg(long, value_enum, default_value = "csv")]
        format: ScanFormat,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        minimizer: MinimizerArgs,
    },
    /// Check the closed forms against the truncated Fock-space oracle.
    Verify {
        #[arg(long, value_enum, default_value = "both")]
        model: ModelChoice,
        #[arg(long, value_enum, default_value = "all")]
        check: Check,
        /// Fock levels per mode, overriding every default.
        #[arg(long)]
        trunc: Option<usize>,
        /// Largest squeezing of the verification grid.
        #[arg(long, default_value_t = 1.25)]
        r_max: f64,
        /// Largest weight allowed on the last 10% of Fock levels.
        #[arg(long, default_value_t = gausshcrb::fock::DEFAULT_TAIL_TOL)]
        tail_tol: f64,
    },
    /// Render a scan CSV as an SVG line plot.
    Plot {
        /// Input CSV produced by `scan`.
        #[arg(long)]
        csv: PathBuf,
        /// Output SVG file.
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(bytes).map_err(CliError::from),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bounds { model, r, theta1, theta2, format, minimizer } => {
            let p = ModelPoint::new(model.into(), [theta1, theta2, r])?;
            let rep = bounds_report(&p, &minimizer.config()?)?;
            let text = match format {
                BoundsFormat::Table => bounds_table(&rep),
                BoundsFormat::Json => {
                    serde_json::to_string_pretty(&rep).map_err(|e| CliError::Io(e.to_string()))? + "\n"
                }
            };
            emit(None, text.as_bytes())
        }
        Command::Scan { model, r_range, quantities, format, out, minimizer } => {
            let model: Model = model.into();
            let quantities = if quantities.is_empty() { Quantity::defaults(model) } else { quantities };
            let spec = ScanSpec::new(r_range, model, quantities)?;
            let rows = scan::run_scan(&spec, &minimizer.config()?)?;
            let bytes = match format {
                ScanFormat::Csv => scan::to_csv(&spec, &rows)?,
                ScanFormat::Json => scan::to_json(&spec, &rows)?,
                ScanFormat::Table => scan::to_table(&spec, &rows),
            };
            emit(out.as_ref(), &bytes)
        }
        Command::Verify { model, check, trunc, r_max, tail_tol } => {
            let opts = VerifyOptions { model, check, trunc, r_max, tail_tol };
            let outcomes = verify::run_verify(&opts)?;
            print!("{}", verify::render(&outcomes));
            let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed.join(", ")))
            }
        }
        Command::Plot { csv, out } => {
            let bytes = std::fs::read(&csv).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
            let table = plot::read_table(&bytes)?;
            emit(Some(&out), plot::render_svg(&table).as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
