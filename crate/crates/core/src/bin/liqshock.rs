use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use liqshock::cli_io::{
    self, GridChoice, LeftBcChoice, RunConfig, DEFAULT_CONVERGE_LEVELS, DEFAULT_EXTRAPOLATE_LEVELS,
};
use liqshock::schemes::SchemeKind;
use liqshock::{Error, ErrorKind};

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "liqshock", version, about = "IMEX finite-difference solver for two-regime indifference prices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once and write prices at t=0 and t=T per node.
    Solve(Common),
    /// Convergence table of R0 and R1 at the strike over doubling levels.
    Converge(Common),
    /// Richardson-extrapolated table of R0 at the strike.
    Extrapolate(Common),
    /// Run the audit suite and exit nonzero if any check fails.
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Linear,
    Linearized,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Uniform,
    Tavella,
}

#[derive(Clone, Copy, ValueEnum)]
enum LeftBcArg {
    Dirichlet,
    Natural,
}

#[derive(Args)]
struct Common {
    /// key=value run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    grid: Option<GridArg>,
    /// Tavella-Randall stretch.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of spatial intervals.
    #[arg(long = "I", value_name = "INT")]
    intervals: Option<usize>,
    /// Comma-separated doubling levels, e.g. 30,60,120.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long = "left-bc", value_enum)]
    left_bc: Option<LeftBcArg>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => cli_io::load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Linear => SchemeKind::ImexLinear,
                SchemeArg::Linearized => SchemeKind::ImexLinearized,
            };
        }
        if let Some(g) = self.grid {
            cfg.grid = match g {
                GridArg::Uniform => GridChoice::Uniform,
                GridArg::Tavella => GridChoice::Tavella,
            };
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(n) = self.intervals {
            cfg.intervals = n;
        }
        if let Some(bc) = self.left_bc {
            cfg.left_bc = match bc {
                LeftBcArg::Dirichlet => LeftBcChoice::Dirichlet,
                LeftBcArg::Natural => LeftBcChoice::Natural,
            };
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn levels(&self, default: &[usize]) -> Result<Vec<usize>, Error> {
        match &self.levels {
            Some(text) => cli_io::parse_levels(text),
            None => Ok(default.to_vec()),
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Error> {
    match &cfg.output_path {
        Some(path) => cli_io::write_output(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = args.resolve()?;
            let out = cli_io::cmd_solve(&cfg)?;
            emit(&cfg, &out.table)?;
            if let Some(traj) = &out.trajectory {
                match &cfg.output_path {
                    Some(path) => cli_io::write_output(&cli_io::trajectory_path(path), traj)?,
                    None => eprintln!("trajectory capture needs --out; skipped"),
                }
            }
            if out.diagnostics.restriction_violations > 0 {
                eprintln!(
                    "warning: time-step restriction exceeded in {} steps (max {:.4})",
                    out.diagnostics.restriction_violations, out.diagnostics.max_restriction
                );
            }
            Ok(true)
        }
        Command::Converge(args) => {
            let cfg = args.resolve()?;
            let levels = args.levels(DEFAULT_CONVERGE_LEVELS)?;
            emit(&cfg, &cli_io::cmd_converge(&cfg, &levels)?)?;
            Ok(true)
        }
        Command::Extrapolate(args) => {
            let cfg = args.resolve()?;
            let levels = args.levels(DEFAULT_EXTRAPOLATE_LEVELS)?;
            emit(&cfg, &cli_io::cmd_extrapolate(&cfg, &levels)?)?;
            Ok(true)
        }
        Command::Verify(args) => {
            let cfg = args.resolve()?;
            let report = cli_io::cmd_verify(&cfg)?;
            let passed = report.passed();
            let summary = format!(
                "{report}{}\n",
                if passed { "all checks passed" } else { "verification FAILED" }
            );
            emit(&cfg, &summary)?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation | ErrorKind::Io => EXIT_VALIDATION,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            })
        }
    }
}
