//! `sors` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::io::{load_project, write_report, Project, ReportFormat};
use crate::lpexport::export_lp;
use crate::model::{evaluate, Backend, SolveStatus, SolverStats};
use crate::solver::{solve, BackendChoice, SolveError, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sors", version, about = "Requirement selection with economic and social value dependencies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Bnb,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportArg {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a project file and print its warnings.
    Validate { file: PathBuf },
    /// Print the overall influence matrix of one value type.
    Influence {
        file: PathBuf,
        /// Value-type key (1 is economic).
        #[arg(long = "type", default_value_t = 1)]
        type_key: u32,
    },
    /// Find the optimal selection.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Bnb)]
        backend: BackendArg,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        threads: u32,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        node_limit: Option<u64>,
        #[arg(long, value_enum, default_value_t = ReportArg::Json)]
        report: ReportArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the linearized model in CPLEX-LP format.
    ExportLp {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read_project(path: &Path, err: &mut dyn Write) -> Result<Project, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let project = load_project(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    for w in &project.warnings {
        writeln!(err, "warning: {w}")?;
    }
    Ok(project)
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(Failure::from),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { file } => {
            let p = read_project(&file, err)?;
            writeln!(
                out,
                "valid: {} requirements, {} value types, {} warnings",
                p.model.len(),
                p.model.value_types(),
                p.warnings.len()
            )?;
            Ok(EXIT_OK)
        }
        Command::Influence { file, type_key } => {
            let p = read_project(&file, err)?;
            let k = p.type_index(type_key).ok_or_else(|| Failure(format!("unknown value type {type_key}")))?;
            let m = crate::vdg::influence_matrix(&p.model.vdgs()[k]);
            let n = p.model.len();
            let width = (0..n).map(|i| p.id(i).len()).max().unwrap_or(0).max(8);
            let mut text = format!("{:width$}", "");
            for j in 0..n {
                text.push_str(&format!(" {:>width$}", p.id(j)));
            }
            text.push('\n');
            for i in 0..n {
                text.push_str(&format!("{:width$}", p.id(i)));
                for v in m.row(i) {
                    // avoid printing "-0.0000"
                    let v = if *v == 0.0 { 0.0 } else { *v };
                    text.push_str(&format!(" {v:>width$.4}"));
                }
                text.push('\n');
            }
            emit(&text, None, out)?;
            Ok(EXIT_OK)
        }
        Command::ExportLp { file, output } => {
            let p = read_project(&file, err)?;
            let doc = export_lp(&p.model, &p.model.influences());
            emit(&doc.to_string(), output.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Solve { file, backend, threads, time_limit, node_limit, report, output } => {
            let p = read_project(&file, err)?;
            let time_limit = match time_limit {
                Some(s) if !(s.is_finite() && s > 0.0) => {
                    return Err(Failure("--time-limit must be a positive number of seconds".into()))
                }
                Some(s) => Some(Duration::from_secs_f64(s)),
                None => None,
            };
            let cfg = SolverConfig {
                backend: match backend {
                    BackendArg::Bnb => BackendChoice::BranchAndBound,
                    BackendArg::Exhaustive => BackendChoice::Exhaustive,
                },
                node_limit,
                time_limit,
                threads: threads as usize,
            };
            let format = match report {
                ReportArg::Json => ReportFormat::Json,
                ReportArg::Text => ReportFormat::Text,
            };
            let backend_tag = match cfg.backend {
                BackendChoice::BranchAndBound => Backend::BranchAndBound,
                BackendChoice::Exhaustive => Backend::Exhaustive,
            };

            let (solution, code) = match solve(&p.model, &cfg) {
                Ok(s) => (s, EXIT_OK),
                Err(SolveError::Infeasible) => {
                    let zeros = vec![false; p.model.len()];
                    let mut s = evaluate(&p.model, &p.model.influences(), &zeros)?;
                    s.solver_stats = SolverStats {
                        backend: backend_tag,
                        status: SolveStatus::Infeasible,
                        ..SolverStats::evaluation()
                    };
                    writeln!(err, "no feasible selection exists")?;
                    (s, EXIT_INFEASIBLE)
                }
                Err(SolveError::LimitReached { best: Some(s), gap }) => {
                    writeln!(err, "search limit reached; best known solution has gap {gap}")?;
                    (*s, EXIT_LIMIT)
                }
                Err(SolveError::LimitReached { best: None, .. }) => {
                    writeln!(err, "search limit reached before any feasible selection was found")?;
                    return Ok(EXIT_LIMIT);
                }
                Err(e) => return Err(e.into()),
            };
            writeln!(
                err,
                "nodes explored: {}, wall time: {:.3} s",
                solution.solver_stats.nodes_explored,
                solution.solver_stats.wall_time.as_secs_f64()
            )?;
            emit(&write_report(&solution, &p, format), output.as_deref(), out)?;
            Ok(code)
        }
    }
}
