//! `teleswitch`: emits the data behind each analysis as CSV or JSON and runs the self-checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical failure.

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use teleswitch::verify::{run_all, VerifyConfig, VerifyReport};

use crate::config::{Format, Params, RunConfig};
use crate::output::{Cell, Table};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<teleswitch::Error> for CliError {
    fn from(e: teleswitch::Error) -> Self {
        use teleswitch::Error as E;
        match e {
            E::EigenNoConvergence(_) | E::QuadratureNoConvergence(_) | E::DegenerateOutcome(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("I/O: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "teleswitch", version, about = "Teleportation through a quantum switch: figure data and self-checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
    /// TOML file with defaults for any of the flags (keys spelled like the flags).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Single, sequential and switched fidelities against p.
    FidelityCurves,
    /// Advantage region boundaries against mu (--table surface for F over (p, q)).
    RegionMap,
    /// Figure of merit over the outcome family (--paths 2 or 3).
    FomScan,
    /// Figure of merit against the pre-measurement joint fidelity, per outcome.
    Tradeoff,
    /// Optimal figure of merit against control coherence.
    CoherenceScan,
    /// Three-path fidelity curves per alpha tuple (--table phase for K against phi).
    ThreePath,
    /// Run the self-check suite and print a pass/fail report.
    Verify,
}

fn write_output(cfg: &RunConfig, write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_table(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let format = cfg.format.unwrap_or(Format::Csv);
    write_output(cfg, |w| match format {
        Format::Csv => table.write_csv(w).map_err(|e| CliError::Usage(format!("CSV: {e}"))),
        Format::Json => Ok(writeln!(w, "{}", serde_json::to_string_pretty(&table.to_json()).expect("valid JSON"))?),
    })?;
    // CSV carries no descriptions, so put the column schema next to the file
    if let (Format::Csv, Some(path)) = (format, &cfg.out) {
        let mut schema_path = path.clone().into_os_string();
        schema_path.push(".schema.json");
        let text = serde_json::to_string_pretty(&table.schema()).expect("valid JSON");
        std::fs::write(schema_path, text + "\n")?;
    }
    Ok(())
}

fn emit_report(cfg: &RunConfig, report: &VerifyReport) -> Result<(), CliError> {
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => write_output(cfg, |w| {
            Ok(writeln!(w, "{}", serde_json::to_string_pretty(report).expect("valid JSON"))?)
        }),
        Format::Csv => {
            let mut t = Table::new("verify", "checks", &[("name", ""), ("passed", ""), ("detail", "")]);
            for c in &report.checks {
                t.push(vec![Cell::Text(c.name.clone()), Cell::Bool(c.passed), Cell::Text(c.detail.clone())]);
            }
            emit_table(cfg, &t)
        }
    }
}

fn run(command: Command, cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let table = match command {
        Command::FidelityCurves => commands::fidelity_curves(cfg)?,
        Command::RegionMap => commands::region_map(cfg)?,
        Command::FomScan => commands::fom_scan(cfg)?,
        Command::Tradeoff => commands::tradeoff(cfg)?,
        Command::CoherenceScan => commands::coherence_scan(cfg)?,
        Command::ThreePath => commands::three_path(cfg)?,
        Command::Verify => {
            let report = run_all(&VerifyConfig { seed: cfg.seed });
            emit_report(cfg, &report)?;
            let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
            eprintln!(
                "{} of {} checks passed{}",
                report.checks.len() - failed.len(),
                report.checks.len(),
                if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
            );
            return Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
    };
    emit_table(cfg, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = RunConfig::resolve(cli.params, cli.config.as_deref()).and_then(|cfg| run(cli.command, &cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("teleswitch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
