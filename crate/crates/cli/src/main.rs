//! `sqb`: single points, sweeps, figure data and verification for the
//! two-qubit superconducting quantum battery.
//!
//! Exit codes: 0 success, 1 verification failure (or internal numerical
//! failure), 2 invalid arguments, 3 thermal overflow, 4 I/O failure.

mod output;
mod settings;

use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sqbattery::sweep::{
    figure_preset, run_sweep, EvaluationMode, SweepCell, SweepConfig, SweepResult,
};
use sqbattery::verify::{run_verification, Fault, VerifyLevel, VerifyOptions};
use sqbattery::{ChargingTime, ClosedFormMode, MetricsSample};

use output::{panel_columns, record_columns, Panel, Row};
use settings::{parse_mode, CommonArgs, Format, Settings};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Overflow(String),
    Io(String),
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Overflow(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Overflow(m) | CliError::Io(m) | CliError::Failed(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<sqbattery::Error> for CliError {
    fn from(e: sqbattery::Error) -> Self {
        use sqbattery::Error as E;
        match e {
            E::Overflow { .. } => CliError::Overflow(e.to_string()),
            E::InvalidParameter(_)
            | E::UnknownPreset(_)
            | E::NotDegeneracyPoint { .. }
            | E::InvalidState(_) => CliError::Usage(e.to_string()),
            E::Linalg(_) | E::NotUnitary { .. } => CliError::Failed(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sqb",
    version,
    about = "Two-qubit superconducting quantum battery simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all metrics at one (parameters, τ) point.
    Point(CommonArgs),
    /// Evaluate a τ grid for one or more parameter sets.
    Sweep(CommonArgs),
    /// Regenerate the data of a figure preset (fig1..fig4).
    Figure {
        name: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the closed-form vs numeric equivalence suites.
    Verify {
        #[arg(value_enum, default_value = "quick")]
        level: LevelArg,
        /// corrected | verbatim
        #[arg(long, default_value = "corrected")]
        mode: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipErgotropySign,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Point(args) => cmd_point(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Figure { name, common } => cmd_figure(&name, &common),
        Command::Verify {
            level,
            mode,
            format,
            inject_fault,
        } => cmd_verify(level, &mode, format, inject_fault),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqb: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            }
            std::fs::write(path, text).map_err(|e| io_error(path, e))
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn render(result: &SweepResult, s: &Settings) -> Result<String, CliError> {
    let cols = record_columns(s.oracle);
    match s.format {
        Format::Csv => output::to_csv(output::rows(&result.curves), &cols),
        Format::Json => Ok(output::json_text(&output::to_json(result, &cols))),
    }
}

fn cmd_point(args: &CommonArgs) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    if !s.vary.is_empty() {
        return Err(CliError::Usage(
            "point does not accept --vary; use sweep".into(),
        ));
    }
    let p = s.base_params()?;
    let tau = s
        .tau
        .ok_or_else(|| CliError::Usage("missing --tau".into()))?;
    let mode = s.mode.unwrap_or_default();
    let sample = MetricsSample::evaluate(&p, ChargingTime::new(tau)?, mode.closed_form())?;
    let cell = SweepCell {
        tau,
        sample: Some(sample),
        error: None,
    };
    let row = Row {
        label: "point",
        params: &p,
        cell: &cell,
    };
    let cols = record_columns(s.oracle);
    let text = match s.format {
        Format::Csv => output::to_csv(std::iter::once(row), &cols)?,
        Format::Json => {
            let mut v = row_json(&row, &cols);
            v["mode"] = json!(mode.name());
            output::json_text(&v)
        }
    };
    emit(&text, s.out.as_deref())
}

fn row_json(row: &Row, cols: &[output::Column]) -> serde_json::Value {
    json!({ "label": row.label, "params": row.params, "sample": row.json_object(cols) })
}

fn cmd_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let s = Settings::resolve(args)?;
    if s.tau.is_some() {
        return Err(CliError::Usage(
            "sweep takes --tau-start/--tau-stop/--tau-count, not --tau".into(),
        ));
    }
    let mut cfg = SweepConfig::new("sweep", s.base_params()?);
    cfg.tau_grid = s.tau_grid();
    s.apply_to(&mut cfg);
    let result = run_sweep(&cfg)?;
    emit(&render(&result, &s)?, s.out.as_deref())
}

fn cmd_figure(name: &str, args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg = figure_preset(name)?;
    let s = Settings::resolve(args)?;
    if s.tau.is_some() {
        return Err(CliError::Usage(
            "figure takes --tau-start/--tau-stop/--tau-count, not --tau".into(),
        ));
    }
    s.apply_to(&mut cfg);
    let result = run_sweep(&cfg)?;
    let Some(dir) = s.out.as_deref() else {
        return emit(&render(&result, &s)?, None);
    };
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let ext = match s.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut files = Vec::new();
    for panel in Panel::ALL {
        let cols = panel_columns(panel, s.oracle);
        let text = match s.format {
            Format::Csv => output::to_csv(output::rows(&result.curves), &cols)?,
            Format::Json => {
                let mut v = output::to_json(&result, &cols);
                v["panel"] = json!(panel.file_stem());
                output::json_text(&v)
            }
        };
        let file = format!("{name}_{}.{ext}", panel.file_stem());
        emit(&text, Some(&dir.join(&file)))?;
        files.push(file);
    }
    let curves: Vec<_> = result
        .curves
        .iter()
        .map(|c| json!({ "label": c.label, "params": c.params, "summary": c.summary }))
        .collect();
    let manifest = json!({
        "preset": name,
        "mode": cfg.mode.name(),
        "format": ext,
        "oracle_columns": s.oracle,
        "files": files,
        "config": result.config,
        "provenance": result.provenance,
        "curves": curves,
    });
    emit(
        &output::json_text(&manifest),
        Some(&dir.join("manifest.json")),
    )
}

fn cmd_verify(
    level: LevelArg,
    mode: &str,
    format: Option<Format>,
    fault: Option<FaultArg>,
) -> Result<(), CliError> {
    let level = match level {
        LevelArg::Quick => VerifyLevel::Quick,
        LevelArg::Full => VerifyLevel::Full,
    };
    let mut opts = VerifyOptions::new(level);
    opts.mode = match parse_mode(mode)? {
        EvaluationMode::Corrected => ClosedFormMode::Corrected,
        EvaluationMode::Verbatim => ClosedFormMode::Verbatim,
        EvaluationMode::OracleOnly => {
            return Err(CliError::Usage(
                "verify compares closed forms; oracle-only is not a valid mode here".into(),
            ))
        }
    };
    opts.fault = fault.map(|FaultArg::FlipErgotropySign| Fault::FlipErgotropySign);
    let report = run_verification(&opts)?;
    let text = match format.unwrap_or(Format::Csv) {
        Format::Json => {
            output::json_text(&serde_json::to_value(&report).expect("report serializes"))
        }
        Format::Csv => {
            let mut lines = vec![format!(
                "verify level={} mode={}",
                match level {
                    VerifyLevel::Quick => "quick",
                    VerifyLevel::Full => "full",
                },
                mode
            )];
            lines.extend(report.suites.iter().map(|s| s.to_string()));
            lines.extend(report.decisions.iter().map(|d| format!("decision: {d}")));
            lines.push(format!(
                "overall: {}",
                if report.passed() { "PASS" } else { "FAIL" }
            ));
            lines.join("\n") + "\n"
        }
    };
    emit(&text, None)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<_> = report
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name.as_str())
            .collect();
        Err(CliError::Failed(format!(
            "verification failed: {}",
            failed.join(", ")
        )))
    }
}
