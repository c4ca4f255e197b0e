//! Merging of command-line flags, the optional JSON config file and preset
//! defaults. Flags override config-file values, which override the preset.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::Value;
use sqbattery::sweep::{EvaluationMode, SweepConfig, SweepParameter, TauGrid};
use sqbattery::BatteryParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by `point`, `sweep` and `figure`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Josephson energy of qubit 1.
    #[arg(long, allow_negative_numbers = true)]
    pub xi1: Option<f64>,
    /// Josephson energy of qubit 2.
    #[arg(long, allow_negative_numbers = true)]
    pub xi2: Option<f64>,
    /// Coupling energy.
    #[arg(long, allow_negative_numbers = true)]
    pub xic: Option<f64>,
    /// Temperature (k_B = 1).
    #[arg(long, allow_negative_numbers = true)]
    pub temp: Option<f64>,
    /// Charging time τ = Ωt (point only).
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau_stop: Option<f64>,
    #[arg(long)]
    pub tau_count: Option<usize>,
    /// Varied parameter, e.g. `xi2=0.1,0.5,1,2`; repeat for a product grid.
    #[arg(long, value_name = "NAME=V1,V2,...")]
    pub vary: Vec<String>,
    /// Add numeric-oracle columns.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (point, sweep) or directory (figure).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat JSON object with any of the flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// corrected | verbatim | oracle-only
    #[arg(long)]
    pub mode: Option<String>,
}

/// Flags after merging with the config file.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub xic: Option<f64>,
    pub temp: Option<f64>,
    pub tau: Option<f64>,
    pub tau_start: Option<f64>,
    pub tau_stop: Option<f64>,
    pub tau_count: Option<usize>,
    pub vary: Vec<(SweepParameter, Vec<f64>)>,
    pub oracle: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub mode: Option<EvaluationMode>,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_config(path)?,
            None => Settings::default(),
        };
        let vary = if args.vary.is_empty() {
            file.vary
        } else {
            args.vary
                .iter()
                .map(|s| parse_vary(s))
                .collect::<Result<_, _>>()?
        };
        Ok(Settings {
            xi1: args.xi1.or(file.xi1),
            xi2: args.xi2.or(file.xi2),
            xic: args.xic.or(file.xic),
            temp: args.temp.or(file.temp),
            tau: args.tau.or(file.tau),
            tau_start: args.tau_start.or(file.tau_start),
            tau_stop: args.tau_stop.or(file.tau_stop),
            tau_count: args.tau_count.or(file.tau_count),
            vary,
            oracle: args.oracle || file.oracle,
            format: args.format.unwrap_or(file.format),
            out: args.out.clone().or(file.out),
            mode: match &args.mode {
                Some(m) => Some(parse_mode(m)?),
                None => file.mode,
            },
        })
    }

    /// Overrides the parameter values, grid and mode of `cfg`.
    pub fn apply_to(&self, cfg: &mut SweepConfig) {
        let b = &mut cfg.base;
        for (slot, v) in [
            (&mut b.xi1, self.xi1),
            (&mut b.xi2, self.xi2),
            (&mut b.xic, self.xic),
            (&mut b.temperature, self.temp),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        let g = &mut cfg.tau_grid;
        g.start = self.tau_start.unwrap_or(g.start);
        g.stop = self.tau_stop.unwrap_or(g.stop);
        g.count = self.tau_count.unwrap_or(g.count);
        if !self.vary.is_empty() {
            cfg.varied = self
                .vary
                .iter()
                .map(|(parameter, values)| sqbattery::sweep::VariedParameter {
                    parameter: *parameter,
                    values: values.clone(),
                })
                .collect();
        }
        if let Some(mode) = self.mode {
            cfg.mode = mode;
        }
    }

    /// Base parameters for `point`/`sweep`: every parameter must come from a
    /// flag, the config file, or (for sweeps) the varied list.
    pub fn base_params(&self) -> Result<BatteryParams, CliError> {
        let pick = |name: &str, param: SweepParameter, v: Option<f64>| {
            v.or_else(|| {
                self.vary
                    .iter()
                    .find(|(p, _)| *p == param)
                    .and_then(|(_, vs)| vs.first().copied())
            })
            .ok_or_else(|| CliError::Usage(format!("missing --{name}")))
        };
        Ok(BatteryParams::degenerate(
            pick("xi1", SweepParameter::Xi1, self.xi1)?,
            pick("xi2", SweepParameter::Xi2, self.xi2)?,
            pick("xic", SweepParameter::Xic, self.xic)?,
            pick("temp", SweepParameter::Temperature, self.temp)?,
        ))
    }

    pub fn tau_grid(&self) -> TauGrid {
        let d = TauGrid::default();
        TauGrid {
            start: self.tau_start.unwrap_or(d.start),
            stop: self.tau_stop.unwrap_or(d.stop),
            count: self.tau_count.unwrap_or(d.count),
        }
    }
}

pub fn parse_mode(s: &str) -> Result<EvaluationMode, CliError> {
    s.parse()
        .map_err(|e: sqbattery::Error| CliError::Usage(e.to_string()))
}

/// `name=v1,v2,...`
pub fn parse_vary(s: &str) -> Result<(SweepParameter, Vec<f64>), CliError> {
    let (name, list) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--vary expects NAME=V1,V2,..., got '{s}'")))?;
    let param: SweepParameter = name
        .trim()
        .parse()
        .map_err(|e: sqbattery::Error| CliError::Usage(e.to_string()))?;
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid number '{v}' in --vary {name}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((param, values))
}

fn read_config(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let map: BTreeMap<String, Value> = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "config {} is not a flat JSON object: {e}",
            path.display()
        ))
    })?;
    let mut s = Settings::default();
    for (key, value) in &map {
        let bad = || CliError::Usage(format!("config key '{key}' has an invalid value {value}"));
        let num = || value.as_f64().ok_or_else(bad);
        match key.replace('_', "-").as_str() {
            "xi1" => s.xi1 = Some(num()?),
            "xi2" => s.xi2 = Some(num()?),
            "xic" => s.xic = Some(num()?),
            "temp" | "temperature" => s.temp = Some(num()?),
            "tau" => s.tau = Some(num()?),
            "tau-start" => s.tau_start = Some(num()?),
            "tau-stop" => s.tau_stop = Some(num()?),
            "tau-count" => s.tau_count = Some(value.as_u64().ok_or_else(bad)? as usize),
            "oracle" => s.oracle = value.as_bool().ok_or_else(bad)?,
            "mode" => s.mode = Some(parse_mode(value.as_str().ok_or_else(bad)?)?),
            "format" => {
                s.format = match value.as_str() {
                    Some("csv") => Format::Csv,
                    Some("json") => Format::Json,
                    _ => return Err(bad()),
                }
            }
            "out" => s.out = Some(PathBuf::from(value.as_str().ok_or_else(bad)?)),
            "vary" => {
                let items: Vec<&str> = match value {
                    Value::String(v) => vec![v.as_str()],
                    Value::Array(vs) => vs
                        .iter()
                        .map(|v| v.as_str().ok_or_else(bad))
                        .collect::<Result<_, _>>()?,
                    _ => return Err(bad()),
                };
                s.vary = items
                    .into_iter()
                    .map(parse_vary)
                    .collect::<Result<_, _>>()?;
            }
            _ => return Err(CliError::Usage(format!("unknown config key '{key}'"))),
        }
    }
    Ok(s)
}
