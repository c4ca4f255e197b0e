//! Grid evaluation over `τ` and the physical parameters.
//!
//! A sweep is a base parameter set, a list of varied parameters (their
//! Cartesian product gives the curves, first list varying slowest) and a `τ`
//! grid. Every (curve, `τ`) cell is evaluated independently and in parallel;
//! results are assembled in configuration order, so output is deterministic.
//! A cell that fails (e.g. thermal overflow) is kept in-band with an error
//! message instead of aborting the run.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ChargingTime, ClosedFormMode};
use crate::error::{Error, Result};
use crate::metrics::{MetricsSample, NumericPipeline};
use crate::model::BatteryParams;
use crate::tolerances::Tolerances;

/// Names of the built-in figure presets.
pub const PRESET_NAMES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

/// Values taken by the varied parameter in every figure preset.
pub const PRESET_VALUES: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Xi1,
    Xi2,
    Xic,
    Temperature,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Xi1 => "xi1",
            Self::Xi2 => "xi2",
            Self::Xic => "xic",
            Self::Temperature => "temperature",
        }
    }

    pub fn get(self, p: &BatteryParams) -> f64 {
        match self {
            Self::Xi1 => p.xi1,
            Self::Xi2 => p.xi2,
            Self::Xic => p.xic,
            Self::Temperature => p.temperature,
        }
    }

    pub fn set(self, p: &mut BatteryParams, value: f64) {
        match self {
            Self::Xi1 => p.xi1 = value,
            Self::Xi2 => p.xi2 = value,
            Self::Xic => p.xic = value,
            Self::Temperature => p.temperature = value,
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xi1" => Ok(Self::Xi1),
            "xi2" => Ok(Self::Xi2),
            "xic" => Ok(Self::Xic),
            "temperature" | "temp" | "T" => Ok(Self::Temperature),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep parameter '{other}' (expected xi1, xi2, xic or temperature)"
            ))),
        }
    }
}

/// `count` equally spaced points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for TauGrid {
    /// Two full periods of the ergotropy, `[0, 2π]` with 401 points.
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: TAU,
            count: 401,
        }
    }
}

impl TauGrid {
    /// A one-point grid at `tau`.
    pub fn single(tau: f64) -> Self {
        Self {
            start: tau,
            stop: tau,
            count: 1,
        }
    }

    /// Requires `start ≥ 0`; a multi-point grid needs `stop > start`, a
    /// single-point grid needs `stop == start`.
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tau grid bounds must be finite with start >= 0 (start = {}, stop = {})",
                self.start, self.stop
            )));
        }
        match self.count {
            0 => Err(Error::InvalidParameter(
                "tau grid needs at least one point".into(),
            )),
            1 if self.stop != self.start => Err(Error::InvalidParameter(format!(
                "a single-point tau grid needs stop == start (start = {}, stop = {})",
                self.start, self.stop
            ))),
            1 => Ok(()),
            _ if self.stop <= self.start => Err(Error::InvalidParameter(format!(
                "tau grid needs stop > start (start = {}, stop = {})",
                self.start, self.stop
            ))),
            _ => Ok(()),
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.count <= 1 {
            return self.start;
        }
        if i + 1 == self.count {
            return self.stop;
        }
        self.start + (self.stop - self.start) * (i as f64 / (self.count - 1) as f64)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    pub fn step(&self) -> f64 {
        if self.count <= 1 {
            0.0
        } else {
            (self.stop - self.start) / (self.count - 1) as f64
        }
    }
}

/// Which source feeds the reported metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationMode {
    /// Corrected closed forms, with numeric columns alongside.
    #[default]
    Corrected,
    /// Closed forms as published, with numeric columns alongside.
    Verbatim,
    /// Numeric pipeline only; closed-form columns are absent.
    OracleOnly,
}

impl EvaluationMode {
    pub fn closed_form(self) -> Option<ClosedFormMode> {
        match self {
            Self::Corrected => Some(ClosedFormMode::Corrected),
            Self::Verbatim => Some(ClosedFormMode::Verbatim),
            Self::OracleOnly => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Corrected => "corrected",
            Self::Verbatim => "verbatim",
            Self::OracleOnly => "oracle-only",
        }
    }
}

impl FromStr for EvaluationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "verbatim" => Ok(Self::Verbatim),
            "oracle-only" | "oracle" => Ok(Self::OracleOnly),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode '{other}' (expected corrected, verbatim or oracle-only)"
            ))),
        }
    }
}

/// Metrics to report. Every cell is always evaluated in full; the selection
/// controls which quantities consumers emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSelection {
    pub ergotropy: bool,
    pub power: bool,
    pub capacity: bool,
    pub coherence: bool,
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self {
            ergotropy: true,
            power: true,
            capacity: true,
            coherence: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariedParameter {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Preset name, or a free-form label for custom sweeps.
    pub name: String,
    pub base: BatteryParams,
    pub varied: Vec<VariedParameter>,
    pub tau_grid: TauGrid,
    pub metrics: MetricSelection,
    pub mode: EvaluationMode,
}

impl SweepConfig {
    pub fn new(name: impl Into<String>, base: BatteryParams) -> Self {
        Self {
            name: name.into(),
            base,
            varied: Vec::new(),
            tau_grid: TauGrid::default(),
            metrics: MetricSelection::default(),
            mode: EvaluationMode::default(),
        }
    }

    pub fn vary(mut self, parameter: SweepParameter, values: &[f64]) -> Self {
        self.varied.push(VariedParameter {
            parameter,
            values: values.to_vec(),
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.tau_grid.validate()?;
        for (i, v) in self.varied.iter().enumerate() {
            if v.values.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "no values given for {}",
                    v.parameter
                )));
            }
            if self.varied[..i].iter().any(|w| w.parameter == v.parameter) {
                return Err(Error::InvalidParameter(format!(
                    "{} is varied twice",
                    v.parameter
                )));
            }
        }
        for (_, p) in self.curves() {
            p.validate()?;
        }
        Ok(())
    }

    /// Label and parameters of every curve, in output order.
    pub fn curves(&self) -> Vec<(String, BatteryParams)> {
        let mut out = vec![(String::new(), self.base)];
        for v in &self.varied {
            out = out
                .into_iter()
                .flat_map(|(label, p)| {
                    v.values.iter().map(move |&x| {
                        let mut q = p;
                        v.parameter.set(&mut q, x);
                        let part = format!("{}={x}", v.parameter);
                        let label = if label.is_empty() {
                            part
                        } else {
                            format!("{label};{part}")
                        };
                        (label, q)
                    })
                })
                .collect();
        }
        if self.varied.is_empty() {
            out[0].0 = "base".into();
        }
        out
    }
}

/// Configuration of a figure preset: the published parameter grid with `τ`
/// over `[0, 2π]` at 401 points.
pub fn figure_preset(name: &str) -> Result<SweepConfig> {
    let (base, varied) = match name {
        "fig1" => (
            BatteryParams::degenerate(1.5, 0.0, 0.05, 0.5),
            SweepParameter::Xi2,
        ),
        "fig2" => (
            BatteryParams::degenerate(0.0, 1.5, 0.5, 0.1),
            SweepParameter::Xi1,
        ),
        "fig3" => (
            BatteryParams::degenerate(1.5, 1.5, 0.0, 0.1),
            SweepParameter::Xic,
        ),
        "fig4" => (
            BatteryParams::degenerate(1.5, 0.5, 0.0, 0.1),
            SweepParameter::Xic,
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(SweepConfig::new(name, base).vary(varied, &PRESET_VALUES))
}

/// Parameter sets of every curve of every figure preset.
pub fn preset_parameter_points() -> Vec<BatteryParams> {
    PRESET_NAMES
        .iter()
        .flat_map(|n| figure_preset(n).expect("built-in preset").curves())
        .map(|(_, p)| p)
        .collect()
}

/// One evaluated grid cell: exactly one of `sample` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub tau: f64,
    pub sample: Option<MetricsSample>,
    pub error: Option<String>,
}

/// Per-curve summary statistics over the successfully evaluated cells.
/// Reported values are the closed forms when enabled, numeric otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub max_ergotropy: Option<f64>,
    /// First grid point attaining `max_ergotropy`.
    pub tau_at_max: Option<f64>,
    pub max_power: Option<f64>,
    pub capacity: Option<f64>,
    pub failed_cells: usize,
}

impl CurveSummary {
    pub fn from_cells(cells: &[SweepCell]) -> Self {
        let samples = || cells.iter().filter_map(|c| c.sample.as_ref());
        let mut max_e: Option<(f64, f64)> = None;
        for s in samples() {
            let e = s.ergotropy();
            if max_e.is_none_or(|(m, _)| e > m) {
                max_e = Some((e, s.tau));
            }
        }
        let max_power = samples().map(MetricsSample::power).reduce(f64::max);
        Self {
            max_ergotropy: max_e.map(|(e, _)| e),
            tau_at_max: max_e.map(|(_, t)| t),
            max_power,
            capacity: samples().next().map(MetricsSample::capacity),
            failed_cells: cells.iter().filter(|c| c.sample.is_none()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub params: BatteryParams,
    pub cells: Vec<SweepCell>,
    pub summary: CurveSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub crate_name: String,
    pub version: String,
    pub tolerances: Tolerances,
}

impl Provenance {
    pub fn current() -> Self {
        Self {
            crate_name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            tolerances: *Tolerances::current(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub curves: Vec<Curve>,
    pub provenance: Provenance,
}

/// Evaluates one cell exactly as [`run_sweep`] does.
pub fn evaluate_cell(p: &BatteryParams, tau: f64, mode: EvaluationMode) -> SweepCell {
    let outcome = NumericPipeline::new(p).and_then(|pipe| evaluate_with_pipeline(&pipe, tau, mode));
    into_cell(tau, outcome)
}

fn evaluate_with_pipeline(
    pipe: &NumericPipeline,
    tau: f64,
    mode: EvaluationMode,
) -> Result<MetricsSample> {
    let tau = ChargingTime::new(tau)?;
    MetricsSample::evaluate_with(pipe, tau, mode.closed_form(), Tolerances::current().fd_step)
}

fn into_cell(tau: f64, outcome: Result<MetricsSample>) -> SweepCell {
    match outcome {
        Ok(sample) => SweepCell {
            tau,
            sample: Some(sample),
            error: None,
        },
        Err(e) => SweepCell {
            tau,
            sample: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let curves = cfg.curves();
    let taus = cfg.tau_grid.points();
    // The per-curve setup (Hamiltonian, spectrum, Gibbs state) is a pure
    // function of the parameters, so sharing it keeps every cell identical to
    // an isolated evaluation.
    let pipelines: Vec<Result<NumericPipeline>> = curves
        .par_iter()
        .map(|(_, p)| NumericPipeline::new(p))
        .collect();
    let cells: Vec<SweepCell> = (0..curves.len() * taus.len())
        .into_par_iter()
        .map(|k| {
            let (c, i) = (k / taus.len(), k % taus.len());
            let tau = taus[i];
            let outcome = match &pipelines[c] {
                Ok(pipe) => evaluate_with_pipeline(pipe, tau, cfg.mode),
                Err(e) => Err(e.clone()),
            };
            into_cell(tau, outcome)
        })
        .collect();
    let mut cells = cells.into_iter();
    let curves = curves
        .into_iter()
        .map(|(label, params)| {
            let cells: Vec<SweepCell> = cells.by_ref().take(taus.len()).collect();
            let summary = CurveSummary::from_cells(&cells);
            Curve {
                label,
                params,
                cells,
                summary,
            }
        })
        .collect();
    Ok(SweepResult {
        config: cfg.clone(),
        curves,
        provenance: Provenance::current(),
    })
}
