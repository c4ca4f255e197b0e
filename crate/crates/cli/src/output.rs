//! Tabular output. Every row is one (curve, τ) cell; column order is fixed:
//!
//! `label, xi1, xi2, xic, temperature, tau, <metrics...>, [<oracle columns...>], error`
//!
//! Numbers are written with 17 significant digits so that parsing a file
//! reproduces the in-memory values exactly. A failed cell keeps its row with
//! empty metric fields and the error message in the last column.

use serde_json::{json, Map, Value};
use sqbattery::sweep::{Curve, SweepCell, SweepParameter, SweepResult};
use sqbattery::{BatteryParams, MetricsSample};

use crate::CliError;

type Extract = fn(&MetricsSample) -> f64;

#[derive(Clone, Copy)]
pub enum Column {
    Label,
    Param(SweepParameter),
    Tau,
    Metric(&'static str, Extract),
    Error,
}

impl Column {
    pub fn name(&self) -> &'static str {
        match self {
            Column::Label => "label",
            Column::Param(p) => p.name(),
            Column::Tau => "tau",
            Column::Metric(name, _) => name,
            Column::Error => "error",
        }
    }
}

const ERGOTROPY: Column = Column::Metric("ergotropy", MetricsSample::ergotropy);
const POWER: Column = Column::Metric("power", MetricsSample::power);
const CAPACITY: Column = Column::Metric("capacity", MetricsSample::capacity);
const COHERENCE: Column = Column::Metric("coherence", |s| s.coherence_l1);
const ERGOTROPY_NUMERIC: Column = Column::Metric("ergotropy_numeric", |s| s.ergotropy_numeric);
const POWER_FD: Column = Column::Metric("power_fd", |s| s.power_fd);
const CAPACITY_NUMERIC: Column = Column::Metric("capacity_numeric", |s| s.capacity_numeric);
const CAPACITY_DEFINITIONAL: Column =
    Column::Metric("capacity_definitional", |s| s.capacity_definitional);

/// One figure sub-panel and the metric it plots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Panel {
    Ergotropy,
    Power,
    Capacity,
    Coherence,
}

impl Panel {
    pub const ALL: [Panel; 4] = [
        Panel::Ergotropy,
        Panel::Power,
        Panel::Capacity,
        Panel::Coherence,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            Panel::Ergotropy => "a_ergotropy",
            Panel::Power => "b_power",
            Panel::Capacity => "c_capacity",
            Panel::Coherence => "d_coherence",
        }
    }

    fn metric(self) -> Column {
        match self {
            Panel::Ergotropy => ERGOTROPY,
            Panel::Power => POWER,
            Panel::Capacity => CAPACITY,
            Panel::Coherence => COHERENCE,
        }
    }

    fn oracle(self) -> &'static [Column] {
        match self {
            Panel::Ergotropy => &[ERGOTROPY_NUMERIC],
            Panel::Power => &[POWER_FD],
            Panel::Capacity => &[CAPACITY_NUMERIC, CAPACITY_DEFINITIONAL],
            Panel::Coherence => &[],
        }
    }
}

fn leading() -> Vec<Column> {
    vec![
        Column::Label,
        Column::Param(SweepParameter::Xi1),
        Column::Param(SweepParameter::Xi2),
        Column::Param(SweepParameter::Xic),
        Column::Param(SweepParameter::Temperature),
        Column::Tau,
    ]
}

/// Columns of a full record.
pub fn record_columns(oracle: bool) -> Vec<Column> {
    let mut cols = leading();
    cols.extend([ERGOTROPY, POWER, CAPACITY, COHERENCE]);
    if oracle {
        cols.extend([
            ERGOTROPY_NUMERIC,
            POWER_FD,
            CAPACITY_NUMERIC,
            CAPACITY_DEFINITIONAL,
        ]);
    }
    cols.push(Column::Error);
    cols
}

/// Columns of a single-panel record.
pub fn panel_columns(panel: Panel, oracle: bool) -> Vec<Column> {
    let mut cols = leading();
    cols.push(panel.metric());
    if oracle {
        cols.extend_from_slice(panel.oracle());
    }
    cols.push(Column::Error);
    cols
}

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// One output row.
pub struct Row<'a> {
    pub label: &'a str,
    pub params: &'a BatteryParams,
    pub cell: &'a SweepCell,
}

impl Row<'_> {
    fn csv_field(&self, col: &Column) -> String {
        match col {
            Column::Label => self.label.to_string(),
            Column::Param(p) => format_number(p.get(self.params)),
            Column::Tau => format_number(self.cell.tau),
            Column::Metric(_, f) => self
                .cell
                .sample
                .as_ref()
                .map(|s| format_number(f(s)))
                .unwrap_or_default(),
            Column::Error => self.cell.error.clone().unwrap_or_default(),
        }
    }

    fn json_field(&self, col: &Column) -> Value {
        match col {
            Column::Label => json!(self.label),
            Column::Param(p) => json!(p.get(self.params)),
            Column::Tau => json!(self.cell.tau),
            Column::Metric(_, f) => self
                .cell
                .sample
                .as_ref()
                .map_or(Value::Null, |s| json!(f(s))),
            Column::Error => self.cell.error.as_ref().map_or(Value::Null, |e| json!(e)),
        }
    }

    pub fn json_object(&self, cols: &[Column]) -> Value {
        let map: Map<String, Value> = cols
            .iter()
            .filter(|c| !matches!(c, Column::Label | Column::Param(_)))
            .map(|c| (c.name().to_string(), self.json_field(c)))
            .collect();
        Value::Object(map)
    }
}

pub fn rows(curves: &[Curve]) -> impl Iterator<Item = Row<'_>> {
    curves.iter().flat_map(|c| {
        c.cells.iter().map(move |cell| Row {
            label: &c.label,
            params: &c.params,
            cell,
        })
    })
}

pub fn to_csv<'a>(
    rows: impl Iterator<Item = Row<'a>>,
    cols: &[Column],
) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(cols.iter().map(Column::name))
        .map_err(csv_err)?;
    for row in rows {
        w.write_record(cols.iter().map(|c| row.csv_field(c)))
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// `{config, provenance, curves: [{label, params, summary, samples: [...]}]}`.
pub fn to_json(result: &SweepResult, cols: &[Column]) -> Value {
    let curves: Vec<Value> = result
        .curves
        .iter()
        .map(|c| {
            let samples: Vec<Value> = c
                .cells
                .iter()
                .map(|cell| {
                    Row {
                        label: &c.label,
                        params: &c.params,
                        cell,
                    }
                    .json_object(cols)
                })
                .collect();
            json!({
                "label": c.label,
                "params": c.params,
                "summary": c.summary,
                "samples": samples,
            })
        })
        .collect();
    json!({
        "config": result.config,
        "provenance": result.provenance,
        "curves": curves,
    })
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
