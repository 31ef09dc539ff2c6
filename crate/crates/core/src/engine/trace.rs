use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::Scene;

/// Fixed evaluation-data columns, in export order.
pub const TRACE_COLUMNS: [&str; 8] = [
    "time",
    "v_ego",
    "a_ego",
    "acc_active",
    "v_set",
    "a_target",
    "gap",
    "v_lead",
];

/// Per-event flag columns are named `event.<event id>` and are 1 only at the
/// sample where the event fires.
pub const EVENT_COLUMN_PREFIX: &str = "event.";

/// Columns holding 0/1 flags rather than physical values.
pub fn is_flag_column(name: &str) -> bool {
    name == "acc_active" || name.starts_with(EVENT_COLUMN_PREFIX)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub scenario_id: String,
    pub case_id: String,
    pub config_id: String,
    pub time_step: f64,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// `None` where the signal had no value (e.g. no lead vehicle).
    pub values: Vec<Option<f64>>,
}

/// Test case evaluation data: the column-oriented view evaluators work on.
/// Columns are SI, `a_ego` is positive while decelerating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationData {
    pub header: TraceHeader,
    pub columns: Vec<Column>,
}

impl EvaluationData {
    pub fn new(header: TraceHeader, event_ids: &[String]) -> Self {
        let columns = TRACE_COLUMNS
            .iter()
            .map(|c| c.to_string())
            .chain(event_ids.iter().map(|e| format!("{EVENT_COLUMN_PREFIX}{e}")))
            .map(|name| Column {
                name,
                values: Vec::new(),
            })
            .collect();
        EvaluationData { header, columns }
    }

    /// Data with times `i·dt` and the given columns, for synthetic traces.
    /// Columns without a value at some sample use `None`.
    pub fn from_columns(time_step: f64, columns: Vec<(String, Vec<Option<f64>>)>) -> Self {
        let n = columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut all = vec![Column {
            name: "time".into(),
            values: (0..n).map(|i| Some(i as f64 * time_step)).collect(),
        }];
        for (name, mut values) in columns {
            values.resize(n, None);
            all.push(Column { name, values });
        }
        EvaluationData {
            header: TraceHeader {
                scenario_id: "synthetic".into(),
                case_id: "synthetic".into(),
                config_id: "synthetic".into(),
                time_step,
                valid: true,
                fault: None,
            },
            columns: all,
        }
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name == name)
    }

    pub fn time(&self, index: usize) -> f64 {
        self.column("time").and_then(|c| c[index]).unwrap_or(f64::NAN)
    }

    pub fn times(&self) -> Vec<f64> {
        self.column("time")
            .map(|c| c.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .unwrap_or_default()
    }

    /// Exclusive end of the covered span: last sample time plus one step.
    pub fn end_time(&self) -> f64 {
        match self.len() {
            0 => 0.0,
            n => self.time(n - 1) + self.header.time_step,
        }
    }

    pub fn event_ids(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter_map(|c| c.name.strip_prefix(EVENT_COLUMN_PREFIX))
            .collect()
    }

    /// Appends one row; `row` maps column names to values, missing names
    /// become empty cells.
    pub fn push_row(&mut self, row: &BTreeMap<&str, f64>) {
        for c in &mut self.columns {
            c.values.push(row.get(c.name.as_str()).copied());
        }
    }
}

/// One simulated step: the scene at `time` and what went in and out of the
/// test object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub index: usize,
    pub time: f64,
    pub scene: Scene,
    /// Stimuli derived from this scene.
    pub inputs: BTreeMap<String, f64>,
    /// Outputs available at this time (computed at the previous step).
    pub outputs: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub samples: Vec<Sample>,
    pub data: EvaluationData,
}

impl ExecutionTrace {
    pub fn header(&self) -> &TraceHeader {
        &self.data.header
    }

    pub fn scenario_id(&self) -> &str {
        &self.data.header.scenario_id
    }

    pub fn is_valid(&self) -> bool {
        self.data.header.valid
    }
}
