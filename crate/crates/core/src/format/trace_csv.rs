//! Columnar CSV for evaluation data: `# key: value` metadata lines, a
//! header row, one row per sample. Empty cells are absent values; numbers
//! use the shortest representation that reads back to the same `f64`.

use std::io::Write;
use std::path::Path;

use super::{read_text, FormatError};
use crate::engine::trace::TRACE_COLUMNS;
use crate::engine::{Column, EvaluationData, TraceHeader};
use crate::eval::CriterionEvaluation;

/// Columns a trace must carry to be evaluated.
pub const REQUIRED_COLUMNS: [&str; 8] = TRACE_COLUMNS;

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(data: &EvaluationData, mut w: W) -> std::io::Result<()> {
    let h = &data.header;
    writeln!(w, "# scenario_id: {}", h.scenario_id)?;
    writeln!(w, "# case_id: {}", h.case_id)?;
    writeln!(w, "# config_id: {}", h.config_id)?;
    writeln!(w, "# time_step: {}", h.time_step)?;
    writeln!(w, "# valid: {}", h.valid)?;
    if let Some(f) = &h.fault {
        writeln!(w, "# fault: {f}")?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(data.columns.iter().map(|c| c.name.as_str()))?;
    for i in 0..data.len() {
        out.write_record(data.columns.iter().map(|c| cell(c.values[i])))?;
    }
    out.flush()
}

pub fn parse_trace_csv(text: &str, path: &Path) -> Result<EvaluationData, FormatError> {
    let mut header = TraceHeader {
        scenario_id: String::new(),
        case_id: String::new(),
        config_id: String::new(),
        time_step: f64::NAN,
        valid: true,
        fault: None,
    };
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(meta) = line.strip_prefix('#') else { break };
        body_start += line.len();
        let Some((key, value)) = meta.split_once(':') else {
            return Err(FormatError::parse(path, format!("malformed metadata line `{}`", line.trim_end())));
        };
        let value = value.trim();
        match key.trim() {
            "scenario_id" => header.scenario_id = value.to_owned(),
            "case_id" => header.case_id = value.to_owned(),
            "config_id" => header.config_id = value.to_owned(),
            "time_step" => {
                header.time_step = value
                    .parse()
                    .map_err(|_| FormatError::parse(path, format!("invalid time_step `{value}`")))?
            }
            "valid" => {
                header.valid = value
                    .parse()
                    .map_err(|_| FormatError::parse(path, format!("invalid valid flag `{value}`")))?
            }
            "fault" => header.fault = Some(value.to_owned()),
            _ => {}
        }
    }
    if header.scenario_id.is_empty() {
        return Err(FormatError::parse(path, "trace metadata lacks scenario_id"));
    }
    if !(header.time_step.is_finite() && header.time_step > 0.0) {
        return Err(FormatError::parse(path, "trace metadata lacks a positive time_step"));
    }

    let mut reader = csv::ReaderBuilder::new().from_reader(&text.as_bytes()[body_start..]);
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| FormatError::parse(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    for required in REQUIRED_COLUMNS {
        if !names.iter().any(|n| n == required) {
            return Err(FormatError::MissingColumn {
                path: path.to_owned(),
                column: required.to_owned(),
            });
        }
    }
    let mut columns: Vec<Column> = names
        .into_iter()
        .map(|name| Column { name, values: Vec::new() })
        .collect();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FormatError::parse(path, e))?;
        if record.len() != columns.len() {
            return Err(FormatError::parse(path, format!("row {row} has {} cells", record.len())));
        }
        for (c, raw) in columns.iter_mut().zip(record.iter()) {
            let v = if raw.is_empty() {
                None
            } else {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| FormatError::parse(path, format!("row {row}, column `{}`: `{raw}`", c.name)))?;
                Some(v)
            };
            c.values.push(v);
        }
    }
    Ok(EvaluationData { header, columns })
}

pub fn read_trace_csv(path: &Path) -> Result<EvaluationData, FormatError> {
    parse_trace_csv(&read_text(path)?, path)
}

/// Judged metric results, one row per result.
pub fn write_metric_results_csv<W: Write>(criteria: &[CriterionEvaluation], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["criterion", "metric", "time", "value", "unit", "fulfillment"])?;
    for c in criteria {
        for r in &c.results {
            out.write_record([
                c.criterion.clone(),
                r.result.metric.to_string(),
                r.result.time.to_string(),
                r.result.value.to_string(),
                r.result.unit.tag().to_owned(),
                r.fulfillment.to_string(),
            ])?;
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_test_case, AccController, AccParams};
    use crate::speedcontrol;

    #[test]
    fn engine_trace_round_trips_exactly() {
        let tc = speedcontrol::test_case();
        let trace = run_test_case(&speedcontrol::hil_configuration(), &tc, &mut AccController::new(AccParams::default()))
            .unwrap();
        let mut bytes = Vec::new();
        write_trace_csv(&trace.data, &mut bytes).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let back = parse_trace_csv(&text, Path::new("t.csv")).unwrap();
        assert_eq!(back, trace.data);
        let mut again = Vec::new();
        write_trace_csv(&back, &mut again).unwrap();
        assert_eq!(again, bytes);
    }

    #[test]
    fn missing_column_is_named() {
        let text = "# scenario_id: s\n# time_step: 0.1\ntime,v_ego\n0,1\n";
        match parse_trace_csv(text, Path::new("t.csv")) {
            Err(FormatError::MissingColumn { column, .. }) => assert_eq!(column, "a_ego"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_cell() {
        let mut text = String::from("# scenario_id: s\n# time_step: 0.1\n");
        text.push_str(&TRACE_COLUMNS.join(","));
        text.push_str("\n0,x,0,0,0,0,,\n");
        assert!(parse_trace_csv(&text, Path::new("t.csv")).is_err());
    }
}
