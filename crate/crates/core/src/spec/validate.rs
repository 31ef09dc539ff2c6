use std::collections::BTreeSet;

use super::{
    validate_plan, CompareOp, ConditionExpr, EvaluationCriterion, EvaluationMetric, Judgement,
    MetricFormula, PeriodEnd, TestSpecification, BUILTIN_FORMAT,
};
use crate::engine::trace::{EVENT_COLUMN_PREFIX, TRACE_COLUMNS};
use crate::scenario::validate_concrete;
use crate::validation::ValidationReport;

/// Signals the execution engine records and conditions may refer to.
/// Event columns (`event.<id>`) are added per scenario.
pub fn signal_catalog() -> BTreeSet<&'static str> {
    TRACE_COLUMNS.iter().copied().collect()
}

fn is_known_signal(name: &str, events: Option<&BTreeSet<&str>>) -> bool {
    if signal_catalog().contains(name) {
        return true;
    }
    match (name.strip_prefix(EVENT_COLUMN_PREFIX), events) {
        (Some(id), Some(events)) => events.contains(id),
        (Some(_), None) => true,
        (None, _) => false,
    }
}

/// Checks one criterion against a metric catalog. `events`, when known, are
/// the event ids of the scenario the criterion is applied to.
pub fn validate_criterion(
    c: &EvaluationCriterion,
    metrics: &[EvaluationMetric],
    events: Option<&BTreeSet<&str>>,
) -> ValidationReport {
    let mut r = ValidationReport::new();
    r.check(!c.id.trim().is_empty(), "id", "criterion id must be non-empty");
    let metric = metrics.iter().find(|m| m.name == c.metric);
    if metric.is_none() {
        r.push("metric", format!("unknown metric `{}`", c.metric));
    }
    let expected_dim = metric.map(|m| m.formula.output_dimension());

    match &c.judgement {
        Judgement::Threshold { value, .. } => {
            if let Some(dim) = expected_dim {
                r.check(
                    value.dimension() == dim,
                    "judgement.value",
                    format!("threshold must be a {dim} value, found {value}"),
                );
            }
        }
        Judgement::Scale(scale) => {
            r.check(!scale.breakpoints.is_empty(), "judgement.breakpoints", "a scale needs breakpoints");
            for (i, p) in scale.breakpoints.iter().enumerate() {
                let path = format!("judgement.breakpoints[{i}]");
                r.check(
                    (0.0..=100.0).contains(&p.fulfillment),
                    &path,
                    "fulfillment must lie in [0, 100] %",
                );
                if let Some(dim) = expected_dim {
                    r.check(
                        p.value.dimension() == dim,
                        &path,
                        format!("breakpoint must be a {dim} value, found {}", p.value),
                    );
                }
            }
            let sorted = scale
                .breakpoints
                .windows(2)
                .all(|w| w[0].value.si_value() <= w[1].value.si_value());
            r.check(sorted, "judgement.breakpoints", "breakpoints must be sorted by metric value");
            r.check(
                (0.0..=100.0).contains(&scale.out_of_domain),
                "judgement.out_of_domain",
                "fulfillment must lie in [0, 100] %",
            );
        }
    }

    let period = &c.application_period;
    for s in period.start.signals() {
        r.check(
            is_known_signal(s, events),
            "application_period.start",
            format!("unknown signal `{s}`"),
        );
    }
    for e in period.start.bare_equalities() {
        r.push(
            "application_period.start",
            format!("`{e}` compares a continuous signal for exact equality; give a tolerance with `~`"),
        );
    }
    period.start.visit(&mut |e| {
        if let ConditionExpr::Compare {
            op,
            tolerance: Some(t),
            ..
        } = e
        {
            if *op != CompareOp::Equal || !(t.is_finite() && *t >= 0.0) {
                r.push("application_period.start", format!("invalid tolerance in `{e}`"));
            }
        }
    });
    match &period.end {
        PeriodEnd::ConditionNoLongerFulfilled => {}
        PeriodEnd::Elapsed { duration } => r.check(
            duration.is_finite() && *duration > 0.0,
            "application_period.end",
            "elapsed duration must be > 0",
        ),
        PeriodEnd::Event { event } => {
            if let Some(events) = events {
                r.check(
                    events.contains(event.as_str()),
                    "application_period.end",
                    format!("unknown event `{event}`"),
                );
            }
        }
    }
    r
}

fn validate_metric(m: &EvaluationMetric) -> ValidationReport {
    let mut r = ValidationReport::new();
    if let MetricFormula::AverageEgoDeceleration { window } = m.formula {
        r.check(window.is_finite() && window > 0.0, "formula.window", "window must be > 0");
    }
    r.check(
        m.output_unit.dimension() == m.formula.output_dimension(),
        "output_unit",
        format!(
            "output unit `{}` does not measure {}",
            m.output_unit,
            m.formula.output_dimension()
        ),
    );
    r
}

/// Cross-references, declared formats and metric names across a whole
/// specification.
pub fn validate_specification(spec: &TestSpecification) -> ValidationReport {
    let mut r = ValidationReport::new();

    let format_ok = |f: &Option<String>| f.as_deref() == Some(BUILTIN_FORMAT);
    if !spec.cases.is_empty() && !format_ok(&spec.design.case_format) {
        r.push(
            "design.case_format",
            format!("case format must be declared as `{BUILTIN_FORMAT}`"),
        );
    }
    if !spec.procedures.is_empty() && !format_ok(&spec.design.procedure_format) {
        r.push(
            "design.procedure_format",
            format!("procedure format must be declared as `{BUILTIN_FORMAT}`"),
        );
    }

    let mut metric_names = BTreeSet::new();
    for m in &spec.metrics {
        let path = format!("metrics[{}]", m.name);
        if !metric_names.insert(&m.name) {
            r.push(&path, format!("duplicate metric `{}`", m.name));
        }
        r.extend_prefixed(&path, validate_metric(m));
    }

    let mut case_ids = BTreeSet::new();
    for tc in &spec.cases {
        let path = format!("cases[{}]", tc.id);
        if !case_ids.insert(tc.id.as_str()) {
            r.push(&path, format!("duplicate case id `{}`", tc.id));
        }
        r.check(
            !tc.criteria.is_empty(),
            &path,
            "a test case has one or more evaluation criteria",
        );
        r.extend_prefixed(&format!("{path}.scenario"), validate_concrete(&tc.scenario));
        let events: BTreeSet<&str> = tc.scenario.events.iter().map(|e| e.id.as_str()).collect();
        let mut crit_ids = BTreeSet::new();
        for c in &tc.criteria {
            let cpath = format!("{path}.criteria[{}]", c.id);
            if !crit_ids.insert(c.id.as_str()) {
                r.push(&cpath, format!("duplicate criterion id `{}`", c.id));
            }
            r.extend_prefixed(&cpath, validate_criterion(c, &spec.metrics, Some(&events)));
        }
    }

    let mut proc_ids = BTreeSet::new();
    for p in &spec.procedures {
        let path = format!("procedures[{}]", p.id);
        if !proc_ids.insert(p.id.as_str()) {
            r.push(&path, format!("duplicate procedure id `{}`", p.id));
        }
        r.check(!p.cases.is_empty(), &path, "a procedure has one or more test cases");
        for id in &p.cases {
            r.check(
                case_ids.contains(id.as_str()),
                format!("{path}.cases"),
                format!("unknown test case `{id}`"),
            );
        }
        for c in &p.cross_case_criteria {
            r.extend_prefixed(
                &format!("{path}.cross_case_criteria[{}]", c.id),
                validate_criterion(c, &spec.metrics, None),
            );
        }
    }

    if let Some(plan) = &spec.plan {
        r.extend_prefixed("plan", validate_plan(plan));
    }
    r
}
