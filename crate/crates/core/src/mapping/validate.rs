use std::collections::HashMap;
use std::fmt;

use super::model::*;
use super::template::parse_template;
use crate::ingest::jsonpath::JsonPath;
use crate::runtime::functions::FunctionRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warn,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    /// Triples map the finding is about, if any.
    pub map_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn is_ok(&self) -> bool {
        self.error_count() == 0
    }

    fn push(&mut self, severity: Severity, map_id: Option<&str>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity,
            map_id: map_id.map(str::to_string),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            let level = match finding.severity {
                Severity::Error => "error",
                Severity::Warn => "warn",
            };
            match &finding.map_id {
                Some(id) => writeln!(f, "{level}: <{id}>: {}", finding.message)?,
                None => writeln!(f, "{level}: {}", finding.message)?,
            }
        }
        Ok(())
    }
}

/// Check a plan against the mapping invariants using the built-in functions.
pub fn validate_plan(plan: &MappingPlan) -> ValidationReport {
    validate_plan_with(plan, &FunctionRegistry::builtin())
}

pub fn validate_plan_with(plan: &MappingPlan, registry: &FunctionRegistry) -> ValidationReport {
    let mut report = ValidationReport::default();
    if plan.triples_maps.is_empty() {
        report.push(Severity::Error, None, "no triples map found");
    }
    let mut seen_ids = HashMap::new();
    for map in &plan.triples_maps {
        let id = Some(map.id.as_str());
        if seen_ids.insert(map.id.as_str(), ()).is_some() {
            report.push(Severity::Error, id, "duplicate triples map identifier");
        }
        if let Err(e) = map.source.endpoint() {
            report.push(Severity::Error, id, format!("source `{}`: {e}", map.source.target));
        }
        if map.reference_formulation.content_type() != map.source.content_type {
            report.push(
                Severity::Error,
                id,
                format!(
                    "reference formulation {:?} cannot read {} records",
                    map.reference_formulation,
                    map.source.content_type.mime()
                ),
            );
        }
        if map.reference_formulation == ReferenceFormulation::JsonPath {
            if map.iterator.is_empty() {
                report.push(Severity::Error, id, "JSONPath logical source needs a non-empty iterator");
            } else if let Err(e) = JsonPath::parse(&map.iterator) {
                report.push(Severity::Error, id, format!("iterator `{}`: {e}", map.iterator));
            }
        }
        check_term_map(&mut report, id, &map.subject);
        for pom in &map.predicate_object_maps {
            check_term_map(&mut report, id, &pom.predicate);
            match &pom.object {
                ObjectMap::Term(term) => check_term_map(&mut report, id, term),
                ObjectMap::Join(join) => check_join(&mut report, plan, map, join),
            }
        }
        for binding in &map.functions {
            if !registry.contains(&binding.name) {
                report.push(Severity::Error, id, format!("unknown function `{}`", binding.name));
            } else if let Some(arity) = registry.arity(&binding.name) {
                if arity != binding.params.len() {
                    report.push(
                        Severity::Error,
                        id,
                        format!(
                            "function `{}` takes {arity} input(s), {} given",
                            binding.name,
                            binding.params.len()
                        ),
                    );
                }
            }
            if binding.output.is_empty() {
                report.push(Severity::Error, id, "function output attribute is empty");
            }
        }
    }
    if let Some(cycle) = find_join_cycle(plan) {
        report.push(
            Severity::Error,
            None,
            format!("cyclic join dependency: {}", cycle.join(" -> ")),
        );
    }
    for source in &plan.declared_sources {
        if !plan.triples_maps.iter().any(|m| &m.source == source) {
            report.push(
                Severity::Warn,
                None,
                format!("source `{}` is not used by any triples map", source.target),
            );
        }
    }
    report
}

fn check_term_map(report: &mut ValidationReport, id: Option<&str>, term: &TermMap) {
    match term.kind {
        TermMapKind::Template => {
            if let Err(e) = parse_template(&term.value) {
                report.push(Severity::Error, id, format!("{e} in `{}`", term.value));
            }
        }
        TermMapKind::Reference => {
            if term.value.is_empty() {
                report.push(Severity::Error, id, "empty rml:reference");
            }
        }
        TermMapKind::Constant => {
            if term.term_kind == TermKind::Iri && !is_absolute_iri(&term.value) {
                report.push(
                    Severity::Error,
                    id,
                    format!("constant IRI `{}` is not absolute", term.value),
                );
            }
        }
    }
}

fn check_join(report: &mut ValidationReport, plan: &MappingPlan, child: &TriplesMapSpec, join: &JoinSpec) {
    let id = Some(child.id.as_str());
    match plan.map(&join.parent_map_id) {
        None => report.push(
            Severity::Error,
            id,
            format!("parent triples map <{}> does not exist", join.parent_map_id),
        ),
        Some(parent) if parent.source == child.source => report.push(
            Severity::Error,
            id,
            format!("join parent <{}> reads the same logical source", parent.id),
        ),
        Some(_) => {}
    }
    if join.child_attr.is_empty() {
        report.push(Severity::Error, id, "join condition has an empty rr:child");
    }
    if join.parent_attr.is_empty() {
        report.push(Severity::Error, id, "join condition has an empty rr:parent");
    }
    let matched = matches!(
        (join.window_type, join.join_type),
        (WindowType::Tumbling, JoinType::TumblingJoin) | (WindowType::Dynamic, JoinType::DynamicJoin)
    );
    if !matched {
        report.push(
            Severity::Error,
            id,
            format!(
                "window type {} does not match join type {}",
                join.window_type, join.join_type
            ),
        );
    }
}

/// Absolute per RFC 3987: a scheme followed by `:`.
pub fn is_absolute_iri(value: &str) -> bool {
    let Some((scheme, rest)) = value.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && !rest.is_empty()
        && !value.chars().any(|c| c <= ' ' || matches!(c, '<' | '>' | '"'))
}

fn find_join_cycle(plan: &MappingPlan) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unvisited,
        Active,
        Done,
    }
    let n = plan.triples_maps.len();
    let edges: Vec<Vec<usize>> = plan
        .triples_maps
        .iter()
        .map(|m| {
            m.joins()
                .filter_map(|(_, j)| plan.map_index(&j.parent_map_id))
                .collect()
        })
        .collect();
    let mut marks = vec![Mark::Unvisited; n];
    let mut stack: Vec<usize> = Vec::new();

    fn visit(
        node: usize,
        edges: &[Vec<usize>],
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        marks[node] = Mark::Active;
        stack.push(node);
        for &next in &edges[node] {
            match marks[next] {
                Mark::Active => {
                    let start = stack.iter().position(|&s| s == next).unwrap_or(0);
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(next);
                    return Some(cycle);
                }
                Mark::Unvisited => {
                    if let Some(c) = visit(next, edges, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[node] = Mark::Done;
        None
    }

    (0..n).find_map(|start| {
        if marks[start] != Mark::Unvisited {
            return None;
        }
        visit(start, &edges, &mut marks, &mut stack).map(|cycle| {
            cycle
                .into_iter()
                .map(|i| plan.triples_maps[i].id.clone())
                .collect()
        })
    })
}
