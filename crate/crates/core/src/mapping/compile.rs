use std::fmt::{self, Write as _};
use std::sync::Arc;

use super::model::*;
use super::validate::{validate_plan, ValidationReport};
use crate::error::MappingError;

/// One operator in the compiled dataflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorKind {
    Source { source: usize },
    ItemGenerator { source: usize },
    PreMapping { map: usize },
    Window { join: usize },
    StatementGenerator { map: usize },
    Combiner,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operator {
    pub kind: OperatorKind,
    pub label: String,
}

/// A join resolved to map indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledJoin {
    pub child_map: usize,
    pub parent_map: usize,
    pub pom_index: usize,
    pub spec: JoinSpec,
}

/// The operator DAG for a validated plan. Operators are stored in
/// topological order and every edge points forward.
#[derive(Debug, Clone)]
pub struct ExecutablePlan {
    pub plan: Arc<MappingPlan>,
    pub sources: Vec<SourceSpec>,
    /// Map indices fed by each source.
    pub source_maps: Vec<Vec<usize>>,
    /// Source index of each triples map.
    pub map_source: Vec<usize>,
    pub joins: Vec<CompiledJoin>,
    pub operators: Vec<Operator>,
    pub edges: Vec<(usize, usize)>,
}

impl ExecutablePlan {
    pub fn window_count(&self) -> usize {
        self.count(|k| matches!(k, OperatorKind::Window { .. }))
    }

    pub fn count(&self, pred: impl Fn(&OperatorKind) -> bool) -> usize {
        self.operators.iter().filter(|op| pred(&op.kind)).count()
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |(a, _)| *a == node).map(|(_, b)| *b)
    }

    pub fn predecessors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |(_, b)| *b == node).map(|(a, _)| *a)
    }

    /// Joins a map takes part in as the child side.
    pub fn joins_as_child(&self, map: usize) -> impl Iterator<Item = (usize, &CompiledJoin)> {
        self.joins.iter().enumerate().filter(move |(_, j)| j.child_map == map)
    }

    pub fn joins_as_parent(&self, map: usize) -> impl Iterator<Item = (usize, &CompiledJoin)> {
        self.joins.iter().enumerate().filter(move |(_, j)| j.parent_map == map)
    }

    /// Indented text rendering of the dataflow, sources first.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        for (i, op) in self.operators.iter().enumerate() {
            if matches!(op.kind, OperatorKind::Source { .. }) {
                self.explain_node(i, 0, &mut out);
            }
        }
        out
    }

    fn explain_node(&self, node: usize, depth: usize, out: &mut String) {
        let _ = writeln!(out, "{}{}", "  ".repeat(depth), self.operators[node].label);
        for next in self.successors(node) {
            self.explain_node(next, depth + 1, out);
        }
    }
}

impl fmt::Display for ExecutablePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.explain())
    }
}

/// Validate the plan and build its operator DAG.
pub fn compile_plan(plan: &MappingPlan) -> Result<ExecutablePlan, MappingError> {
    let report = validate_plan(plan);
    if !report.is_ok() {
        return Err(MappingError::Invalid(only_errors(report)));
    }
    Ok(build(plan))
}

fn only_errors(report: ValidationReport) -> ValidationReport {
    ValidationReport {
        findings: report.errors().cloned().collect(),
    }
}

fn build(plan: &MappingPlan) -> ExecutablePlan {
    let sources = plan.sources();
    let map_source: Vec<usize> = plan
        .triples_maps
        .iter()
        .map(|m| sources.iter().position(|s| *s == m.source).expect("source collected"))
        .collect();
    let mut source_maps = vec![Vec::new(); sources.len()];
    for (map, &source) in map_source.iter().enumerate() {
        source_maps[source].push(map);
    }
    let joins: Vec<CompiledJoin> = plan
        .joins
        .iter()
        .map(|edge| CompiledJoin {
            child_map: plan.map_index(&edge.child_map_id).expect("validated"),
            parent_map: plan.map_index(&edge.spec.parent_map_id).expect("validated"),
            pom_index: edge.pom_index,
            spec: edge.spec.clone(),
        })
        .collect();

    let mut operators = Vec::new();
    let mut push = |kind: OperatorKind, label: String| {
        operators.push(Operator { kind, label });
        operators.len() - 1
    };
    let source_nodes: Vec<usize> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| push(OperatorKind::Source { source: i }, format!("source[{i}] {}", s.target)))
        .collect();
    let item_nodes: Vec<usize> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let maps = &source_maps[i];
            let m = &plan.triples_maps[maps[0]];
            push(
                OperatorKind::ItemGenerator { source: i },
                format!(
                    "item-generator[{i}] {} iterator={:?}",
                    match s.content_type {
                        ContentType::Json => "json",
                        ContentType::Csv => "csv",
                    },
                    m.iterator
                ),
            )
        })
        .collect();
    let mut upstream: Vec<usize> = map_source.iter().map(|&s| item_nodes[s]).collect();
    let mut edges = Vec::new();
    for (s, _) in sources.iter().enumerate() {
        edges.push((source_nodes[s], item_nodes[s]));
    }
    for (m, map) in plan.triples_maps.iter().enumerate() {
        if !map.functions.is_empty() {
            let names: Vec<&str> = map.functions.iter().map(|f| f.name.as_str()).collect();
            let node = push(
                OperatorKind::PreMapping { map: m },
                format!("pre-mapping <{}> {}", map.id, names.join(", ")),
            );
            edges.push((upstream[m], node));
            upstream[m] = node;
        }
    }
    let window_nodes: Vec<usize> = joins
        .iter()
        .enumerate()
        .map(|(j, join)| {
            let node = push(
                OperatorKind::Window { join: j },
                format!(
                    "window[{j}] {}/{} <{}>.{} = <{}>.{}",
                    join.spec.window_type,
                    join.spec.join_type,
                    plan.triples_maps[join.child_map].id,
                    join.spec.child_attr,
                    plan.triples_maps[join.parent_map].id,
                    join.spec.parent_attr,
                ),
            );
            edges.push((upstream[join.child_map], node));
            edges.push((upstream[join.parent_map], node));
            node
        })
        .collect();
    let statement_nodes: Vec<usize> = plan
        .triples_maps
        .iter()
        .enumerate()
        .map(|(m, map)| {
            let node = push(
                OperatorKind::StatementGenerator { map: m },
                format!(
                    "statement-generator <{}> ({} predicate-object maps)",
                    map.id,
                    map.predicate_object_maps.len()
                ),
            );
            if map.has_plain_predicate_object_maps() || map.predicate_object_maps.is_empty() {
                edges.push((upstream[m], node));
            }
            node
        })
        .collect();
    for (j, join) in joins.iter().enumerate() {
        edges.push((window_nodes[j], statement_nodes[join.child_map]));
    }
    let combiner = push(OperatorKind::Combiner, "combiner".to_string());
    for &node in &statement_nodes {
        edges.push((node, combiner));
    }
    let sink = push(OperatorKind::Sink, "sink".to_string());
    edges.push((combiner, sink));

    ExecutablePlan {
        plan: Arc::new(plan.clone()),
        sources,
        source_maps,
        map_source,
        joins,
        operators,
        edges,
    }
}
