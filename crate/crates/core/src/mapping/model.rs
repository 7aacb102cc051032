use std::fmt;

use crate::endpoint::Endpoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContentType {
    Json,
    Csv,
}

impl ContentType {
    pub fn from_mime(value: &str) -> Option<Self> {
        match value.trim().to_ascii_lowercase().as_str() {
            "application/json" | "application/x-ndjson" | "application/ndjson" => {
                Some(ContentType::Json)
            }
            "text/csv" | "application/csv" => Some(ContentType::Csv),
            _ => None,
        }
    }

    pub fn mime(self) -> &'static str {
        match self {
            ContentType::Json => "application/json",
            ContentType::Csv => "text/csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    ReadProperty,
}

/// Where a logical source reads from and how its records are encoded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpec {
    pub target: String,
    pub content_type: ContentType,
    pub operation: Operation,
}

impl SourceSpec {
    pub fn endpoint(&self) -> Result<Endpoint, crate::error::SourceError> {
        self.target.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceFormulation {
    JsonPath,
    Csv,
}

impl ReferenceFormulation {
    pub fn content_type(self) -> ContentType {
        match self {
            ReferenceFormulation::JsonPath => ContentType::Json,
            ReferenceFormulation::Csv => ContentType::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermMapKind {
    Template,
    Reference,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermKind {
    Iri,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermMap {
    pub kind: TermMapKind,
    pub value: String,
    pub term_kind: TermKind,
}

impl TermMap {
    pub fn template(value: impl Into<String>, term_kind: TermKind) -> Self {
        Self {
            kind: TermMapKind::Template,
            value: value.into(),
            term_kind,
        }
    }

    pub fn reference(value: impl Into<String>, term_kind: TermKind) -> Self {
        Self {
            kind: TermMapKind::Reference,
            value: value.into(),
            term_kind,
        }
    }

    pub fn constant(value: impl Into<String>, term_kind: TermKind) -> Self {
        Self {
            kind: TermMapKind::Constant,
            value: value.into(),
            term_kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowType {
    Tumbling,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JoinType {
    TumblingJoin,
    DynamicJoin,
}

impl fmt::Display for WindowType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowType::Tumbling => "TumblingWindow",
            WindowType::Dynamic => "DynamicWindow",
        })
    }
}

impl fmt::Display for JoinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JoinType::TumblingJoin => "TumblingJoin",
            JoinType::DynamicJoin => "DynamicJoin",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JoinSpec {
    pub parent_map_id: String,
    pub child_attr: String,
    pub parent_attr: String,
    pub window_type: WindowType,
    pub join_type: JoinType,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ObjectMap {
    Term(TermMap),
    Join(JoinSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredicateObjectMap {
    pub predicate: TermMap,
    pub object: ObjectMap,
}

/// A pre-mapping transformation applied to a triples map's items.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionBinding {
    pub name: String,
    pub params: Vec<String>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplesMapSpec {
    pub id: String,
    pub source: SourceSpec,
    pub iterator: String,
    pub reference_formulation: ReferenceFormulation,
    pub subject: TermMap,
    pub predicate_object_maps: Vec<PredicateObjectMap>,
    pub functions: Vec<FunctionBinding>,
}

impl TriplesMapSpec {
    pub fn joins(&self) -> impl Iterator<Item = (usize, &JoinSpec)> {
        self.predicate_object_maps
            .iter()
            .enumerate()
            .filter_map(|(i, pom)| match &pom.object {
                ObjectMap::Join(join) => Some((i, join)),
                ObjectMap::Term(_) => None,
            })
    }

    pub fn has_plain_predicate_object_maps(&self) -> bool {
        self.predicate_object_maps
            .iter()
            .any(|pom| matches!(pom.object, ObjectMap::Term(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinEdge {
    pub child_map_id: String,
    /// Index of the join's predicate-object map inside the child map.
    pub pom_index: usize,
    pub spec: JoinSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionCall {
    pub map_id: String,
    pub binding: FunctionBinding,
}

/// A parsed mapping document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingPlan {
    pub triples_maps: Vec<TriplesMapSpec>,
    /// Every source described in the document, referenced or not.
    pub declared_sources: Vec<SourceSpec>,
    pub joins: Vec<JoinEdge>,
    pub function_calls: Vec<FunctionCall>,
}

impl MappingPlan {
    /// Build a plan from triples maps, deriving the join and function lists.
    pub fn new(triples_maps: Vec<TriplesMapSpec>, declared_sources: Vec<SourceSpec>) -> Self {
        let joins = triples_maps
            .iter()
            .flat_map(|map| {
                map.joins().map(|(pom_index, spec)| JoinEdge {
                    child_map_id: map.id.clone(),
                    pom_index,
                    spec: spec.clone(),
                })
            })
            .collect();
        let function_calls = triples_maps
            .iter()
            .flat_map(|map| {
                map.functions.iter().map(|binding| FunctionCall {
                    map_id: map.id.clone(),
                    binding: binding.clone(),
                })
            })
            .collect();
        let mut declared = declared_sources;
        for map in &triples_maps {
            if !declared.contains(&map.source) {
                declared.push(map.source.clone());
            }
        }
        Self {
            triples_maps,
            declared_sources: declared,
            joins,
            function_calls,
        }
    }

    pub fn map(&self, id: &str) -> Option<&TriplesMapSpec> {
        self.triples_maps.iter().find(|m| m.id == id)
    }

    pub fn map_index(&self, id: &str) -> Option<usize> {
        self.triples_maps.iter().position(|m| m.id == id)
    }

    /// Distinct sources in first-use order.
    pub fn sources(&self) -> Vec<SourceSpec> {
        let mut out: Vec<SourceSpec> = Vec::new();
        for map in &self.triples_maps {
            if !out.contains(&map.source) {
                out.push(map.source.clone());
            }
        }
        out
    }
}
