use std::collections::{HashMap, HashSet};

use super::model::*;
use super::turtle::{parse_turtle, Node, Triple, RDF_TYPE};
use super::vocab::{Vocabulary, QL, RR};
use crate::endpoint::Endpoint;
use crate::error::{MappingError, Position, SourceError};

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub vocabulary: Vocabulary,
}

impl ParseOptions {
    pub fn with_rmls_namespace(namespace: impl Into<String>) -> Self {
        Self {
            vocabulary: Vocabulary {
                rmls: namespace.into(),
            },
        }
    }
}

/// Parse a mapping document with the default streaming namespace.
pub fn parse_mapping(document_text: &str) -> Result<MappingPlan, MappingError> {
    parse_mapping_with(document_text, &ParseOptions::default())
}

pub fn parse_mapping_with(
    document_text: &str,
    options: &ParseOptions,
) -> Result<MappingPlan, MappingError> {
    let triples = parse_turtle(document_text)?;
    let vocab = &options.vocabulary;
    for t in &triples {
        if !vocab.is_supported_predicate(&t.predicate) {
            return Err(MappingError::UnknownTerm {
                term: t.predicate.clone(),
                position: t.position,
            });
        }
    }
    let graph = Graph::new(&triples);
    let reader = Reader { graph: &graph, vocab };

    let logical_source = vocab.rml("logicalSource");
    let triples_map_class = Node::Iri(vocab.rr("TriplesMap"));
    let mut map_nodes: Vec<&Node> = Vec::new();
    for t in &triples {
        let is_map = (t.predicate == RDF_TYPE && t.object == triples_map_class)
            || t.predicate == logical_source;
        if is_map && !map_nodes.contains(&&t.subject) {
            map_nodes.push(&t.subject);
        }
    }
    if map_nodes.is_empty() {
        return Err(MappingError::NoTriplesMap);
    }
    let map_ids: HashSet<String> = map_nodes.iter().map(|n| node_id(n)).collect();

    let mut maps = Vec::with_capacity(map_nodes.len());
    for node in &map_nodes {
        maps.push(reader.triples_map(node, &map_ids)?);
    }

    // Described sources in document order. A referenced description takes
    // the spec its map resolved, since the content type may come from the
    // map's reference formulation.
    let mut resolved: HashMap<&Node, &SourceSpec> = HashMap::new();
    for (node, map) in map_nodes.iter().zip(&maps) {
        if let Some(ls) = graph.at_most_one(node, &vocab.rml("logicalSource"))? {
            if let Some(src) = graph.at_most_one(&ls.object, &vocab.rml("source"))? {
                resolved.entry(&src.object).or_insert(&map.source);
            }
        }
    }
    let mut declared = Vec::new();
    let mut seen: HashSet<&Node> = HashSet::new();
    let affordance = vocab.td("hasPropertyAffordance");
    for t in &triples {
        if t.predicate == affordance && seen.insert(&t.subject) {
            let spec = match resolved.get(&t.subject) {
                Some(spec) => (*spec).clone(),
                None => reader.described_source(&t.subject, None)?,
            };
            if !declared.contains(&spec) {
                declared.push(spec);
            }
        }
    }
    Ok(MappingPlan::new(maps, declared))
}

fn node_id(node: &Node) -> String {
    match node {
        Node::Iri(iri) => iri.clone(),
        Node::Blank(label) => format!("_:{label}"),
        Node::Literal(value) => value.clone(),
    }
}

struct Graph<'a> {
    by_subject: HashMap<&'a Node, Vec<&'a Triple>>,
}

impl<'a> Graph<'a> {
    fn new(triples: &'a [Triple]) -> Self {
        let mut by_subject: HashMap<&Node, Vec<&Triple>> = HashMap::new();
        for t in triples {
            by_subject.entry(&t.subject).or_default().push(t);
        }
        Self { by_subject }
    }

    fn all(&self, subject: &Node, predicate: &str) -> Vec<&'a Triple> {
        self.by_subject
            .get(subject)
            .map(|ts| ts.iter().copied().filter(|t| t.predicate == predicate).collect())
            .unwrap_or_default()
    }

    fn at_most_one(
        &self,
        subject: &Node,
        predicate: &str,
    ) -> Result<Option<&'a Triple>, MappingError> {
        let found = self.all(subject, predicate);
        match found.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(one)),
            [_, second, ..] => Err(MappingError::structure(
                second.position,
                format!("{} given more than once for {subject}", short(predicate)),
            )),
        }
    }

    fn position_of(&self, subject: &Node) -> Position {
        self.by_subject
            .get(subject)
            .and_then(|ts| ts.first())
            .map(|t| t.position)
            .unwrap_or_default()
    }

    fn describes(&self, subject: &Node) -> bool {
        self.by_subject.contains_key(subject)
    }
}

fn short(iri: &str) -> &str {
    iri.rsplit(['#', '/']).next().unwrap_or(iri)
}

fn literal<'t>(t: &'t Triple, what: &str) -> Result<&'t str, MappingError> {
    match &t.object {
        Node::Literal(v) => Ok(v),
        other => Err(MappingError::structure(
            t.position,
            format!("{what} must be a string literal, found {other}"),
        )),
    }
}

struct Reader<'g, 'a> {
    graph: &'g Graph<'a>,
    vocab: &'g Vocabulary,
}

impl Reader<'_, '_> {
    fn triples_map(
        &self,
        node: &Node,
        map_ids: &HashSet<String>,
    ) -> Result<TriplesMapSpec, MappingError> {
        let g = self.graph;
        let v = self.vocab;
        let position = g.position_of(node);
        let id = node_id(node);
        // Blank node labels share the `_:` form of map ids.
        if matches!(node, Node::Iri(iri) if iri.starts_with("_:")) {
            return Err(MappingError::structure(position, format!("triples map IRI <{id}> reads as a blank node")));
        }

        let ls = g
            .at_most_one(node, &v.rml("logicalSource"))?
            .ok_or_else(|| MappingError::structure(position, format!("<{id}> has no rml:logicalSource")))?;
        let ls_node = &ls.object;

        let formulation = match g.at_most_one(ls_node, &v.rml("referenceFormulation"))? {
            None => None,
            Some(t) => Some(match &t.object {
                Node::Iri(iri) if *iri == format!("{QL}JSONPath") => ReferenceFormulation::JsonPath,
                Node::Iri(iri) if *iri == format!("{QL}CSV") => ReferenceFormulation::Csv,
                other => {
                    return Err(MappingError::UnknownTerm {
                        term: node_id(other),
                        position: t.position,
                    })
                }
            }),
        };
        let source_triple = g
            .at_most_one(ls_node, &v.rml("source"))?
            .ok_or_else(|| MappingError::structure(ls.position, "logical source has no rml:source"))?;
        let source = match &source_triple.object {
            Node::Literal(target) => self.source_spec(target, None, formulation, source_triple.position)?,
            Node::Iri(iri) if !g.describes(&source_triple.object) => {
                self.source_spec(iri, None, formulation, source_triple.position)?
            }
            described => self.described_source(described, formulation)?,
        };
        let reference_formulation = formulation.unwrap_or(match source.content_type {
            ContentType::Json => ReferenceFormulation::JsonPath,
            ContentType::Csv => ReferenceFormulation::Csv,
        });
        let iterator = match g.at_most_one(ls_node, &v.rml("iterator"))? {
            Some(t) => literal(t, "rml:iterator")?.to_string(),
            None => String::new(),
        };

        let subject_maps = g.all(node, &v.rr("subjectMap"));
        let subject = match subject_maps.as_slice() {
            [one] => self.term_map(&one.object, one.position, TermRole::Subject)?,
            [] => {
                return Err(MappingError::structure(
                    position,
                    format!("<{id}> has no rr:subjectMap"),
                ))
            }
            [_, second, ..] => {
                return Err(MappingError::structure(
                    second.position,
                    format!("<{id}> has more than one rr:subjectMap"),
                ))
            }
        };

        let mut predicate_object_maps = Vec::new();
        for pom in g.all(node, &v.rr("predicateObjectMap")) {
            predicate_object_maps.extend(self.predicate_object_map(pom, map_ids)?);
        }

        let mut functions = Vec::new();
        for f in g.all(node, &v.rmls("preMapping")) {
            functions.push(self.function_binding(&f.object, f.position)?);
        }

        Ok(TriplesMapSpec {
            id,
            source,
            iterator,
            reference_formulation,
            subject,
            predicate_object_maps,
            functions,
        })
    }

    fn source_spec(
        &self,
        target: &str,
        content_type: Option<&str>,
        formulation: Option<ReferenceFormulation>,
        position: Position,
    ) -> Result<SourceSpec, MappingError> {
        match target.parse::<Endpoint>() {
            Ok(_) => {}
            Err(SourceError::UnsupportedScheme(_)) => {
                return Err(MappingError::UnsupportedScheme {
                    target: target.to_string(),
                })
            }
            Err(e) => return Err(MappingError::structure(position, e.to_string())),
        }
        let content_type = match content_type {
            Some(mime) => ContentType::from_mime(mime).ok_or_else(|| {
                MappingError::UnsupportedContentType {
                    value: mime.to_string(),
                }
            })?,
            None => formulation
                .map(ReferenceFormulation::content_type)
                .ok_or_else(|| {
                    MappingError::structure(
                        position,
                        format!("cannot determine the content type of `{target}`"),
                    )
                })?,
        };
        Ok(SourceSpec {
            target: target.to_string(),
            content_type,
            operation: Operation::ReadProperty,
        })
    }

    /// A `td:Thing` style source description with a form carrying the target.
    fn described_source(
        &self,
        node: &Node,
        formulation: Option<ReferenceFormulation>,
    ) -> Result<SourceSpec, MappingError> {
        let g = self.graph;
        let v = self.vocab;
        let position = g.position_of(node);
        let missing = || MappingError::structure(position, format!("source {node} has no hctl:hasTarget"));
        let affordance = g.at_most_one(node, &v.td("hasPropertyAffordance"))?.ok_or_else(missing)?;
        let form = g.at_most_one(&affordance.object, &v.td("hasForm"))?.ok_or_else(missing)?;
        let form = &form.object;
        let target_triple = g.at_most_one(form, &v.hctl("hasTarget"))?.ok_or_else(missing)?;
        let target = literal(target_triple, "hctl:hasTarget")?;
        let content_type = match g.at_most_one(form, &v.hctl("forContentType"))? {
            Some(t) => Some(literal(t, "hctl:forContentType")?),
            None => None,
        };
        if let Some(t) = g.at_most_one(form, &v.hctl("hasOperationType"))? {
            let op = literal(t, "hctl:hasOperationType")?;
            if !op.eq_ignore_ascii_case("readproperty") {
                return Err(MappingError::structure(
                    t.position,
                    format!("unsupported operation type `{op}`"),
                ));
            }
        }
        self.source_spec(target, content_type, formulation, target_triple.position)
    }

    fn term_map(&self, node: &Node, position: Position, role: TermRole) -> Result<TermMap, MappingError> {
        let g = self.graph;
        let v = self.vocab;
        let template = g.at_most_one(node, &v.rr("template"))?;
        let constant = g.at_most_one(node, &v.rr("constant"))?;
        let reference = g.at_most_one(node, &v.rml("reference"))?;
        let (kind, value, default_kind) = match (template, constant, reference) {
            (Some(t), None, None) => (
                TermMapKind::Template,
                literal(t, "rr:template")?.to_string(),
                TermKind::Iri,
            ),
            (None, Some(t), None) => match &t.object {
                Node::Iri(iri) => (TermMapKind::Constant, iri.clone(), TermKind::Iri),
                Node::Literal(value) => (TermMapKind::Constant, value.clone(), TermKind::Literal),
                Node::Blank(_) => {
                    return Err(MappingError::structure(t.position, "rr:constant cannot be a blank node"))
                }
            },
            (None, None, Some(t)) => (
                TermMapKind::Reference,
                literal(t, "rml:reference")?.to_string(),
                TermKind::Literal,
            ),
            _ => {
                return Err(MappingError::structure(
                    position,
                    "a term map needs exactly one of rr:template, rr:constant, rml:reference",
                ))
            }
        };
        let term_kind = match g.at_most_one(node, &v.rr("termType"))? {
            None => match role {
                TermRole::Subject => TermKind::Iri,
                TermRole::Object => default_kind,
            },
            Some(t) => match &t.object {
                Node::Iri(iri) if *iri == format!("{RR}IRI") => TermKind::Iri,
                Node::Iri(iri) if *iri == format!("{RR}Literal") => TermKind::Literal,
                other => {
                    return Err(MappingError::UnknownTerm {
                        term: node_id(other),
                        position: t.position,
                    })
                }
            },
        };
        if role == TermRole::Subject && term_kind != TermKind::Iri {
            return Err(MappingError::structure(position, "subject maps must produce IRIs"));
        }
        Ok(TermMap {
            kind,
            value,
            term_kind,
        })
    }

    fn predicate_object_map(
        &self,
        pom: &Triple,
        map_ids: &HashSet<String>,
    ) -> Result<Vec<PredicateObjectMap>, MappingError> {
        let g = self.graph;
        let v = self.vocab;
        let node = &pom.object;
        let mut predicates = Vec::new();
        for p in g.all(node, &v.rr("predicate")) {
            match &p.object {
                Node::Iri(iri) => predicates.push(TermMap::constant(iri.clone(), TermKind::Iri)),
                other => {
                    return Err(MappingError::structure(
                        p.position,
                        format!("rr:predicate must be an IRI, found {other}"),
                    ))
                }
            }
        }
        if predicates.is_empty() {
            return Err(MappingError::structure(pom.position, "predicate-object map without rr:predicate"));
        }
        let mut objects = Vec::new();
        for o in g.all(node, &v.rr("object")) {
            objects.push(ObjectMap::Term(match &o.object {
                Node::Iri(iri) => TermMap::constant(iri.clone(), TermKind::Iri),
                Node::Literal(value) => TermMap::constant(value.clone(), TermKind::Literal),
                Node::Blank(_) => {
                    return Err(MappingError::structure(o.position, "rr:object cannot be a blank node"))
                }
            }));
        }
        for o in g.all(node, &v.rr("objectMap")) {
            if g.at_most_one(&o.object, &v.rr("parentTriplesMap"))?.is_some() {
                objects.push(ObjectMap::Join(self.join_spec(&o.object, map_ids)?));
            } else {
                objects.push(ObjectMap::Term(self.term_map(&o.object, o.position, TermRole::Object)?));
            }
        }
        if objects.is_empty() {
            return Err(MappingError::structure(pom.position, "predicate-object map without an object"));
        }
        let mut out = Vec::with_capacity(predicates.len() * objects.len());
        for predicate in &predicates {
            for object in &objects {
                out.push(PredicateObjectMap {
                    predicate: predicate.clone(),
                    object: object.clone(),
                });
            }
        }
        Ok(out)
    }

    fn join_spec(&self, node: &Node, map_ids: &HashSet<String>) -> Result<JoinSpec, MappingError> {
        let g = self.graph;
        let v = self.vocab;
        let parent = g.at_most_one(node, &v.rr("parentTriplesMap"))?.expect("checked by caller");
        let parent_map_id = node_id(&parent.object);
        if !map_ids.contains(&parent_map_id) {
            return Err(MappingError::DanglingReference {
                reference: parent_map_id,
                position: parent.position,
            });
        }
        let conditions = g.all(node, &v.rr("joinCondition"));
        let condition = match conditions.as_slice() {
            [one] => one,
            [] => {
                return Err(MappingError::structure(
                    parent.position,
                    "a join needs an rr:joinCondition",
                ))
            }
            [_, second, ..] => {
                return Err(MappingError::structure(
                    second.position,
                    "only one rr:joinCondition per join is supported",
                ))
            }
        };
        let child = g
            .at_most_one(&condition.object, &v.rr("child"))?
            .ok_or_else(|| MappingError::structure(condition.position, "join condition without rr:child"))?;
        let parent_attr = g
            .at_most_one(&condition.object, &v.rr("parent"))?
            .ok_or_else(|| MappingError::structure(condition.position, "join condition without rr:parent"))?;

        let window_type = match g.at_most_one(node, &v.rmls("windowType"))? {
            None => None,
            Some(t) => Some(self.window_type(t)?),
        };
        let join_type = match g.at_most_one(node, &v.rmls("joinConfig"))? {
            None => None,
            Some(cfg) => match g.at_most_one(&cfg.object, &v.rmls("joinType"))? {
                None => None,
                Some(t) => Some(self.join_type(t)?),
            },
        };
        let (window_type, join_type) = match (window_type, join_type) {
            (Some(w), Some(j)) => (w, j),
            (Some(WindowType::Tumbling), None) => (WindowType::Tumbling, JoinType::TumblingJoin),
            (Some(WindowType::Dynamic), None) => (WindowType::Dynamic, JoinType::DynamicJoin),
            (None, Some(JoinType::TumblingJoin)) => (WindowType::Tumbling, JoinType::TumblingJoin),
            (None, Some(JoinType::DynamicJoin)) => (WindowType::Dynamic, JoinType::DynamicJoin),
            (None, None) => (WindowType::Tumbling, JoinType::TumblingJoin),
        };
        Ok(JoinSpec {
            parent_map_id,
            child_attr: literal(child, "rr:child")?.to_string(),
            parent_attr: literal(parent_attr, "rr:parent")?.to_string(),
            window_type,
            join_type,
        })
    }

    fn window_type(&self, t: &Triple) -> Result<WindowType, MappingError> {
        match &t.object {
            Node::Iri(iri) if *iri == self.vocab.rmls("TumblingWindow") => Ok(WindowType::Tumbling),
            Node::Iri(iri) if *iri == self.vocab.rmls("DynamicWindow") => Ok(WindowType::Dynamic),
            other => Err(MappingError::UnknownTerm {
                term: node_id(other),
                position: t.position,
            }),
        }
    }

    fn join_type(&self, t: &Triple) -> Result<JoinType, MappingError> {
        match &t.object {
            Node::Iri(iri) if *iri == self.vocab.rmls("TumblingJoin") => Ok(JoinType::TumblingJoin),
            Node::Iri(iri) if *iri == self.vocab.rmls("DynamicJoin") => Ok(JoinType::DynamicJoin),
            other => Err(MappingError::UnknownTerm {
                term: node_id(other),
                position: t.position,
            }),
        }
    }

    fn function_binding(&self, node: &Node, position: Position) -> Result<FunctionBinding, MappingError> {
        let g = self.graph;
        let v = self.vocab;
        let name = g
            .at_most_one(node, &v.rmls("functionName"))?
            .ok_or_else(|| MappingError::structure(position, "pre-mapping function without rmls:functionName"))?;
        let output = g
            .at_most_one(node, &v.rmls("output"))?
            .ok_or_else(|| MappingError::structure(position, "pre-mapping function without rmls:output"))?;
        let params = g
            .all(node, &v.rmls("input"))
            .into_iter()
            .map(|t| literal(t, "rmls:input").map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FunctionBinding {
            name: literal(name, "rmls:functionName")?.to_string(),
            params,
            output: literal(output, "rmls:output")?.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TermRole {
    Subject,
    Object,
}
