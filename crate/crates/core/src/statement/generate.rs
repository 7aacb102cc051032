use crate::ingest::DataItem;
use crate::mapping::template::TemplateError;
use crate::mapping::{MappingPlan, ObjectMap, TriplesMapSpec};
use crate::window::JoinedItem;

use super::term::{CompiledTerm, RdfStatement};

pub const DEFAULT_BASE_IRI: &str = "http://example.com/";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerateStats {
    pub generated: usize,
    /// Statements not produced because a referenced attribute was missing or
    /// the expanded IRI was invalid.
    pub skipped: usize,
}

impl std::ops::AddAssign for GenerateStats {
    fn add_assign(&mut self, rhs: Self) {
        self.generated += rhs.generated;
        self.skipped += rhs.skipped;
    }
}

#[derive(Debug, Clone)]
enum CompiledObject {
    Term(CompiledTerm),
    Join,
}

#[derive(Debug, Clone)]
struct CompiledMap {
    subject: CompiledTerm,
    poms: Vec<(CompiledTerm, CompiledObject)>,
    plain_poms: usize,
}

impl CompiledMap {
    fn new(map: &TriplesMapSpec) -> Result<Self, TemplateError> {
        let subject = CompiledTerm::compile(&map.subject)?;
        let mut poms = Vec::with_capacity(map.predicate_object_maps.len());
        for pom in &map.predicate_object_maps {
            let predicate = CompiledTerm::compile(&pom.predicate)?;
            let object = match &pom.object {
                ObjectMap::Term(term) => CompiledObject::Term(CompiledTerm::compile(term)?),
                ObjectMap::Join(_) => CompiledObject::Join,
            };
            poms.push((predicate, object));
        }
        let plain_poms = poms
            .iter()
            .filter(|(_, o)| matches!(o, CompiledObject::Term(_)))
            .count();
        Ok(Self {
            subject,
            poms,
            plain_poms,
        })
    }
}

/// Statement generation for every triples map of a plan, with templates
/// parsed once.
#[derive(Debug, Clone)]
pub struct StatementGenerator {
    maps: Vec<CompiledMap>,
    base_iri: String,
}

impl StatementGenerator {
    pub fn new(plan: &MappingPlan, base_iri: impl Into<String>) -> Result<Self, TemplateError> {
        let maps = plan
            .triples_maps
            .iter()
            .map(CompiledMap::new)
            .collect::<Result<_, _>>()?;
        Ok(Self {
            maps,
            base_iri: base_iri.into(),
        })
    }

    pub fn base_iri(&self) -> &str {
        &self.base_iri
    }

    /// Statements for the non-join predicate-object maps of `map` over one item.
    pub fn for_item(&self, map: usize, item: &DataItem, out: &mut Vec<RdfStatement>) -> GenerateStats {
        let compiled = &self.maps[map];
        let mut stats = GenerateStats::default();
        if compiled.plain_poms == 0 {
            return stats;
        }
        let subject = match compiled.subject.expand(item, &self.base_iri) {
            Ok(s) => s,
            Err(_) => {
                stats.skipped = compiled.plain_poms;
                return stats;
            }
        };
        for (predicate, object) in &compiled.poms {
            let CompiledObject::Term(object) = object else {
                continue;
            };
            let terms = predicate
                .expand(item, &self.base_iri)
                .and_then(|p| object.expand(item, &self.base_iri).map(|o| (p, o)));
            match terms {
                Ok((predicate, object)) => {
                    out.push(RdfStatement {
                        subject: subject.clone(),
                        predicate,
                        object,
                        t: item.t(),
                    });
                    stats.generated += 1;
                }
                Err(_) => stats.skipped += 1,
            }
        }
        stats
    }

    /// The single statement of join predicate-object map `pom_index` of
    /// `child_map`: child subject, join predicate, parent subject.
    pub fn for_join(
        &self,
        child_map: usize,
        pom_index: usize,
        parent_map: usize,
        joined: &JoinedItem,
        out: &mut Vec<RdfStatement>,
    ) -> GenerateStats {
        let child = &self.maps[child_map];
        let (predicate, _) = &child.poms[pom_index];
        let parent = &self.maps[parent_map];
        let terms = child.subject.expand(&joined.child, &self.base_iri).and_then(|s| {
            let p = predicate.expand(&joined.child, &self.base_iri)?;
            let o = parent.subject.expand(&joined.parent, &self.base_iri)?;
            Ok((s, p, o))
        });
        match terms {
            Ok((subject, predicate, object)) => {
                out.push(RdfStatement {
                    subject,
                    predicate,
                    object,
                    t: joined.t(),
                });
                GenerateStats {
                    generated: 1,
                    skipped: 0,
                }
            }
            Err(_) => GenerateStats {
                generated: 0,
                skipped: 1,
            },
        }
    }
}

/// Input to one-off statement generation.
#[derive(Debug, Clone, Copy)]
pub enum MappingInput<'a> {
    Item(&'a DataItem),
    /// A join result for the join predicate-object map at `pom_index`.
    Joined {
        joined: &'a JoinedItem,
        pom_index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("unknown triples map `{0}`")]
    UnknownMap(String),
    #[error("predicate-object map {0} is not a join")]
    NotAJoin(usize),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// Generate the statements of one triples map for one input. Convenience
/// wrapper over [`StatementGenerator`] that compiles the plan on every call.
pub fn generate_statements(
    plan: &MappingPlan,
    map_id: &str,
    input: MappingInput<'_>,
    base_iri: &str,
) -> Result<(Vec<RdfStatement>, GenerateStats), GenerateError> {
    let map = plan
        .map_index(map_id)
        .ok_or_else(|| GenerateError::UnknownMap(map_id.to_string()))?;
    let generator = StatementGenerator::new(plan, base_iri)?;
    let mut out = Vec::new();
    let stats = match input {
        MappingInput::Item(item) => generator.for_item(map, item, &mut out),
        MappingInput::Joined { joined, pom_index } => {
            let spec = plan.triples_maps[map]
                .predicate_object_maps
                .get(pom_index)
                .and_then(|pom| match &pom.object {
                    ObjectMap::Join(spec) => Some(spec),
                    ObjectMap::Term(_) => None,
                })
                .ok_or(GenerateError::NotAJoin(pom_index))?;
            let parent = plan
                .map_index(&spec.parent_map_id)
                .ok_or_else(|| GenerateError::UnknownMap(spec.parent_map_id.clone()))?;
            generator.for_join(map, pom_index, parent, joined, &mut out)
        }
    };
    Ok((out, stats))
}
