//! RDF term expansion, statement generation and line serialization.

mod generate;
mod serialize;
mod term;

pub use generate::{
    generate_statements, GenerateError, GenerateStats, MappingInput, StatementGenerator, DEFAULT_BASE_IRI,
};
pub use serialize::{serialize, serialize_into, OutputFormat, TS_GRAPH_PREFIX};
pub use term::{
    expand_template, iri_safe, iri_safe_into, is_valid_iri, CompiledTerm, RdfStatement, RdfTerm, TermError,
    TermType,
};
