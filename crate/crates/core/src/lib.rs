//! Streaming RDF generation: mapping documents are compiled into a dataflow
//! that reads JSON or CSV records from sockets and files, joins streams in
//! adaptive keyed windows and writes N-Triples or timestamped N-Quads.

pub mod clock;
pub mod endpoint;
pub mod error;
pub mod ingest;
pub mod mapping;
pub mod runtime;
pub mod statement;
pub mod window;

pub use endpoint::Endpoint;
pub use error::{MappingError, Position, RuntimeError, SourceError};
