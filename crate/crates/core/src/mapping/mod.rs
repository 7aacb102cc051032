//! Mapping documents: parsing, validation and compilation into an operator DAG.

mod compile;
mod model;
mod parse;
mod serialize;
pub mod template;
pub mod turtle;
mod validate;
pub mod vocab;

pub use compile::{compile_plan, CompiledJoin, ExecutablePlan, Operator, OperatorKind};
pub use model::*;
pub use parse::{parse_mapping, parse_mapping_with, ParseOptions};
pub use serialize::serialize_plan;
pub use validate::{
    is_absolute_iri, validate_plan, validate_plan_with, Finding, Severity, ValidationReport,
};
