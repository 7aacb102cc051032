//! Namespaces and the closed set of terms a mapping document may use.

pub const RR: &str = "http://www.w3.org/ns/r2rml#";
pub const RML: &str = "http://semweb.mmlab.be/ns/rml#";
pub const QL: &str = "http://semweb.mmlab.be/ns/ql#";
pub const TD: &str = "https://www.w3.org/2019/wot/td#";
pub const HCTL: &str = "https://www.w3.org/2019/wot/hypermedia#";
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
/// Default namespace for the streaming extension terms (joinConfig, windowType, ...).
pub const DEFAULT_RMLS: &str = "http://semweb.mmlab.be/ns/rmls#";

pub const RR_TERMS: &[&str] = &[
    "subjectMap",
    "predicateObjectMap",
    "predicate",
    "objectMap",
    "object",
    "template",
    "constant",
    "termType",
    "parentTriplesMap",
    "joinCondition",
    "child",
    "parent",
];
pub const RML_TERMS: &[&str] = &[
    "logicalSource",
    "source",
    "referenceFormulation",
    "iterator",
    "reference",
];
pub const TD_TERMS: &[&str] = &["hasPropertyAffordance", "hasForm"];
pub const HCTL_TERMS: &[&str] = &["hasTarget", "forContentType", "hasOperationType"];
pub const RMLS_TERMS: &[&str] = &[
    "joinConfig",
    "windowType",
    "joinType",
    "preMapping",
    "functionName",
    "input",
    "output",
];

/// Resolved IRIs for one document, with the configured streaming namespace.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub rmls: String,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self {
            rmls: DEFAULT_RMLS.to_string(),
        }
    }
}

impl Vocabulary {
    pub fn rr(&self, local: &str) -> String {
        format!("{RR}{local}")
    }

    pub fn rml(&self, local: &str) -> String {
        format!("{RML}{local}")
    }

    pub fn td(&self, local: &str) -> String {
        format!("{TD}{local}")
    }

    pub fn hctl(&self, local: &str) -> String {
        format!("{HCTL}{local}")
    }

    pub fn rmls(&self, local: &str) -> String {
        format!("{}{local}", self.rmls)
    }

    pub fn is_supported_predicate(&self, iri: &str) -> bool {
        if iri == super::turtle::RDF_TYPE {
            return true;
        }
        let tables: [(&str, &[&str]); 5] = [
            (RR, RR_TERMS),
            (RML, RML_TERMS),
            (TD, TD_TERMS),
            (HCTL, HCTL_TERMS),
            (self.rmls.as_str(), RMLS_TERMS),
        ];
        tables.iter().any(|(ns, terms)| {
            iri.strip_prefix(ns)
                .is_some_and(|local| terms.contains(&local))
        })
    }
}
