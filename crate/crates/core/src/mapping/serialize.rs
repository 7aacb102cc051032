use std::fmt::Write as _;

use super::model::*;
use super::vocab::{Vocabulary, HCTL, QL, RML, RR, TD};

fn quote(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Whether `value` can be written between `<` and `>` unchanged.
fn fits_iri_ref(value: &str) -> bool {
    !value.chars().any(|c| c <= ' ' || "<>\"{}|^`\\".contains(c))
}

fn id_term(id: &str) -> String {
    match id.strip_prefix("_:") {
        Some(_) => id.to_string(),
        None => format!("<{id}>"),
    }
}

fn term_map(term: &TermMap, subject: bool) -> String {
    let mut out = String::from("[ ");
    match term.kind {
        TermMapKind::Template => {
            let _ = write!(out, "rr:template {}", quote(&term.value));
        }
        TermMapKind::Reference => {
            let _ = write!(out, "rml:reference {}", quote(&term.value));
        }
        TermMapKind::Constant => match term.term_kind {
            TermKind::Iri if fits_iri_ref(&term.value) => {
                let _ = write!(out, "rr:constant <{}>", term.value);
            }
            // Only a string can carry it; the term type restores the kind.
            TermKind::Iri => {
                let _ = write!(out, "rr:constant {} ; rr:termType rr:IRI", quote(&term.value));
            }
            TermKind::Literal => {
                let _ = write!(out, "rr:constant {}", quote(&term.value));
            }
        },
    }
    if !subject && term.kind != TermMapKind::Constant {
        let _ = write!(
            out,
            " ; rr:termType {}",
            match term.term_kind {
                TermKind::Iri => "rr:IRI",
                TermKind::Literal => "rr:Literal",
            }
        );
    }
    out.push_str(" ]");
    out
}

/// Render a plan back into the mapping document syntax.
pub fn serialize_plan(plan: &MappingPlan, vocab: &Vocabulary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@prefix rr: <{RR}> .");
    let _ = writeln!(out, "@prefix rml: <{RML}> .");
    let _ = writeln!(out, "@prefix ql: <{QL}> .");
    let _ = writeln!(out, "@prefix td: <{TD}> .");
    let _ = writeln!(out, "@prefix hctl: <{HCTL}> .");
    let _ = writeln!(out, "@prefix rmls: <{}> .", vocab.rmls);
    out.push('\n');

    for (i, source) in plan.declared_sources.iter().enumerate() {
        let _ = writeln!(
            out,
            "_:source{i} a td:Thing ;\n  td:hasPropertyAffordance [ td:hasForm [\n    hctl:hasTarget {} ;\n    hctl:forContentType {} ;\n    hctl:hasOperationType \"readproperty\" ] ] .\n",
            quote(&source.target),
            quote(source.content_type.mime()),
        );
    }

    for map in &plan.triples_maps {
        let source_index = plan
            .declared_sources
            .iter()
            .position(|s| *s == map.source)
            .expect("plan lists every used source");
        let _ = writeln!(out, "{} a rr:TriplesMap ;", id_term(&map.id));
        let _ = write!(
            out,
            "  rml:logicalSource [\n    rml:source _:source{source_index} ;\n    rml:referenceFormulation {} ",
            match map.reference_formulation {
                ReferenceFormulation::JsonPath => "ql:JSONPath",
                ReferenceFormulation::Csv => "ql:CSV",
            }
        );
        if !map.iterator.is_empty() {
            let _ = write!(out, ";\n    rml:iterator {} ", quote(&map.iterator));
        }
        out.push_str("] ;\n");
        let _ = write!(out, "  rr:subjectMap {}", term_map(&map.subject, true));
        for pom in &map.predicate_object_maps {
            let _ = write!(out, " ;\n  rr:predicateObjectMap [\n    rr:predicate <{}> ;\n", pom.predicate.value);
            match &pom.object {
                ObjectMap::Term(term) => {
                    let _ = write!(out, "    rr:objectMap {} ]", term_map(term, false));
                }
                ObjectMap::Join(join) => {
                    let _ = write!(
                        out,
                        "    rr:objectMap [\n      rr:parentTriplesMap {} ;\n      rmls:joinConfig [ rmls:joinType rmls:{} ] ;\n      rmls:windowType rmls:{} ;\n      rr:joinCondition [ rr:child {} ; rr:parent {} ] ] ]",
                        id_term(&join.parent_map_id),
                        join.join_type,
                        join.window_type,
                        quote(&join.child_attr),
                        quote(&join.parent_attr),
                    );
                }
            }
        }
        for f in &map.functions {
            let inputs: Vec<String> = f.params.iter().map(|p| quote(p)).collect();
            let _ = write!(
                out,
                " ;\n  rmls:preMapping [ rmls:functionName {} ;",
                quote(&f.name)
            );
            if !inputs.is_empty() {
                let _ = write!(out, " rmls:input {} ;", inputs.join(", "));
            }
            let _ = write!(out, " rmls:output {} ]", quote(&f.output));
        }
        out.push_str(" .\n\n");
    }
    out
}
