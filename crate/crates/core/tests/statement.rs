use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rio_api::model::{GraphName, Subject, Term};
use rio_api::parser::{QuadsParser, TriplesParser};
use rio_turtle::{NQuadsParser, NTriplesParser, TurtleError};
use siso_core::ingest::{DataItem, SourceId};
use siso_core::mapping::{parse_mapping, MappingPlan};
use siso_core::statement::*;
use siso_core::window::JoinedItem;

const NDW_JOIN: &str = include_str!("../fixtures/ndw_join.ttl");

const SENSOR: &str = r#"
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
<SensorMap> a rr:TriplesMap ;
  rml:logicalSource [
    rml:source "tcp://localhost:9000" ;
    rml:referenceFormulation ql:JSONPath ;
    rml:iterator "$" ] ;
  rr:subjectMap [ rr:template "sensor/{id}" ] ;
  rr:predicateObjectMap [
    rr:predicate <http://example.com/value> ;
    rr:objectMap [ rml:reference "value" ] ] ;
  rr:predicateObjectMap [
    rr:predicate <http://example.com/tag> ;
    rr:objectMap [ rr:template "tag/{tag}" ; rr:termType rr:IRI ] ] .
"#;

fn item(attrs: &[(&str, &str)], t: i64) -> DataItem {
    let attrs: BTreeMap<String, String> = attrs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    DataItem::new(attrs, t, SourceId(0), 0)
}

fn sensor() -> MappingPlan {
    parse_mapping(SENSOR).unwrap()
}

/// Parses `doc` as N-Triples with an independent parser; returns
/// (subject, predicate, object) in their canonical textual form.
fn parse_ntriples(doc: &str) -> Result<Vec<(String, String, String)>, TurtleError> {
    let mut out = Vec::new();
    NTriplesParser::new(doc.as_bytes()).parse_all(&mut |t| {
        out.push((t.subject.to_string(), t.predicate.to_string(), t.object.to_string()));
        Ok(()) as Result<(), TurtleError>
    })?;
    Ok(out)
}

#[test]
fn ndw_join_join_produces_golden_line() {
    let plan = parse_mapping(NDW_JOIN).unwrap();
    let speed = Arc::new(item(&[("speed", "123.0"), ("time", "14:42:00"), ("id", "lane1")], 5));
    let flow = Arc::new(item(&[("flow", "1680"), ("time", "14:42:00"), ("id", "lane1")], 3));
    let joined = JoinedItem {
        child: speed,
        parent: flow,
        key: Arc::from("lane1"),
        emit_time: 7,
    };
    let (stmts, stats) = generate_statements(
        &plan,
        "NDWSpeedMap",
        MappingInput::Joined {
            joined: &joined,
            pom_index: 0,
        },
        DEFAULT_BASE_IRI,
    )
    .unwrap();
    assert_eq!(stats, GenerateStats { generated: 1, skipped: 0 });
    assert_eq!(
        serialize(&stmts[0], OutputFormat::NTriples),
        "<http://example.com/speed=123.0&time=14%3A42%3A00> <http://example.com/laneFlow> \
         <http://example.com/flow=1680&time=14%3A42%3A00> .\n"
    );
    assert_eq!(stmts[0].t, 5);
    assert_eq!(parse_ntriples(&serialize(&stmts[0], OutputFormat::NTriples)).unwrap().len(), 1);
}

#[test]
fn map_without_plain_predicates_emits_nothing() {
    let plan = parse_mapping(NDW_JOIN).unwrap();
    let flow = item(&[("flow", "1680"), ("time", "14:42:00"), ("id", "lane1")], 0);
    let (stmts, stats) =
        generate_statements(&plan, "NDWFlowMap", MappingInput::Item(&flow), DEFAULT_BASE_IRI).unwrap();
    assert!(stmts.is_empty());
    assert_eq!(stats, GenerateStats::default());
}

#[test]
fn two_predicates_give_two_statements() {
    let plan = sensor();
    let it = item(&[("id", "s1"), ("value", "4.5"), ("tag", "a b")], 0);
    let (stmts, stats) = generate_statements(&plan, "SensorMap", MappingInput::Item(&it), DEFAULT_BASE_IRI).unwrap();
    assert_eq!(stats, GenerateStats { generated: 2, skipped: 0 });
    let doc: String = stmts.iter().map(|s| serialize(s, OutputFormat::NTriples)).collect();
    assert_eq!(
        doc,
        "<http://example.com/sensor/s1> <http://example.com/value> \"4.5\" .\n\
         <http://example.com/sensor/s1> <http://example.com/tag> <http://example.com/tag/a%20b> .\n"
    );
}

#[test]
fn missing_attribute_skips_only_that_statement() {
    let plan = sensor();
    let it = item(&[("id", "s1"), ("value", "1")], 0);
    let (stmts, stats) = generate_statements(&plan, "SensorMap", MappingInput::Item(&it), DEFAULT_BASE_IRI).unwrap();
    assert_eq!(stmts.len(), 1);
    assert_eq!(stats, GenerateStats { generated: 1, skipped: 1 });

    let it = item(&[("value", "1"), ("tag", "x")], 0);
    let (stmts, stats) = generate_statements(&plan, "SensorMap", MappingInput::Item(&it), DEFAULT_BASE_IRI).unwrap();
    assert!(stmts.is_empty());
    assert_eq!(stats, GenerateStats { generated: 0, skipped: 2 });
}

#[test]
fn unknown_map_and_non_join_index_are_errors() {
    let plan = sensor();
    let it = item(&[], 0);
    assert_eq!(
        generate_statements(&plan, "Nope", MappingInput::Item(&it), DEFAULT_BASE_IRI).unwrap_err(),
        GenerateError::UnknownMap("Nope".into())
    );
    let joined = JoinedItem {
        child: Arc::new(item(&[], 0)),
        parent: Arc::new(item(&[], 0)),
        key: Arc::from(""),
        emit_time: 0,
    };
    assert_eq!(
        generate_statements(
            &plan,
            "SensorMap",
            MappingInput::Joined { joined: &joined, pom_index: 0 },
            DEFAULT_BASE_IRI
        )
        .unwrap_err(),
        GenerateError::NotAJoin(0)
    );
}

#[test]
fn timestamped_quads_carry_event_time_graph() {
    let plan = sensor();
    let it = item(&[("id", "s1"), ("value", "v"), ("tag", "t")], 1_700_000_000_123);
    let (stmts, _) = generate_statements(&plan, "SensorMap", MappingInput::Item(&it), DEFAULT_BASE_IRI).unwrap();
    let doc: String = stmts.iter().map(|s| serialize(s, OutputFormat::NQuadsTs)).collect();
    let mut graphs = Vec::new();
    NQuadsParser::new(doc.as_bytes())
        .parse_all(&mut |q| {
            match q.graph_name {
                Some(GraphName::NamedNode(n)) => graphs.push(n.iri.to_string()),
                other => panic!("unexpected graph {other:?}"),
            }
            Ok(()) as Result<(), TurtleError>
        })
        .unwrap();
    assert_eq!(graphs, ["urn:ts:1700000000123", "urn:ts:1700000000123"]);
}

proptest! {
    #[test]
    fn every_line_parses_and_counts_reconcile(
        id in any::<String>(),
        value in proptest::option::of(any::<String>()),
        tag in proptest::option::of(any::<String>()),
        t in 0i64..4_000_000_000_000,
    ) {
        let plan = sensor();
        let mut attrs = vec![("id", id.as_str())];
        if let Some(v) = &value { attrs.push(("value", v)); }
        if let Some(v) = &tag { attrs.push(("tag", v)); }
        let it = item(&attrs, t);
        let generator = StatementGenerator::new(&plan, DEFAULT_BASE_IRI).unwrap();
        let mut stmts = Vec::new();
        let stats = generator.for_item(0, &it, &mut stmts);
        prop_assert_eq!(stats.generated + stats.skipped, 2);
        prop_assert_eq!(stats.generated, stmts.len());
        prop_assert_eq!(stats.skipped, value.is_none() as usize + tag.is_none() as usize);

        let mut doc = String::new();
        for s in &stmts {
            serialize_into(s, OutputFormat::NTriples, &mut doc);
        }
        prop_assert_eq!(doc.matches('\n').count(), stmts.len());
        let parsed = parse_ntriples(&doc).map_err(|e| TestCaseError::fail(format!("{e}: {doc}")))?;
        prop_assert_eq!(parsed.len(), stmts.len());
        let mut check = Vec::new();
        NTriplesParser::new(doc.as_bytes()).parse_all(&mut |tr| {
            let subject = match tr.subject { Subject::NamedNode(n) => n.iri.to_string(), _ => String::new() };
            let object = match tr.object {
                Term::Literal(rio_api::model::Literal::Simple { value }) => Some(value.to_string()),
                _ => None,
            };
            check.push((subject, object));
            Ok(()) as Result<(), TurtleError>
        }).unwrap();
        for (subject, object) in check {
            prop_assert!(subject.starts_with("http://example.com/sensor/"));
            if let Some(lit) = object {
                // Literal escaping must round-trip through an independent parser.
                prop_assert_eq!(Some(lit), value.clone());
            }
        }

        // Same input, same bytes.
        let mut again = Vec::new();
        generator.for_item(0, &it, &mut again);
        let mut doc2 = String::new();
        for s in &again {
            serialize_into(s, OutputFormat::NTriples, &mut doc2);
        }
        prop_assert_eq!(doc, doc2);
    }

    #[test]
    fn safe_encoding_leaves_no_reserved_bytes(value in any::<String>()) {
        let encoded = iri_safe(&value);
        let iri = format!("http://example.com/{encoded}");
        prop_assert!(is_valid_iri(&iri));
        prop_assert!(!encoded.contains(['/', '?', '#', '&', '=', ':', ' ']));
    }
}
