use std::io::Write;
use std::net::TcpListener;
use std::num::NonZeroUsize;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::thread;

use proptest::prelude::*;
use rand::distr::Alphanumeric;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use siso_core::ingest::*;
use siso_core::mapping::ContentType;
use siso_core::{Endpoint, SourceError};

fn stop() -> Arc<AtomicBool> {
    Arc::new(AtomicBool::new(false))
}

fn record(payload: &[u8], seq: u64) -> RawRecord {
    RawRecord {
        payload: payload.to_vec(),
        arrival_time: 1_000,
        source_id: SourceId(0),
        sequence_no: seq,
    }
}

#[test]
fn tcp_source_yields_lines_in_order() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn(move || {
        let (mut conn, _) = listener.accept().unwrap();
        conn.write_all(b"{\"n\":1}\n{\"n\":2}\n{\"n\":3}\n").unwrap();
    });
    let endpoint: Endpoint = format!("tcp://{addr}").parse().unwrap();
    let records: Vec<RawRecord> = open_source(&endpoint, SourceId(1), stop())
        .unwrap()
        .map(Result::unwrap)
        .collect();
    server.join().unwrap();
    let payloads: Vec<&[u8]> = records.iter().map(|r| r.payload.as_slice()).collect();
    assert_eq!(payloads, [&b"{\"n\":1}"[..], b"{\"n\":2}", b"{\"n\":3}"]);
    assert!(records.windows(2).all(|w| w[0].sequence_no < w[1].sequence_no));
    assert!(records.windows(2).all(|w| w[0].arrival_time <= w[1].arrival_time));
}

#[test]
fn file_source_with_68000_rows() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    {
        let mut w = std::io::BufWriter::new(file.as_file_mut());
        for i in 0..68_000 {
            writeln!(w, "{{\"speed\":{}.0,\"time\":\"14:42:00\",\"id\":\"lane{}\"}}", i % 130, i % 7).unwrap();
        }
    }
    let endpoint = Endpoint::File(file.path().to_path_buf());
    let count = open_source(&endpoint, SourceId(0), stop()).unwrap().map(Result::unwrap).count();
    assert_eq!(count, 68_000);
}

#[test]
fn ws_source_ends_cleanly_when_server_closes_mid_stream() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn(move || {
        let (conn, _) = listener.accept().unwrap();
        let mut ws = tungstenite::accept(conn).unwrap();
        for i in 0..5 {
            ws.send(tungstenite::Message::text(format!("{{\"n\":{i}}}"))).unwrap();
        }
        ws.flush().unwrap();
        // Drop the connection without a close handshake.
    });
    let endpoint: Endpoint = format!("ws://{addr}/").parse().unwrap();
    let stream = open_source(&endpoint, SourceId(0), stop()).unwrap();
    let records: Vec<RawRecord> = stream.map(Result::unwrap).collect();
    server.join().unwrap();
    assert_eq!(records.len(), 5);
    assert_eq!(records[4].payload, b"{\"n\":4}");
}

#[test]
fn ws_source_honours_close_frame() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = thread::spawn(move || {
        let (conn, _) = listener.accept().unwrap();
        let mut ws = tungstenite::accept(conn).unwrap();
        ws.send(tungstenite::Message::text("a")).unwrap();
        ws.send(tungstenite::Message::binary(b"b".to_vec())).unwrap();
        ws.close(None).unwrap();
        while ws.read().is_ok() {}
    });
    let endpoint: Endpoint = format!("ws://{addr}/").parse().unwrap();
    let payloads: Vec<Vec<u8>> = open_source(&endpoint, SourceId(0), stop())
        .unwrap()
        .map(|r| r.unwrap().payload)
        .collect();
    server.join().unwrap();
    assert_eq!(payloads, vec![b"a".to_vec(), b"b".to_vec()]);
}

#[test]
fn refused_and_unsupported_endpoints() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let endpoint: Endpoint = format!("ws://{addr}/").parse().unwrap();
    assert!(matches!(
        open_source(&endpoint, SourceId(0), stop()),
        Err(SourceError::Connect { .. })
    ));
    assert!(matches!("kafka://b:1".parse::<Endpoint>(), Err(SourceError::UnsupportedScheme(_))));
}

#[test]
fn ndw_join_record_is_one_item() {
    let path = JsonPath::parse("$").unwrap();
    let batch = generate_items(
        &record(br#"{"speed":123.0,"time":"14:42:00","id":"lane1"}"#, 0),
        Formulation::Json(&path),
        &TimePolicy::arrival(),
    )
    .unwrap();
    assert_eq!(batch.items.len(), 1);
    let expected: Vec<(&str, &str)> = vec![("id", "lane1"), ("speed", "123.0"), ("time", "14:42:00")];
    let got: Vec<(&str, &str)> = batch.items[0]
        .attributes()
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn list_iterator_splits_sub_records() {
    let path = JsonPath::parse("$.list[*]").unwrap();
    let batch = generate_items(
        &record(br#"{"list":[{"a":1},{"a":2}]}"#, 3),
        Formulation::Json(&path),
        &TimePolicy::arrival(),
    )
    .unwrap();
    assert_eq!(batch.items.len(), 2);
    assert_eq!(batch.items[0].get("a"), Some("1"));
    assert_eq!(batch.items[1].get("a"), Some("2"));
    assert!(batch.items[0].sequence_no() < batch.items[1].sequence_no());
}

#[test]
fn malformed_json_is_a_decode_error_and_no_match_is_not() {
    let path = JsonPath::root();
    assert!(matches!(
        generate_items(&record(b"not json", 0), Formulation::Json(&path), &TimePolicy::arrival()),
        Err(DecodeError::Json(_))
    ));
    let path = JsonPath::parse("$.missing[*]").unwrap();
    let batch = generate_items(&record(b"{\"a\":1}", 0), Formulation::Json(&path), &TimePolicy::arrival()).unwrap();
    assert!(batch.items.is_empty());
}

#[test]
fn csv_uses_first_record_as_header() {
    let mut gen = ItemGenerator::new(ContentType::Csv, JsonPath::root(), TimePolicy::arrival());
    assert_eq!(gen.process(&record(b"id,flow,time", 0)), GenerateOutcome::Header);
    match gen.process(&record(b"lane1,1680,14:42:00", 1)) {
        GenerateOutcome::Items(batch) => {
            assert_eq!(batch.items.len(), 1);
            assert_eq!(batch.items[0].get("flow"), Some("1680"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        gen.process(&record(b"lane1,1680", 2)),
        GenerateOutcome::Failed(DecodeError::FieldCount { expected: 3, found: 2 })
    ));
}

#[test]
fn field_time_fallback_is_counted() {
    let path = JsonPath::root();
    let policy = TimePolicy::field("ts", FieldFormat::EpochMs);
    let batch = generate_items(&record(br#"{"ts":1700000000123}"#, 0), Formulation::Json(&path), &policy).unwrap();
    assert_eq!(batch.items[0].t(), 1_700_000_000_123);
    assert_eq!(batch.time_fallbacks, 0);
    let batch = generate_items(&record(br#"{"id":"x"}"#, 0), Formulation::Json(&path), &policy).unwrap();
    assert_eq!(batch.items[0].t(), 1_000);
    assert_eq!(batch.time_fallbacks, 1);
}

#[test]
fn partition_is_deterministic() {
    let p4 = NonZeroUsize::new(4).unwrap();
    let first = partition_for_key("lane1", p4);
    for _ in 0..100 {
        assert_eq!(partition_for_key("lane1", p4), first);
    }
    for key in ["", "lane1", "lane2", "x"] {
        assert_eq!(partition_for_key(key, NonZeroUsize::MIN), 0);
    }
}

#[test]
fn random_keys_spread_evenly() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let p4 = NonZeroUsize::new(4).unwrap();
    let mut counts = [0usize; 4];
    for _ in 0..10_000 {
        let len = rng.random_range(1..16);
        let key: String = (&mut rng).sample_iter(&Alphanumeric).take(len).map(char::from).collect();
        counts[partition_for_key(&key, p4)] += 1;
    }
    for c in counts {
        assert!((2125..=2875).contains(&c), "{counts:?}");
    }
}

#[test]
fn lane_keys_spread_evenly() {
    let p4 = NonZeroUsize::new(4).unwrap();
    let mut counts = [0usize; 4];
    for i in 0..10_000 {
        counts[partition_for_key(&format!("lane{i}"), p4)] += 1;
    }
    for c in counts {
        assert!((2125..=2875).contains(&c), "{counts:?}");
    }
}

#[test]
fn partitioner_dead_letters_missing_keys_and_round_robins() {
    let p3 = NonZeroUsize::new(3).unwrap();
    let item = DataItem::new(Default::default(), 1, SourceId(0), 0);
    assert_eq!(Partitioner::new(Some("id".into()), p3).partition(&item), Route::DeadLetter);
    let mut rr = Partitioner::new(None, p3);
    let routes: Vec<Route> = (0..6).map(|_| rr.partition(&item)).collect();
    let expected: Vec<Route> = [0, 1, 2, 0, 1, 2].into_iter().map(Route::Partition).collect();
    assert_eq!(routes, expected);
}

/// Independent count of iterator matches for `$` and `$.list[*]`.
fn oracle_matches(payload: &[u8], list: bool) -> Option<usize> {
    let doc: Value = serde_json::from_slice(payload).ok()?;
    Some(if list {
        doc.get("list").and_then(Value::as_array).map_or(0, Vec::len)
    } else {
        1
    })
}

fn json_record() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        prop::collection::vec(any::<u8>(), 0..64),
        prop::collection::vec(
            prop_oneof![
                any::<i64>().prop_map(|n| n.to_string()),
                "[a-z]{0,5}".prop_map(|s| format!("\"{s}\"")),
                Just("null".to_string()),
                Just("{\"a\":[1,{\"b\":2}]}".to_string()),
            ],
            0..5
        )
        .prop_map(|xs| format!("{{\"list\":[{}],\"id\":\"k\"}}", xs.join(",")).into_bytes()),
        "[{}\\[\\]\",:a-z0-9 ]{0,24}".prop_map(String::into_bytes),
    ]
}

proptest! {
    #[test]
    fn generate_items_never_panics_and_counts_match(records in prop::collection::vec(json_record(), 1..20), list in any::<bool>()) {
        let path = JsonPath::parse(if list { "$.list[*]" } else { "$" }).unwrap();
        let mut total = 0;
        let mut expected = 0;
        let mut last_seq = None;
        for (i, payload) in records.iter().enumerate() {
            let result = generate_items(&record(payload, i as u64), Formulation::Json(&path), &TimePolicy::arrival());
            match (result, oracle_matches(payload, list)) {
                (Ok(batch), Some(n)) => {
                    prop_assert_eq!(batch.items.len(), n);
                    for item in &batch.items {
                        if let Some(prev) = last_seq {
                            prop_assert!(item.sequence_no() > prev);
                        }
                        last_seq = Some(item.sequence_no());
                    }
                    total += batch.items.len();
                    expected += n;
                }
                (Err(_), None) => {}
                (got, oracle) => prop_assert!(false, "decoder {:?} vs oracle {:?}", got, oracle),
            }
        }
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn csv_decoder_never_panics(header in "[a-z,\"]{0,12}", rows in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..32), 0..10)) {
        let mut gen = ItemGenerator::new(ContentType::Csv, JsonPath::root(), TimePolicy::arrival());
        let _ = gen.process(&record(header.as_bytes(), 0));
        for (i, row) in rows.iter().enumerate() {
            if let GenerateOutcome::Items(batch) = gen.process(&record(row, i as u64 + 1)) {
                prop_assert!(batch.items.len() <= 1);
            }
        }
    }

    #[test]
    fn partition_is_pure_and_in_range(key in ".{0,20}", n in 1usize..64) {
        let n = NonZeroUsize::new(n).unwrap();
        let p = partition_for_key(&key, n);
        prop_assert!(p < n.get());
        prop_assert_eq!(p, partition_for_key(&key.clone(), n));
    }
}
