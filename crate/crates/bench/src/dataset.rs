//! Workload datasets: NDW-style flow and speed measurements as newline
//! delimited JSON or CSV.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Record { path: String, line: usize, message: String },
    #[error("{0}: no records")]
    Empty(String),
}

/// A JSON object record with its closing brace removed, so a send-time
/// stamp can be appended without re-serializing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenRecord {
    prefix: String,
}

impl OpenRecord {
    /// Any existing `seq` or `ts` field is replaced by the stamp.
    pub fn new(object: &Map<String, Value>) -> Self {
        let mut object = object.clone();
        object.remove("seq");
        object.remove("ts");
        let empty = object.is_empty();
        let mut prefix = Value::Object(object).to_string();
        prefix.pop();
        if !empty {
            prefix.push(',');
        }
        Self { prefix }
    }

    /// The record with `"seq"` and `"ts"` appended, newline-terminated.
    pub fn write_stamped(&self, seq: u64, ts: i64, out: &mut String) {
        use std::fmt::Write as _;
        out.push_str(&self.prefix);
        let _ = writeln!(out, "\"seq\":{seq},\"ts\":{ts}}}");
    }
}

/// Load a dataset. Files ending in `.csv` are read with their header and
/// numeric-looking fields become JSON numbers; anything else is read as one
/// JSON object per line.
pub fn load(path: &Path) -> Result<Vec<OpenRecord>, DatasetError> {
    let name = path.display().to_string();
    let io_err = |source| DatasetError::Io {
        path: name.clone(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut reader = csv::Reader::from_reader(file);
        let headers = reader
            .headers()
            .map_err(|e| DatasetError::Record {
                path: name.clone(),
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| DatasetError::Record {
                path: name.clone(),
                line: i + 2,
                message: e.to_string(),
            })?;
            let object: Map<String, Value> = headers
                .iter()
                .zip(row.iter())
                .map(|(k, v)| (k.to_string(), csv_value(v)))
                .collect();
            out.push(OpenRecord::new(&object));
        }
    } else {
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Value>(&line) {
                Ok(Value::Object(object)) => out.push(OpenRecord::new(&object)),
                Ok(_) => {
                    return Err(DatasetError::Record {
                        path: name,
                        line: i + 1,
                        message: "not a JSON object".into(),
                    })
                }
                Err(e) => {
                    return Err(DatasetError::Record {
                        path: name,
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
    }
    if out.is_empty() {
        return Err(DatasetError::Empty(name));
    }
    Ok(out)
}

fn csv_value(field: &str) -> Value {
    match serde_json::from_str::<serde_json::Number>(field) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(field.to_string()),
    }
}

/// Shape of a synthetic NDW-like dataset: `lanes` measurement points each
/// reporting once per minute.
#[derive(Debug, Clone, Copy)]
pub struct Synthetic {
    pub rows: usize,
    pub lanes: usize,
    pub seed: u64,
}

impl Default for Synthetic {
    fn default() -> Self {
        Self {
            rows: 68_000,
            lanes: 17_000,
            seed: 7,
        }
    }
}

/// Flow and speed records for the same lanes and minutes, row-aligned.
pub fn synthesize(shape: Synthetic) -> (Vec<Map<String, Value>>, Vec<Map<String, Value>>) {
    let mut rng = StdRng::seed_from_u64(shape.seed);
    let lanes = shape.lanes.max(1);
    let mut flow = Vec::with_capacity(shape.rows);
    let mut speed = Vec::with_capacity(shape.rows);
    for i in 0..shape.rows {
        let lane = i % lanes;
        let minute = (i / lanes) % (24 * 60);
        let time = format!("{:02}:{:02}:00", minute / 60, minute % 60);
        let id = format!("site{}_lane{}", lane / 4, lane % 4 + 1);
        let mut f = Map::new();
        f.insert("flow".into(), Value::from(rng.random_range(0..3000u32)));
        f.insert("time".into(), Value::from(time.clone()));
        f.insert("id".into(), Value::from(id.clone()));
        let mut s = Map::new();
        let kmh = f64::from(rng.random_range(300..1400u32)) / 10.0;
        s.insert("speed".into(), serde_json::Number::from_f64(kmh).map_or(Value::Null, Value::Number));
        s.insert("time".into(), Value::from(time));
        s.insert("id".into(), Value::from(id));
        flow.push(f);
        speed.push(s);
    }
    (flow, speed)
}

/// Write records as CSV when `path` ends in `.csv`, otherwise as one JSON
/// object per line.
pub fn write(path: &Path, records: &[Map<String, Value>]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut writer = csv::Writer::from_writer(out);
        if let Some(first) = records.first() {
            writer.write_record(first.keys())?;
        }
        for record in records {
            writer.write_record(record.values().map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            }))?;
        }
        writer.flush()?;
        return Ok(());
    }
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamped_records_stay_json() {
        let object: Map<String, Value> =
            serde_json::from_str(r#"{"flow":1680,"time":"14:42:00","id":"lane1"}"#).unwrap();
        let mut out = String::new();
        OpenRecord::new(&object).write_stamped(3, 1_700_000_000_000, &mut out);
        assert!(out.ends_with("\n"));
        let back: Value = serde_json::from_str(out.trim_end()).unwrap();
        assert_eq!(back["flow"], 1680);
        assert_eq!(back["seq"], 3);
        assert_eq!(back["ts"], 1_700_000_000_000i64);

        let mut out = String::new();
        OpenRecord::new(&Map::new()).write_stamped(0, 5, &mut out);
        assert_eq!(out, "{\"seq\":0,\"ts\":5}\n");
    }

    #[test]
    fn synthetic_round_trips_through_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let (flow, speed) = synthesize(Synthetic {
            rows: 100,
            lanes: 25,
            seed: 1,
        });
        assert_eq!(flow[0]["id"], speed[0]["id"]);
        assert_eq!(flow[25]["time"], "00:01:00");
        for name in ["f.ndjson", "f.csv"] {
            let path = dir.path().join(name);
            write(&path, &flow).unwrap();
            let loaded = load(&path).unwrap();
            assert_eq!(loaded.len(), 100);
            let mut line = String::new();
            loaded[0].write_stamped(0, 0, &mut line);
            let v: Value = serde_json::from_str(&line).unwrap();
            assert_eq!(v["id"], flow[0]["id"]);
            assert_eq!(v["flow"], flow[0]["flow"]);
        }
        let path = dir.path().join("s.csv");
        write(&path, &speed).unwrap();
        assert!(load(&path).is_ok());
    }

    #[test]
    fn bad_lines_are_reported_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ndjson");
        std::fs::write(&path, "{\"a\":1}\n[1]\n").unwrap();
        assert!(matches!(load(&path), Err(DatasetError::Record { line: 2, .. })));
        std::fs::write(&path, "\n").unwrap();
        assert!(matches!(load(&path), Err(DatasetError::Empty(_))));
    }
}
