//! Black-box output monitor: reads the engine's timestamped N-Quads and
//! turns each line into a latency sample.

use std::io::{self, BufRead, BufReader};
use std::net::{TcpListener, TcpStream};
use std::time::{Duration, Instant};

use crate::now_ms;

pub const TS_GRAPH_PREFIX: &str = "<urn:ts:";

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct MetricSample {
    /// The statement's subject term.
    pub key: String,
    pub creation_ms: i64,
    pub emission_ms: i64,
}

impl MetricSample {
    pub fn latency_ms(&self) -> i64 {
        self.emission_ms - self.creation_ms
    }
}

/// Subject term and creation time of one output line, or `None` when the
/// line is not a statement ending in a `<urn:ts:N>` graph term.
pub fn parse_line(line: &str) -> Option<(&str, i64)> {
    let body = line.trim_end_matches(['\n', '\r']).strip_suffix(" .")?;
    let at = body.rfind(TS_GRAPH_PREFIX)?;
    let digits = body[at + TS_GRAPH_PREFIX.len()..].strip_suffix('>')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let creation = digits.parse().ok()?;
    let subject_end = body.find(' ')?;
    if subject_end >= at {
        return None;
    }
    Some((&body[..subject_end], creation))
}

/// Collected samples plus the count of lines that did not parse.
#[derive(Debug, Default, Clone)]
pub struct Monitor {
    pub samples: Vec<MetricSample>,
    pub dropped: u64,
}

impl Monitor {
    /// Record one line observed at `emission_ms`. Lines whose creation time
    /// lies after the observation are counted as dropped.
    pub fn observe(&mut self, line: &str, emission_ms: i64) {
        match parse_line(line) {
            Some((key, creation_ms)) if creation_ms <= emission_ms => self.samples.push(MetricSample {
                key: key.to_string(),
                creation_ms,
                emission_ms,
            }),
            _ => self.dropped += 1,
        }
    }

    /// Read lines until end of stream or until `limit` has elapsed, stamping
    /// each with the wall clock as it is read.
    pub fn read_from<R: BufRead>(&mut self, mut reader: R, limit: Option<Duration>) -> io::Result<()> {
        let started = Instant::now();
        let mut line = Vec::new();
        loop {
            match reader.read_until(b'\n', &mut line) {
                Ok(0) => {
                    if !line.is_empty() {
                        self.observe(&String::from_utf8_lossy(&line), now_ms());
                    }
                    return Ok(());
                }
                Ok(_) if line.ends_with(b"\n") => {
                    self.observe(&String::from_utf8_lossy(&line), now_ms());
                    line.clear();
                }
                Ok(_) => {}
                Err(e)
                    if matches!(
                        e.kind(),
                        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut | io::ErrorKind::Interrupted
                    ) => {}
                Err(e) => return Err(e),
            }
            if limit.is_some_and(|l| started.elapsed() >= l) {
                return Ok(());
            }
        }
    }

    /// Accept one engine connection on `listener` and read it to the end.
    pub fn serve(&mut self, listener: &TcpListener, limit: Option<Duration>) -> io::Result<()> {
        let (stream, _) = listener.accept()?;
        self.read_stream(stream, limit)
    }

    fn read_stream(&mut self, stream: TcpStream, limit: Option<Duration>) -> io::Result<()> {
        if limit.is_some() {
            stream.set_read_timeout(Some(Duration::from_millis(200)))?;
        }
        self.read_from(BufReader::with_capacity(1 << 16, stream), limit)
    }

    /// Raw samples as `key,creation_ms,emission_ms` CSV.
    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["key", "creation_ms", "emission_ms"])?;
        for s in &self.samples {
            writer.write_record([s.key.as_str(), &s.creation_ms.to_string(), &s.emission_ms.to_string()])?;
        }
        writer.flush()
    }
}
