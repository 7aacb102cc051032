use std::fs::File;
use std::io::{self, BufRead, BufReader, ErrorKind, Read};
use std::net::TcpStream;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

use super::item::{RawRecord, SourceId};
use crate::clock::now_ms;
use crate::endpoint::Endpoint;
use crate::error::SourceError;

const POLL_INTERVAL: Duration = Duration::from_millis(100);

/// A stream of framed records. Ends when the source closes or `stop` is set.
pub struct RecordStream {
    inner: Inner,
    source_id: SourceId,
    next_seq: u64,
    stop: Arc<AtomicBool>,
    line: Vec<u8>,
}

enum Inner {
    Lines(Box<dyn BufRead + Send>),
    Ws(Box<WebSocket<MaybeTlsStream<TcpStream>>>),
    Done,
}

/// Connect to an endpoint and return its record stream. Reconnection is not
/// attempted: a closed source ends its stream.
pub fn open_source(
    endpoint: &Endpoint,
    source_id: SourceId,
    stop: Arc<AtomicBool>,
) -> Result<RecordStream, SourceError> {
    let inner = match endpoint {
        Endpoint::Tcp(addr) => {
            let stream = TcpStream::connect(addr).map_err(|source| SourceError::Connect {
                endpoint: endpoint.to_string(),
                source,
            })?;
            stream.set_read_timeout(Some(POLL_INTERVAL))?;
            Inner::Lines(Box::new(BufReader::with_capacity(1 << 16, stream)))
        }
        Endpoint::Ws(url) => {
            let authority = url
                .split_once("://")
                .map_or(url.as_str(), |(_, rest)| rest)
                .split('/')
                .next()
                .unwrap_or_default();
            let stream = TcpStream::connect(authority).map_err(|source| SourceError::Connect {
                endpoint: url.clone(),
                source,
            })?;
            let (socket, _) = tungstenite::client(url.as_str(), MaybeTlsStream::Plain(stream)).map_err(|e| {
                SourceError::Handshake {
                    endpoint: url.clone(),
                    message: e.to_string(),
                }
            })?;
            if let MaybeTlsStream::Plain(stream) = socket.get_ref() {
                stream.set_read_timeout(Some(POLL_INTERVAL))?;
            }
            Inner::Ws(Box::new(socket))
        }
        Endpoint::File(path) => {
            let file = File::open(path).map_err(|source| SourceError::Connect {
                endpoint: endpoint.to_string(),
                source,
            })?;
            Inner::Lines(Box::new(BufReader::with_capacity(1 << 16, file)))
        }
        Endpoint::Stdio => Inner::Lines(Box::new(BufReader::new(io::stdin()))),
    };
    Ok(RecordStream {
        inner,
        source_id,
        next_seq: 0,
        stop,
        line: Vec::new(),
    })
}

impl RecordStream {
    /// Records from any line-oriented reader; used for replay and tests.
    pub fn from_reader(reader: impl Read + Send + 'static, source_id: SourceId, stop: Arc<AtomicBool>) -> Self {
        Self {
            inner: Inner::Lines(Box::new(BufReader::new(reader))),
            source_id,
            next_seq: 0,
            stop,
            line: Vec::new(),
        }
    }

    fn record(&mut self, payload: Vec<u8>) -> RawRecord {
        let seq = self.next_seq;
        self.next_seq += 1;
        RawRecord {
            payload,
            arrival_time: now_ms(),
            source_id: self.source_id,
            sequence_no: seq,
        }
    }

    fn next_payload(&mut self) -> io::Result<Option<Vec<u8>>> {
        loop {
            if self.stop.load(Ordering::Relaxed) {
                self.inner = Inner::Done;
            }
            match &mut self.inner {
                Inner::Done => return Ok(None),
                Inner::Lines(reader) => match reader.read_until(b'\n', &mut self.line) {
                    Ok(0) => {
                        self.inner = Inner::Done;
                        // A final unterminated line is still a record.
                        if self.line.is_empty() {
                            return Ok(None);
                        }
                        return Ok(Some(std::mem::take(&mut self.line)));
                    }
                    Ok(_) => {
                        if self.line.last() != Some(&b'\n') {
                            continue;
                        }
                        self.line.pop();
                        if self.line.last() == Some(&b'\r') {
                            self.line.pop();
                        }
                        if self.line.is_empty() {
                            continue;
                        }
                        return Ok(Some(std::mem::take(&mut self.line)));
                    }
                    Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted) => {
                        continue
                    }
                    Err(e) => {
                        self.inner = Inner::Done;
                        return Err(e);
                    }
                },
                Inner::Ws(socket) => match socket.read() {
                    Ok(Message::Text(text)) => return Ok(Some(text.as_bytes().to_vec())),
                    Ok(Message::Binary(bytes)) => return Ok(Some(bytes.to_vec())),
                    Ok(Message::Close(_)) => {
                        self.inner = Inner::Done;
                        return Ok(None);
                    }
                    Ok(_) => continue,
                    Err(tungstenite::Error::Io(e))
                        if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) =>
                    {
                        continue
                    }
                    Err(tungstenite::Error::ConnectionClosed)
                    | Err(tungstenite::Error::AlreadyClosed)
                    | Err(tungstenite::Error::Protocol(_)) => {
                        self.inner = Inner::Done;
                        return Ok(None);
                    }
                    Err(e) => {
                        self.inner = Inner::Done;
                        return Err(io::Error::other(e));
                    }
                },
            }
        }
    }
}

impl Iterator for RecordStream {
    type Item = io::Result<RawRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.next_payload() {
            Ok(Some(payload)) => Some(Ok(self.record(payload))),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stop() -> Arc<AtomicBool> {
        Arc::new(AtomicBool::new(false))
    }

    #[test]
    fn frames_lines_and_numbers_them() {
        let data = b"a\r\nb\n\nc".to_vec();
        let records: Vec<RawRecord> = RecordStream::from_reader(io::Cursor::new(data), SourceId(7), stop())
            .map(Result::unwrap)
            .collect();
        let payloads: Vec<&[u8]> = records.iter().map(|r| r.payload.as_slice()).collect();
        assert_eq!(payloads, vec![&b"a"[..], b"b", b"c"]);
        assert_eq!(records.iter().map(|r| r.sequence_no).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(records.iter().all(|r| r.source_id == SourceId(7)));
    }

    #[test]
    fn stop_flag_ends_stream() {
        let flag = stop();
        let mut stream = RecordStream::from_reader(io::Cursor::new(b"a\nb\n".to_vec()), SourceId(0), flag.clone());
        assert!(stream.next().is_some());
        flag.store(true, Ordering::Relaxed);
        assert!(stream.next().is_none());
    }

    #[test]
    fn refused_tcp_connection_is_an_error() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let err = open_source(&Endpoint::Tcp(addr.to_string()), SourceId(0), stop());
        assert!(matches!(err, Err(SourceError::Connect { .. })));
    }
}
