//! Paced workload server. Each endpoint is a listening socket the engine
//! connects to; once every endpoint has a client, all senders start on a
//! shared clock.

use std::io::{self, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use tungstenite::{Message, WebSocket};

use crate::dataset::{self, DatasetError, OpenRecord};
use crate::now_ms;
use crate::profile::{ProfileError, Schedule, WorkloadProfile};

/// Bytes buffered before a write is forced even when the sender is behind.
const FLUSH_BYTES: usize = 64 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("endpoint `{0}`: expected tcp://host:port or ws://host:port[/path]")]
    Endpoint(String),
    #[error("{endpoint}: {source}")]
    Bind { endpoint: String, source: io::Error },
    #[error("{0}: no client connected before the accept timeout")]
    AcceptTimeout(String),
    #[error("{endpoint}: websocket handshake failed: {message}")]
    Handshake { endpoint: String, message: String },
    #[error("{endpoint}: {source}")]
    Send { endpoint: String, source: io::Error },
    #[error("{0} datasets for {1} endpoints")]
    Mismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Tcp,
    Ws,
}

/// A bound but not yet connected endpoint.
#[derive(Debug)]
pub struct Listener {
    spec: String,
    protocol: Protocol,
    listener: TcpListener,
}

impl Listener {
    pub fn bind(spec: &str) -> Result<Self, StreamError> {
        let (protocol, rest) = if let Some(rest) = spec.strip_prefix("tcp://") {
            (Protocol::Tcp, rest)
        } else if let Some(rest) = spec.strip_prefix("ws://") {
            (Protocol::Ws, rest)
        } else {
            return Err(StreamError::Endpoint(spec.to_string()));
        };
        let authority = rest.split('/').next().unwrap_or_default();
        if authority.is_empty() {
            return Err(StreamError::Endpoint(spec.to_string()));
        }
        let listener = TcpListener::bind(authority).map_err(|source| StreamError::Bind {
            endpoint: spec.to_string(),
            source,
        })?;
        Ok(Self {
            spec: spec.to_string(),
            protocol,
            listener,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// The endpoint URL with the bound port, for clients.
    pub fn url(&self) -> String {
        let scheme = match self.protocol {
            Protocol::Tcp => "tcp",
            Protocol::Ws => "ws",
        };
        match self.local_addr() {
            Ok(addr) => format!("{scheme}://{addr}"),
            Err(_) => self.spec.clone(),
        }
    }

    fn accept(&self, deadline: Instant) -> Result<Connection, StreamError> {
        let send_err = |source| StreamError::Send {
            endpoint: self.spec.clone(),
            source,
        };
        self.listener.set_nonblocking(true).map_err(send_err)?;
        let stream = loop {
            match self.listener.accept() {
                Ok((stream, _)) => break stream,
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        return Err(StreamError::AcceptTimeout(self.spec.clone()));
                    }
                    thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(send_err(e)),
            }
        };
        stream.set_nonblocking(false).map_err(send_err)?;
        let _ = stream.set_nodelay(true);
        let inner = match self.protocol {
            Protocol::Tcp => Sink::Tcp(BufWriter::with_capacity(2 * FLUSH_BYTES, stream)),
            Protocol::Ws => {
                let ws = tungstenite::accept(stream).map_err(|e| StreamError::Handshake {
                    endpoint: self.spec.clone(),
                    message: e.to_string(),
                })?;
                Sink::Ws(Box::new(ws))
            }
        };
        Ok(Connection {
            endpoint: self.spec.clone(),
            inner,
            line: String::new(),
            pending: 0,
        })
    }
}

enum Sink {
    Tcp(BufWriter<TcpStream>),
    Ws(Box<WebSocket<TcpStream>>),
}

struct Connection {
    endpoint: String,
    inner: Sink,
    line: String,
    pending: usize,
}

impl Connection {
    fn send(&mut self, record: &OpenRecord, seq: u64, ts: i64) -> io::Result<()> {
        self.line.clear();
        record.write_stamped(seq, ts, &mut self.line);
        self.pending += self.line.len();
        match &mut self.inner {
            Sink::Tcp(w) => w.write_all(self.line.as_bytes())?,
            Sink::Ws(ws) => ws
                .write(Message::text(self.line.trim_end_matches('\n')))
                .map_err(ws_io)?,
        }
        if self.pending >= FLUSH_BYTES {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> io::Result<()> {
        self.pending = 0;
        match &mut self.inner {
            Sink::Tcp(w) => w.flush(),
            Sink::Ws(ws) => ws.flush().map_err(ws_io),
        }
    }

    fn close(mut self) -> io::Result<()> {
        self.flush()?;
        match self.inner {
            Sink::Tcp(w) => {
                let stream = w.into_inner().map_err(|e| e.into_error())?;
                let _ = stream.shutdown(std::net::Shutdown::Write);
                // Wait for the reader to hang up so nothing in flight is reset.
                let _ = stream.set_read_timeout(Some(Duration::from_secs(5)));
                let mut sink = [0u8; 256];
                let mut stream = stream;
                while matches!(stream.read(&mut sink), Ok(n) if n > 0) {}
                Ok(())
            }
            Sink::Ws(mut ws) => {
                let _ = ws.close(None);
                let _ = ws.get_mut().set_read_timeout(Some(Duration::from_secs(5)));
                // Drive the close handshake until the peer answers.
                while ws.read().is_ok() {}
                Ok(())
            }
        }
    }
}

fn ws_io(e: tungstenite::Error) -> io::Error {
    match e {
        tungstenite::Error::Io(e) => e,
        other => io::Error::other(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EndpointStats {
    pub endpoint: String,
    pub sent: u64,
    /// Latest a record went out after its scheduled time.
    pub max_lag_ms: f64,
    /// From the shared start to the last record handed to the socket.
    pub send_ms: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StreamStats {
    pub endpoints: Vec<EndpointStats>,
    pub sent: u64,
    pub target_rate: f64,
    /// Records sent divided by the longer of the scheduled and the actual
    /// sending time.
    pub achieved_rate: f64,
    pub send_ms: f64,
}

fn sleep_until(due: Instant) {
    loop {
        let now = Instant::now();
        if now >= due {
            return;
        }
        let left = due - now;
        if left > Duration::from_millis(2) {
            thread::sleep(left - Duration::from_millis(1));
        } else {
            thread::yield_now();
        }
    }
}

fn send_all(
    mut conn: Connection,
    records: &[OpenRecord],
    schedule: Schedule,
    start: Instant,
) -> Result<EndpointStats, StreamError> {
    let err = |endpoint: &str, source| StreamError::Send {
        endpoint: endpoint.to_string(),
        source,
    };
    let mut sent = 0u64;
    let mut max_lag = Duration::ZERO;
    for offset in schedule {
        let due = start + offset;
        let now = Instant::now();
        if due > now {
            conn.flush().map_err(|e| err(&conn.endpoint, e))?;
            sleep_until(due);
        } else {
            max_lag = max_lag.max(now - due);
        }
        let record = &records[(sent % records.len() as u64) as usize];
        conn.send(record, sent, now_ms())
            .map_err(|e| err(&conn.endpoint, e))?;
        sent += 1;
    }
    conn.flush().map_err(|e| err(&conn.endpoint, e))?;
    let send_ms = start.elapsed().as_secs_f64() * 1000.0;
    let endpoint = conn.endpoint.clone();
    conn.close().map_err(|e| err(&endpoint, e))?;
    Ok(EndpointStats {
        endpoint,
        sent,
        max_lag_ms: max_lag.as_secs_f64() * 1000.0,
        send_ms,
    })
}

/// Wait for a client on every listener, then stream `profile` with one
/// sender thread per endpoint. Endpoint `i` replays dataset `i` (flow, then
/// speed), looping it when exhausted.
pub fn stream_workload(
    profile: &WorkloadProfile,
    listeners: &[Listener],
    accept_timeout: Duration,
) -> Result<StreamStats, StreamError> {
    profile.validate()?;
    let datasets: Vec<PathBuf> = profile.datasets();
    if datasets.len() < listeners.len() || listeners.is_empty() {
        return Err(StreamError::Mismatch(datasets.len(), listeners.len()));
    }
    let records: Vec<Arc<Vec<OpenRecord>>> = datasets[..listeners.len()]
        .iter()
        .map(|p| dataset::load(p).map(Arc::new))
        .collect::<Result<_, _>>()?;

    // Clients may connect in any order and block in their handshake, so
    // every endpoint accepts at once.
    let deadline = Instant::now() + accept_timeout;
    let connections = thread::scope(|scope| {
        let pending: Vec<_> = listeners
            .iter()
            .map(|l| scope.spawn(move || l.accept(deadline)))
            .collect();
        pending
            .into_iter()
            .map(|h| h.join().expect("accept thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let start = Instant::now();
    let n = connections.len();
    let handles: Vec<_> = connections
        .into_iter()
        .enumerate()
        .map(|(i, conn)| {
            let records = records[i].clone();
            let schedule = profile.schedule(i, n);
            thread::spawn(move || send_all(conn, &records, schedule, start))
        })
        .collect();
    let mut endpoints = Vec::with_capacity(n);
    for handle in handles {
        endpoints.push(handle.join().expect("sender thread panicked")?);
    }
    let send_ms = endpoints.iter().map(|e| e.send_ms).fold(0.0, f64::max);
    let sent: u64 = endpoints.iter().map(|e| e.sent).sum();
    let span = (send_ms / 1000.0).max(profile.duration.as_secs_f64());
    let target_rate = (0..n).map(|i| profile.schedule(i, n).total()).sum::<u64>() as f64
        / profile.duration.as_secs_f64();
    Ok(StreamStats {
        endpoints,
        sent,
        target_rate,
        achieved_rate: sent as f64 / span,
        send_ms,
    })
}
