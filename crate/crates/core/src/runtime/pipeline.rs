use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, ScopedJoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, Receiver, RecvTimeoutError, Sender, TryRecvError};

use super::combine::{combine, TryNext};
use super::config::RuntimeConfig;
use super::counters::{Counters, RunSummary};
use crate::clock::now_ms;
use crate::endpoint::Endpoint;
use crate::error::RuntimeError;
use crate::ingest::{
    generate_items, open_source, parse_csv_header, partition_for_key, CsvHeader, DataItem, Formulation,
    JsonPath, RawRecord, RecordStream, SourceId,
};
use crate::mapping::{ContentType, ExecutablePlan};
use crate::statement::{serialize_into, RdfStatement, StatementGenerator};
use crate::window::{JoinOperator, Rejected, Side};

const SINK_CONNECT_TIMEOUT: Duration = Duration::from_secs(5);
/// Statements buffered by an operator before it hands a batch downstream
/// even though more input is waiting.
const MAX_BATCH: usize = 512;

/// Serialized statement lines handed to the sink. Batches are written whole,
/// so lines never interleave.
#[derive(Debug, Default)]
struct Batch {
    text: String,
    statements: u64,
}

struct RecordMsg {
    record: RawRecord,
    header: Option<CsvHeader>,
}

type WindowMsg = (Side, Arc<DataItem>);

/// Run the plan until every source closes.
pub fn run_pipeline(plan: &ExecutablePlan, config: &RuntimeConfig) -> Result<RunSummary, RuntimeError> {
    run_pipeline_until(plan, config, Arc::new(AtomicBool::new(false)))
}

/// Run the plan until every source closes or `stop` is set. After `stop`,
/// sources stop reading and in-flight items drain to the sink.
pub fn run_pipeline_until(
    plan: &ExecutablePlan,
    config: &RuntimeConfig,
    stop: Arc<AtomicBool>,
) -> Result<RunSummary, RuntimeError> {
    config.validate()?;
    let started = Instant::now();
    let generator = StatementGenerator::new(&plan.plan, config.base_iri.clone())
        .map_err(|e| RuntimeError::Config(e.to_string()))?;
    let sink = open_sink(&config.output)?;

    let mut streams = Vec::new();
    for (s, spec) in plan.sources.iter().enumerate() {
        if plan.source_maps[s].is_empty() {
            continue;
        }
        let endpoint = match config.source_overrides.get(&spec.target) {
            Some(endpoint) => endpoint.clone(),
            None => spec.endpoint()?,
        };
        streams.push((s, open_source(&endpoint, SourceId(s as u32), stop.clone())?));
    }

    let counters = Counters::default();
    let n = config.parallelism.get();
    let cap = config.queue_capacity;

    let mut window_tx: Vec<Vec<Sender<WindowMsg>>> = Vec::new();
    let mut window_rx: Vec<Vec<Receiver<WindowMsg>>> = Vec::new();
    for _ in &plan.joins {
        let (txs, rxs) = (0..n).map(|_| bounded(cap)).unzip();
        window_tx.push(txs);
        window_rx.push(rxs);
    }
    let mut sink_inputs = Vec::new();

    let outcome = thread::scope(|scope| {
        let mut handles: Vec<(String, ScopedJoinHandle<'_, ()>)> = Vec::new();
        let ctx = Ctx {
            plan,
            config,
            generator: &generator,
            counters: &counters,
            stop: &stop,
        };

        for (j, receivers) in window_rx.drain(..).enumerate() {
            for (i, rx) in receivers.into_iter().enumerate() {
                let (out_tx, out_rx) = bounded(cap);
                sink_inputs.push(out_rx);
                let label = format!("window-{j}-{i}");
                let handle = thread::Builder::new()
                    .name(label.clone())
                    .spawn_scoped(scope, move || ctx.window_loop(j, rx, out_tx))
                    .expect("spawn window");
                handles.push((label, handle));
            }
        }

        for (s, stream) in streams {
            let mut worker_tx = Vec::with_capacity(n);
            for w in 0..n {
                let (tx, rx) = bounded(cap);
                worker_tx.push(tx);
                let (out_tx, out_rx) = bounded(cap);
                sink_inputs.push(out_rx);
                let windows = window_tx.clone();
                let label = format!("itemgen-{s}-{w}");
                let handle = thread::Builder::new()
                    .name(label.clone())
                    .spawn_scoped(scope, move || ctx.worker_loop(s, rx, windows, out_tx))
                    .expect("spawn worker");
                handles.push((label, handle));
            }
            let label = format!("source-{s}");
            let handle = thread::Builder::new()
                .name(label.clone())
                .spawn_scoped(scope, move || ctx.ingest_loop(s, stream, worker_tx))
                .expect("spawn source");
            handles.push((label, handle));
        }
        window_tx.clear();

        let sink_result = write_sink(sink, std::mem::take(&mut sink_inputs), &counters, &stop);

        let mut panicked = None;
        for (label, handle) in handles {
            if handle.join().is_err() && panicked.is_none() {
                panicked = Some(label);
            }
        }
        (sink_result, panicked)
    });

    let summary = counters.snapshot(started.elapsed().as_millis() as u64);
    match outcome {
        (_, Some(label)) => Err(RuntimeError::OperatorPanic(label)),
        (Err(e), None) => Err(RuntimeError::Sink(e)),
        (Ok(()), None) => Ok(summary),
    }
}

fn open_sink(endpoint: &Endpoint) -> Result<Box<dyn Write + Send>, RuntimeError> {
    let unreachable = |source: io::Error| RuntimeError::SinkUnreachable {
        target: endpoint.to_string(),
        source,
    };
    match endpoint {
        Endpoint::Stdio => Ok(Box::new(io::stdout())),
        Endpoint::File(path) => Ok(Box::new(File::create(path).map_err(unreachable)?)),
        Endpoint::Tcp(addr) => {
            let mut last = io::Error::new(io::ErrorKind::NotFound, "address did not resolve");
            for candidate in addr.to_socket_addrs().map_err(unreachable)? {
                match TcpStream::connect_timeout(&candidate, SINK_CONNECT_TIMEOUT) {
                    Ok(stream) => {
                        let _ = stream.set_nodelay(true);
                        return Ok(Box::new(stream));
                    }
                    Err(e) => last = e,
                }
            }
            Err(unreachable(last))
        }
        Endpoint::Ws(_) => Err(RuntimeError::Config("websocket sinks are not supported".into())),
    }
}

/// Single sink writer. After a write failure it keeps draining its inputs so
/// upstream operators can finish, and asks the sources to stop.
fn write_sink(
    sink: Box<dyn Write + Send>,
    inputs: Vec<Receiver<Batch>>,
    counters: &Counters,
    stop: &AtomicBool,
) -> io::Result<()> {
    let mut writer = BufWriter::with_capacity(1 << 16, sink);
    let mut merge = combine(inputs);
    let mut failure: Option<io::Error> = None;
    let fail = |e: io::Error, failure: &mut Option<io::Error>| {
        stop.store(true, Ordering::Relaxed);
        failure.get_or_insert(e);
    };
    loop {
        match merge.try_next() {
            TryNext::Item(batch) => {
                if failure.is_none() {
                    match writer.write_all(batch.text.as_bytes()) {
                        Ok(()) => Counters::add(&counters.statements_out, batch.statements),
                        Err(e) => fail(e, &mut failure),
                    }
                }
            }
            TryNext::Empty => {
                if failure.is_none() {
                    if let Err(e) = writer.flush() {
                        fail(e, &mut failure);
                    }
                }
                merge.wait();
            }
            TryNext::Done => break,
        }
    }
    if failure.is_none() {
        if let Err(e) = writer.flush() {
            failure = Some(e);
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[derive(Clone, Copy)]
struct Ctx<'a> {
    plan: &'a ExecutablePlan,
    config: &'a RuntimeConfig,
    generator: &'a StatementGenerator,
    counters: &'a Counters,
    stop: &'a AtomicBool,
}

/// Statement buffer of one operator instance.
struct Output {
    tx: Sender<Batch>,
    batch: Batch,
    scratch: Vec<RdfStatement>,
}

impl Output {
    fn new(tx: Sender<Batch>) -> Self {
        Self {
            tx,
            batch: Batch::default(),
            scratch: Vec::new(),
        }
    }

    fn serialize_scratch(&mut self, ctx: &Ctx<'_>) {
        for stmt in self.scratch.drain(..) {
            serialize_into(&stmt, ctx.config.format, &mut self.batch.text);
            self.batch.statements += 1;
        }
    }

    fn flush(&mut self) -> bool {
        if self.batch.statements == 0 {
            return true;
        }
        self.tx.send(std::mem::take(&mut self.batch)).is_ok()
    }

    fn full(&self) -> bool {
        self.batch.statements as usize >= MAX_BATCH
    }
}

impl Ctx<'_> {
    fn ingest_loop(self, source: usize, stream: RecordStream, workers: Vec<Sender<RecordMsg>>) {
        let csv = self.plan.sources[source].content_type == ContentType::Csv;
        let mut header: Option<CsvHeader> = None;
        let mut next = 0;
        for record in stream {
            let record = match record {
                Ok(record) => record,
                Err(e) => {
                    Counters::add(&self.counters.source_errors, 1);
                    eprintln!("source {}: {e}", self.plan.sources[source].target);
                    break;
                }
            };
            Counters::add(&self.counters.records_in, 1);
            if csv && header.is_none() {
                match parse_csv_header(&record.payload) {
                    Ok(parsed) => header = parsed,
                    Err(_) => Counters::add(&self.counters.decode_errors, 1),
                }
                continue;
            }
            let msg = RecordMsg {
                record,
                header: header.clone(),
            };
            if workers[next].send(msg).is_err() {
                self.stop.store(true, Ordering::Relaxed);
                break;
            }
            next = (next + 1) % workers.len();
        }
    }

    fn worker_loop(
        self,
        source: usize,
        rx: Receiver<RecordMsg>,
        windows: Vec<Vec<Sender<WindowMsg>>>,
        out_tx: Sender<Batch>,
    ) {
        let plan = self.plan;
        let parallelism = self.config.parallelism;
        let content_type = plan.sources[source].content_type;
        struct MapRoute<'p> {
            map: usize,
            path: JsonPath,
            routes: Vec<(usize, Side, &'p str)>,
        }
        let maps: Vec<MapRoute<'_>> = plan.source_maps[source]
            .iter()
            .map(|&map| {
                let spec = &plan.plan.triples_maps[map];
                let mut routes = Vec::new();
                for (j, join) in plan.joins_as_child(map) {
                    routes.push((j, Side::Child, join.spec.child_attr.as_str()));
                }
                for (j, join) in plan.joins_as_parent(map) {
                    routes.push((j, Side::Parent, join.spec.parent_attr.as_str()));
                }
                MapRoute {
                    map,
                    path: JsonPath::parse(&spec.iterator).unwrap_or_else(|_| JsonPath::root()),
                    routes,
                }
            })
            .collect();

        let mut out = Output::new(out_tx);
        'recv: loop {
            let msg = match rx.try_recv() {
                Ok(msg) => msg,
                Err(TryRecvError::Empty) => {
                    if !out.flush() {
                        break;
                    }
                    match rx.recv() {
                        Ok(msg) => msg,
                        Err(_) => break,
                    }
                }
                Err(TryRecvError::Disconnected) => break,
            };
            let mut failed = false;
            for route in &maps {
                let formulation = match content_type {
                    ContentType::Json => Formulation::Json(&route.path),
                    ContentType::Csv => Formulation::Csv(msg.header.as_ref()),
                };
                let batch = match generate_items(&msg.record, formulation, &self.config.time_policy) {
                    Ok(batch) => batch,
                    Err(_) => {
                        failed = true;
                        continue;
                    }
                };
                Counters::add(&self.counters.items_in, batch.items.len() as u64);
                Counters::add(&self.counters.time_fallbacks, batch.time_fallbacks as u64);
                let spec = &plan.plan.triples_maps[route.map];
                for mut item in batch.items {
                    for binding in &spec.functions {
                        if !self.config.functions.apply(binding, &mut item) {
                            Counters::add(&self.counters.function_misses, 1);
                        }
                    }
                    let stats = self.generator.for_item(route.map, &item, &mut out.scratch);
                    Counters::add(
                        &self.counters.statements_generated,
                        (stats.generated + stats.skipped) as u64,
                    );
                    Counters::add(&self.counters.statements_skipped, stats.skipped as u64);
                    out.serialize_scratch(&self);
                    if route.routes.is_empty() {
                        continue;
                    }
                    let item = Arc::new(item);
                    for &(j, side, attr) in &route.routes {
                        let Some(key) = item.get(attr) else {
                            Counters::add(&self.counters.dead_letter, 1);
                            continue;
                        };
                        let instance = partition_for_key(key, parallelism);
                        if windows[j][instance].send((side, item.clone())).is_err() {
                            self.stop.store(true, Ordering::Relaxed);
                            break 'recv;
                        }
                    }
                }
            }
            if failed {
                Counters::add(&self.counters.decode_errors, 1);
            }
            if out.full() && !out.flush() {
                break;
            }
        }
        if !out.flush() {
            self.stop.store(true, Ordering::Relaxed);
        }
    }

    fn window_loop(self, join: usize, rx: Receiver<WindowMsg>, out_tx: Sender<Batch>) {
        let compiled = &self.plan.joins[join];
        let mut op = JoinOperator::new(
            compiled.spec.window_type,
            self.config.window,
            compiled.spec.child_attr.clone(),
            compiled.spec.parent_attr.clone(),
            self.config.time_policy.mode,
            self.config.late_policy,
        );
        let mut out = Output::new(out_tx);
        loop {
            let received = match op.next_deadline() {
                Some(deadline) => {
                    let wait = (deadline - now_ms()).max(0) as u64;
                    rx.recv_timeout(Duration::from_millis(wait))
                }
                None => rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
            };
            let now = now_ms();
            Counters::add(&self.counters.evictions, op.on_timer(now) as u64);
            match received {
                Ok((side, item)) => match op.on_item(side, item, now) {
                    Ok(joined) => {
                        Counters::add(&self.counters.joins_emitted, joined.len() as u64);
                        for pair in &joined {
                            let stats = self.generator.for_join(
                                compiled.child_map,
                                compiled.pom_index,
                                compiled.parent_map,
                                pair,
                                &mut out.scratch,
                            );
                            Counters::add(
                                &self.counters.statements_generated,
                                (stats.generated + stats.skipped) as u64,
                            );
                            Counters::add(&self.counters.statements_skipped, stats.skipped as u64);
                        }
                        out.serialize_scratch(&self);
                    }
                    Err(Rejected::Late) => Counters::add(&self.counters.late_dropped, 1),
                    Err(Rejected::MissingKey) => Counters::add(&self.counters.dead_letter, 1),
                },
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
            if (out.full() || rx.is_empty()) && !out.flush() {
                self.stop.store(true, Ordering::Relaxed);
                break;
            }
        }
        out.flush();
    }
}
