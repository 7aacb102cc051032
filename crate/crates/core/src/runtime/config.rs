use std::collections::HashMap;
use std::num::NonZeroUsize;

use crate::endpoint::Endpoint;
use crate::error::RuntimeError;
use crate::ingest::TimePolicy;
use crate::mapping::is_absolute_iri;
use crate::statement::{OutputFormat, DEFAULT_BASE_IRI};
use crate::window::{LatePolicy, WindowParams};

use super::functions::FunctionRegistry;

pub const DEFAULT_QUEUE_CAPACITY: usize = 8192;

#[derive(Debug, Clone)]
pub struct RuntimeConfig {
    /// Instances of item generation, windows and statement generation.
    pub parallelism: NonZeroUsize,
    pub window: WindowParams,
    pub base_iri: String,
    pub output: Endpoint,
    pub format: OutputFormat,
    pub time_policy: TimePolicy,
    pub late_policy: LatePolicy,
    /// Capacity of every inter-operator queue, in messages.
    pub queue_capacity: usize,
    pub functions: FunctionRegistry,
    /// Replacement endpoints keyed by the source target written in the mapping.
    pub source_overrides: HashMap<String, Endpoint>,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            parallelism: NonZeroUsize::MIN,
            window: WindowParams::default(),
            base_iri: DEFAULT_BASE_IRI.to_string(),
            output: Endpoint::Stdio,
            format: OutputFormat::NTriples,
            time_policy: TimePolicy::arrival(),
            late_policy: LatePolicy::Drop,
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            functions: FunctionRegistry::builtin(),
            source_overrides: HashMap::new(),
        }
    }
}

/// Parse a sink spec: `stdout`, `tcp://host:port`, or a file path.
pub fn parse_sink(spec: &str) -> Result<Endpoint, RuntimeError> {
    if spec == "stdout" || spec == "-" {
        return Ok(Endpoint::Stdio);
    }
    if spec.contains("://") || spec.starts_with("file:") {
        return match spec.parse::<Endpoint>() {
            Ok(Endpoint::Ws(_)) => Err(RuntimeError::Config(format!("unsupported sink `{spec}`"))),
            Ok(endpoint) => Ok(endpoint),
            Err(e) => Err(RuntimeError::Config(format!("sink `{spec}`: {e}"))),
        };
    }
    if spec.is_empty() {
        return Err(RuntimeError::Config("empty sink".into()));
    }
    Ok(Endpoint::File(spec.into()))
}

impl RuntimeConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        self.window.validate().map_err(RuntimeError::Config)?;
        self.time_policy.validate().map_err(RuntimeError::Config)?;
        if self.queue_capacity == 0 {
            return Err(RuntimeError::Config("queue capacity must be at least 1".into()));
        }
        if !is_absolute_iri(&self.base_iri) {
            return Err(RuntimeError::Config(format!(
                "base IRI `{}` is not absolute",
                self.base_iri
            )));
        }
        if matches!(self.output, Endpoint::Ws(_)) {
            return Err(RuntimeError::Config("websocket sinks are not supported".into()));
        }
        Ok(())
    }
}
