//! Running a compiled plan: operator threads, bounded queues, pre-mapping
//! functions, stream combination and the sink.

mod combine;
mod config;
mod counters;
pub mod functions;
mod pipeline;

pub use combine::{combine, Merge, TryNext};
pub use config::{parse_sink, RuntimeConfig, DEFAULT_QUEUE_CAPACITY};
pub use counters::{Counters, RunSummary};
pub use functions::{apply_function, Applied, FunctionRegistry};
pub use pipeline::{run_pipeline, run_pipeline_until};
