//! Benchmark harness: a paced workload streamer, a black-box monitor that
//! recovers event-time latency from timestamped N-Quads output, and run
//! reports.

pub mod dataset;
pub mod monitor;
pub mod profile;
pub mod resources;
pub mod report;
pub mod stream;

pub use monitor::{parse_line, MetricSample, Monitor};
pub use profile::{ProfileError, ProfileKind, Schedule, WorkloadProfile};
pub use report::{assess_sustainable, percentile, RunReport};
pub use resources::{ProcSampler, ResourceSample};
pub use stream::{stream_workload, StreamStats};

/// Wall-clock epoch milliseconds.
pub fn now_ms() -> i64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as i64)
}
