//! Keyed two-stream windowed join with eager triggers: tumbling windows and
//! the cost-driven dynamic window.

mod registry;
mod state;

pub use registry::{JoinOperator, LatePolicy, Rejected, WindowRegistry};
pub use state::{
    grow_interval, Adjustment, EvictionOutcome, JoinedItem, Side, WindowParams, WindowState,
};
