use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

macro_rules! counters {
    ($($name:ident),* $(,)?) => {
        /// Monotone pipeline counters shared by all operator threads.
        #[derive(Debug, Default)]
        pub struct Counters {
            $(pub $name: AtomicU64,)*
        }

        /// Counter values at one point in time.
        #[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
        pub struct RunSummary {
            $(pub $name: u64,)*
            pub elapsed_ms: u64,
        }

        impl Counters {
            pub fn snapshot(&self, elapsed_ms: u64) -> RunSummary {
                RunSummary {
                    $($name: self.$name.load(Ordering::Relaxed),)*
                    elapsed_ms,
                }
            }
        }

        impl fmt::Display for RunSummary {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(writeln!(f, "{}={}", stringify!($name), self.$name)?;)*
                writeln!(f, "elapsed_ms={}", self.elapsed_ms)
            }
        }
    };
}

counters!(
    records_in,
    source_errors,
    items_in,
    decode_errors,
    time_fallbacks,
    function_misses,
    dead_letter,
    late_dropped,
    joins_emitted,
    evictions,
    statements_generated,
    statements_skipped,
    statements_out,
);

impl Counters {
    pub fn add(counter: &AtomicU64, n: u64) {
        if n > 0 {
            counter.fetch_add(n, Ordering::Relaxed);
        }
    }
}

impl RunSummary {
    /// Every attempted statement was either written or skipped.
    pub fn reconciles(&self) -> bool {
        self.statements_out + self.statements_skipped == self.statements_generated
    }
}
