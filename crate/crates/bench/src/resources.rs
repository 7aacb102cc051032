//! Per-process CPU and memory sampling from `/proc`.

use std::fs;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::now_ms;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceSample {
    pub t_ms: i64,
    pub rss_kb: u64,
    /// CPU time over the previous interval as a percentage of one core.
    pub cpu_pct: f64,
}

/// Resident set size in kB from `/proc/<pid>/status`.
pub fn read_rss_kb(pid: u32) -> Option<u64> {
    let status = fs::read_to_string(format!("/proc/{pid}/status")).ok()?;
    parse_rss_kb(&status)
}

fn parse_rss_kb(status: &str) -> Option<u64> {
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmRSS:"))?
        .split_whitespace()
        .next()?
        .parse()
        .ok()
}

/// User plus system CPU time in clock ticks from `/proc/<pid>/stat`.
pub fn read_cpu_ticks(pid: u32) -> Option<u64> {
    let stat = fs::read_to_string(format!("/proc/{pid}/stat")).ok()?;
    parse_cpu_ticks(&stat)
}

fn parse_cpu_ticks(stat: &str) -> Option<u64> {
    // The command name may contain spaces; fields resume after its `)`.
    let rest = &stat[stat.rfind(')')? + 1..];
    let fields: Vec<&str> = rest.split_whitespace().collect();
    // utime and stime are fields 14 and 15 of the whole line.
    let utime: u64 = fields.get(11)?.parse().ok()?;
    let stime: u64 = fields.get(12)?.parse().ok()?;
    Some(utime + stime)
}

fn clock_ticks_per_second() -> f64 {
    // SAFETY: sysconf has no preconditions.
    let ticks = unsafe { libc::sysconf(libc::_SC_CLK_TCK) };
    if ticks > 0 {
        ticks as f64
    } else {
        100.0
    }
}

/// Samples a process at a fixed interval on a background thread until
/// stopped or the process disappears.
pub struct ProcSampler {
    stop: Arc<AtomicBool>,
    samples: Arc<Mutex<Vec<ResourceSample>>>,
    handle: Option<JoinHandle<()>>,
}

impl ProcSampler {
    pub fn spawn(pid: u32, interval: Duration) -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let samples = Arc::new(Mutex::new(Vec::new()));
        let handle = {
            let (stop, samples) = (stop.clone(), samples.clone());
            thread::spawn(move || {
                let hz = clock_ticks_per_second();
                let mut prev = read_cpu_ticks(pid).map(|t| (t, now_ms()));
                while !stop.load(Ordering::Relaxed) {
                    thread::sleep(interval);
                    let (Some(rss_kb), Some(ticks)) = (read_rss_kb(pid), read_cpu_ticks(pid)) else {
                        break;
                    };
                    let t_ms = now_ms();
                    let cpu_pct = match prev {
                        Some((t0, at)) if t_ms > at => {
                            (ticks.saturating_sub(t0)) as f64 / hz * 100_000.0 / (t_ms - at) as f64
                        }
                        _ => 0.0,
                    };
                    prev = Some((ticks, t_ms));
                    samples.lock().unwrap().push(ResourceSample { t_ms, rss_kb, cpu_pct });
                }
            })
        };
        Self {
            stop,
            samples,
            handle: Some(handle),
        }
    }

    pub fn finish(mut self) -> Vec<ResourceSample> {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
        std::mem::take(&mut *self.samples.lock().unwrap())
    }
}

/// Relative RSS growth over the final `window_ms` of the samples: the last
/// reading against the first one inside the window.
pub fn rss_growth(samples: &[ResourceSample], window_ms: i64) -> Option<f64> {
    let last = samples.last()?;
    let first = samples.iter().find(|s| s.t_ms >= last.t_ms - window_ms)?;
    if first.t_ms == last.t_ms || first.rss_kb == 0 {
        return None;
    }
    Some(last.rss_kb as f64 / first.rss_kb as f64 - 1.0)
}
