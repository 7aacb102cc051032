//! Run reports: exact latency percentiles, throughput, divergence and
//! sustainability.

use serde::{Deserialize, Serialize};

use crate::monitor::MetricSample;
use crate::resources::ResourceSample;

pub const DEFAULT_WARMUP_MS: i64 = 30_000;

/// Nearest-rank percentile of ascending `sorted`; 0 for no data.
pub fn percentile(sorted: &[i64], p: f64) -> i64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Latency {
    pub count: u64,
    pub p50: i64,
    pub p90: i64,
    pub p99: i64,
    pub max: i64,
}

impl Latency {
    pub fn of(mut latencies: Vec<i64>) -> Self {
        latencies.sort_unstable();
        Self {
            count: latencies.len() as u64,
            p50: percentile(&latencies, 50.0),
            p90: percentile(&latencies, 90.0),
            p99: percentile(&latencies, 99.0),
            max: latencies.last().copied().unwrap_or(0),
        }
    }
}

/// Latency of the samples emitted in one second of the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Second {
    /// Seconds since the first emission.
    pub second: i64,
    #[serde(flatten)]
    pub latency: Latency,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Latency over the samples after warm-up.
    pub p50_ms: i64,
    pub p90_ms: i64,
    pub p99_ms: i64,
    pub max_ms: i64,
    /// Output lines per second after warm-up.
    pub throughput: f64,
    pub sustainable: bool,
    /// Samples counted in the percentiles.
    pub samples: u64,
    /// Every parsed line, warm-up included.
    pub total_samples: u64,
    pub dropped: u64,
    pub warmup_ms: i64,
    pub target_rate: Option<f64>,
    pub p99_middle_third_ms: i64,
    pub p99_final_third_ms: i64,
    pub first_emission_ms: Option<i64>,
    pub last_emission_ms: Option<i64>,
    pub timeline: Vec<Second>,
    pub resources: Vec<ResourceSample>,
}

/// p99 latency of the final third of the run stays within twice the middle
/// third's. A millisecond of slack keeps a flat sub-millisecond series from
/// failing on rounding.
pub fn non_divergent(middle_p99: i64, final_p99: i64) -> bool {
    final_p99 <= 2 * middle_p99 + 1
}

impl RunReport {
    /// Build a report from raw samples. Samples emitted in the first
    /// `warmup_ms` after the first emission are left out of the percentiles.
    pub fn build(samples: &[MetricSample], dropped: u64, warmup_ms: i64, target_rate: Option<f64>) -> Self {
        let mut report = RunReport {
            dropped,
            warmup_ms,
            target_rate,
            total_samples: samples.len() as u64,
            ..RunReport::default()
        };
        let Some(first) = samples.iter().map(|s| s.emission_ms).min() else {
            return report;
        };
        let last = samples.iter().map(|s| s.emission_ms).max().unwrap_or(first);
        report.first_emission_ms = Some(first);
        report.last_emission_ms = Some(last);

        let mut seconds: std::collections::BTreeMap<i64, Vec<i64>> = Default::default();
        for s in samples {
            seconds
                .entry((s.emission_ms - first) / 1000)
                .or_default()
                .push(s.latency_ms());
        }
        report.timeline = seconds
            .into_iter()
            .map(|(second, lat)| Second {
                second,
                latency: Latency::of(lat),
            })
            .collect();

        let start = first + warmup_ms;
        let measured: Vec<&MetricSample> = samples.iter().filter(|s| s.emission_ms >= start).collect();
        let overall = Latency::of(measured.iter().map(|s| s.latency_ms()).collect());
        report.samples = overall.count;
        report.p50_ms = overall.p50;
        report.p90_ms = overall.p90;
        report.p99_ms = overall.p99;
        report.max_ms = overall.max;
        if measured.is_empty() {
            return report;
        }

        let span_ms = (last - start).max(0);
        report.throughput = if span_ms > 0 {
            measured.len() as f64 * 1000.0 / span_ms as f64
        } else {
            measured.len() as f64
        };
        let third = |k: i64| -> Vec<i64> {
            let lo = start + span_ms * k / 3;
            let hi = start + span_ms * (k + 1) / 3;
            measured
                .iter()
                .filter(|s| s.emission_ms >= lo && (s.emission_ms < hi || (k == 2 && s.emission_ms <= hi)))
                .map(|s| s.latency_ms())
                .collect()
        };
        report.p99_middle_third_ms = Latency::of(third(1)).p99;
        report.p99_final_third_ms = Latency::of(third(2)).p99;
        let fast_enough = target_rate.is_none_or(|r| report.throughput >= 0.99 * r);
        report.sustainable = fast_enough && non_divergent(report.p99_middle_third_ms, report.p99_final_third_ms);
        report
    }

    pub fn rss_growth(&self, window_ms: i64) -> Option<f64> {
        crate::resources::rss_growth(&self.resources, window_ms)
    }
}

/// Highest target rate whose run was sustainable. Runs without a target
/// rate are ignored.
pub fn assess_sustainable(reports: &[RunReport]) -> Option<f64> {
    reports
        .iter()
        .filter(|r| r.sustainable)
        .filter_map(|r| r.target_rate)
        .fold(None, |best, r| Some(best.map_or(r, |b: f64| b.max(r))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(creation: i64, latency: i64) -> MetricSample {
        MetricSample {
            key: String::new(),
            creation_ms: creation,
            emission_ms: creation + latency,
        }
    }

    #[test]
    fn nearest_rank() {
        let v: Vec<i64> = (1..=100).collect();
        assert_eq!(percentile(&v, 50.0), 50);
        assert_eq!(percentile(&v, 99.0), 99);
        assert_eq!(percentile(&v, 100.0), 100);
        assert_eq!(percentile(&v, 0.0), 1);
        assert_eq!(percentile(&[7], 90.0), 7);
        assert_eq!(percentile(&[], 50.0), 0);
    }

    #[test]
    fn empty_report() {
        let r = RunReport::build(&[], 0, DEFAULT_WARMUP_MS, None);
        assert_eq!(r.samples, 0);
        assert_eq!(r.dropped, 0);
        assert_eq!((r.p50_ms, r.p99_ms, r.max_ms), (0, 0, 0));
        assert!(!r.sustainable);
    }

    #[test]
    fn warmup_is_excluded() {
        let mut samples: Vec<_> = (0..30).map(|s| sample(s * 1000, 5_000)).collect();
        samples.extend((30..90).map(|s| sample(s * 1000, 10)));
        let r = RunReport::build(&samples, 0, 30_000, Some(1.0));
        assert!(r.samples <= 60);
        assert_eq!(r.p99_ms, 10);
        assert!(r.sustainable);
    }

    #[test]
    fn growing_backlog_is_unsustainable() {
        // Offered 1000 records/s, consumed 750/s: the queue grows without
        // bound and latency with it.
        let samples: Vec<_> = (0..120_000).map(|i| sample(i, i / 3)).collect();
        let r = RunReport::build(&samples, 0, 0, Some(1000.0));
        assert!(r.p99_final_third_ms > r.p99_middle_third_ms);
        assert!(r.throughput < 990.0);
        assert!(!r.sustainable);
    }

    #[test]
    fn late_latency_spike_is_divergent() {
        let mut samples: Vec<_> = (0..80_000).map(|i| sample(i, 20)).collect();
        samples.extend((80_000..120_000).map(|i| sample(i, 900)));
        let r = RunReport::build(&samples, 0, 0, Some(990.0));
        assert!(r.throughput >= 0.99 * 990.0);
        assert_eq!(r.p99_middle_third_ms, 20);
        assert!(!r.sustainable);
    }

    #[test]
    fn slow_consumer_is_unsustainable() {
        let samples: Vec<_> = (0..1000).map(|i| sample(i * 2, 3)).collect();
        assert!(!RunReport::build(&samples, 0, 0, Some(1000.0)).sustainable);
        assert!(RunReport::build(&samples, 0, 0, Some(500.0)).sustainable);
    }

    #[test]
    fn assess_picks_highest_sustainable_rate() {
        let run = |rate: f64, ok: bool| RunReport {
            target_rate: Some(rate),
            sustainable: ok,
            ..RunReport::default()
        };
        assert_eq!(
            assess_sustainable(&[run(1e3, true), run(5e3, true), run(1e4, true)]),
            Some(1e4)
        );
        assert_eq!(
            assess_sustainable(&[run(1e4, true), run(2e4, false)]),
            Some(1e4)
        );
        assert_eq!(assess_sustainable(&[run(2e4, false)]), None);
    }
}
