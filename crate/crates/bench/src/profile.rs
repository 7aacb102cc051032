use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Fixed inter-record gap.
    Constant,
    /// `burst_size` records back-to-back every `burst_period`.
    Burst,
    /// Constant rate split over two endpoints fed at once.
    Join,
}

impl FromStr for ProfileKind {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(ProfileKind::Constant),
            "burst" => Ok(ProfileKind::Burst),
            "join" | "join_scale" | "join-scale" => Ok(ProfileKind::Join),
            other => Err(ProfileError(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid workload profile: {0}")]
pub struct ProfileError(pub String);

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProfile {
    pub kind: ProfileKind,
    /// Records per second over all endpoints. For bursts, the rate between
    /// bursts (zero means idle).
    pub rate: f64,
    pub burst_size: u64,
    pub burst_period: Duration,
    pub duration: Duration,
    pub flow: PathBuf,
    pub speed: Option<PathBuf>,
}

impl WorkloadProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.duration.is_zero() {
            return Err(ProfileError("duration must be positive".into()));
        }
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(ProfileError(format!("rate {} is not a valid rate", self.rate)));
        }
        let bursting = self.burst_size > 0 && !self.burst_period.is_zero();
        match self.kind {
            ProfileKind::Burst if !bursting => {
                Err(ProfileError("burst needs a burst size and period".into()))
            }
            ProfileKind::Constant | ProfileKind::Join if self.rate <= 0.0 => {
                Err(ProfileError("rate must be positive".into()))
            }
            ProfileKind::Join if self.speed.is_none() => {
                Err(ProfileError("join needs both a flow and a speed dataset".into()))
            }
            _ => Ok(()),
        }
    }

    /// Dataset per endpoint, in endpoint order.
    pub fn datasets(&self) -> Vec<PathBuf> {
        let mut out = vec![self.flow.clone()];
        if let Some(speed) = &self.speed {
            out.push(speed.clone());
        }
        out
    }

    /// Send schedule of one of `endpoints` endpoints. Rates and burst sizes
    /// are split evenly; the first endpoints take the remainder.
    pub fn schedule(&self, endpoint: usize, endpoints: usize) -> Schedule {
        let endpoints = endpoints.max(1) as u64;
        let share = |total: u64| total / endpoints + u64::from((endpoint as u64) < total % endpoints);
        let burst_size = match self.kind {
            ProfileKind::Burst => share(self.burst_size),
            _ => 0,
        };
        Schedule::new(
            self.rate / endpoints as f64,
            burst_size,
            self.burst_period,
            self.duration,
        )
    }
}

/// Send offsets from the shared start of a run, in nondecreasing order: a
/// constant stream at `rate` merged with bursts of `burst_size` records at
/// every multiple of `period`. Nothing is due at or after `duration`.
#[derive(Debug, Clone)]
pub struct Schedule {
    rate: f64,
    burst_size: u64,
    period: Duration,
    duration: Duration,
    steady: u64,
    burst: u64,
}

impl Schedule {
    pub fn new(rate: f64, burst_size: u64, period: Duration, duration: Duration) -> Self {
        Self {
            rate,
            burst_size,
            period,
            duration,
            steady: 0,
            burst: 0,
        }
    }

    fn steady_due(&self) -> Option<Duration> {
        if self.rate <= 0.0 {
            return None;
        }
        let due = Duration::from_secs_f64(self.steady as f64 / self.rate);
        (due < self.duration).then_some(due)
    }

    fn burst_due(&self) -> Option<Duration> {
        if self.burst_size == 0 || self.period.is_zero() {
            return None;
        }
        let k = self.burst / self.burst_size;
        let due = self.period.checked_mul(u32::try_from(k).ok()?)?;
        (due < self.duration).then_some(due)
    }

    /// Records the whole schedule sends.
    pub fn total(&self) -> u64 {
        let bursts = if self.burst_size > 0 && !self.period.is_zero() {
            self.duration.as_nanos().div_ceil(self.period.as_nanos()) as u64
        } else {
            0
        };
        self.steady_count() + bursts * self.burst_size
    }

    fn steady_count(&self) -> u64 {
        if self.rate <= 0.0 {
            return 0;
        }
        let due = |i: u64| Duration::from_secs_f64(i as f64 / self.rate);
        let mut n = (self.duration.as_secs_f64() * self.rate).ceil() as u64;
        while n > 0 && due(n - 1) >= self.duration {
            n -= 1;
        }
        while due(n) < self.duration {
            n += 1;
        }
        n
    }
}

impl Iterator for Schedule {
    type Item = Duration;

    fn next(&mut self) -> Option<Duration> {
        match (self.steady_due(), self.burst_due()) {
            (Some(s), Some(b)) if b <= s => {
                self.burst += 1;
                Some(b)
            }
            (Some(s), _) => {
                self.steady += 1;
                Some(s)
            }
            (None, Some(b)) => {
                self.burst += 1;
                Some(b)
            }
            (None, None) => None,
        }
    }
}
