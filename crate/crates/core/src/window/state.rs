use std::sync::Arc;

use crate::ingest::DataItem;

/// Adaptive window configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowParams {
    /// Starting window interval |W| in ms; also the fixed interval of tumbling windows.
    pub initial_interval_ms: u64,
    /// Upper cost threshold: above it the interval halves.
    pub cost_upper: f64,
    /// Lower cost threshold: below it the interval grows by 10%.
    pub cost_lower: f64,
    pub max_interval_ms: u64,
    pub min_interval_ms: u64,
    pub initial_limit_parent: f64,
    pub initial_limit_child: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self {
            initial_interval_ms: 2000,
            cost_upper: 1.2,
            cost_lower: 0.4,
            max_interval_ms: 30_000,
            min_interval_ms: 250,
            initial_limit_parent: 50.0,
            initial_limit_child: 50.0,
        }
    }
}

impl WindowParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_interval_ms == 0 {
            return Err("window minimum interval must be positive".into());
        }
        if !(self.min_interval_ms <= self.initial_interval_ms
            && self.initial_interval_ms <= self.max_interval_ms)
        {
            return Err(format!(
                "window intervals must satisfy min <= initial <= max, got {} <= {} <= {}",
                self.min_interval_ms, self.initial_interval_ms, self.max_interval_ms
            ));
        }
        if !(0.0 <= self.cost_lower && self.cost_lower < self.cost_upper) || !self.cost_upper.is_finite() {
            return Err(format!(
                "cost thresholds must satisfy 0 <= lower < upper, got {} and {}",
                self.cost_lower, self.cost_upper
            ));
        }
        if !(self.initial_limit_parent >= 1.0 && self.initial_limit_child >= 1.0)
            || !self.initial_limit_parent.is_finite()
            || !self.initial_limit_child.is_finite()
        {
            return Err("buffer limits must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Parent,
    Child,
}

/// One pairwise join result.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedItem {
    pub child: Arc<DataItem>,
    pub parent: Arc<DataItem>,
    pub key: Arc<str>,
    /// Processing time of emission, epoch ms.
    pub emit_time: i64,
}

impl JoinedItem {
    /// Event time of the join: the child item's.
    pub fn t(&self) -> i64 {
        self.child.t()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjustment {
    Shrink,
    Grow,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvictionOutcome {
    pub cost_parent: f64,
    pub cost_child: f64,
    pub total_cost: f64,
    pub adjustment: Adjustment,
}

/// Buffers and adaptive parameters of one key's window.
#[derive(Debug, Clone)]
pub struct WindowState {
    key: Arc<str>,
    list_p: Vec<Arc<DataItem>>,
    list_c: Vec<Arc<DataItem>>,
    interval_ms: u64,
    limit_p: f64,
    limit_c: f64,
    window_start: i64,
    window_end: i64,
}

impl WindowState {
    /// Fresh state whose window starts at `now` truncated to the interval grid.
    pub fn new(key: Arc<str>, params: &WindowParams, now: i64) -> Self {
        let interval = params.initial_interval_ms.max(1) as i64;
        let start = now - now.rem_euclid(interval);
        Self::with_parts(
            key,
            params.initial_interval_ms,
            params.initial_limit_parent,
            params.initial_limit_child,
            start,
        )
    }

    pub fn with_parts(key: Arc<str>, interval_ms: u64, limit_p: f64, limit_c: f64, window_start: i64) -> Self {
        Self {
            key,
            list_p: Vec::new(),
            list_c: Vec::new(),
            interval_ms,
            limit_p,
            limit_c,
            window_start,
            window_end: window_start + interval_ms as i64,
        }
    }

    pub fn key(&self) -> &Arc<str> {
        &self.key
    }

    pub fn parents(&self) -> &[Arc<DataItem>] {
        &self.list_p
    }

    pub fn children(&self) -> &[Arc<DataItem>] {
        &self.list_c
    }

    pub fn interval_ms(&self) -> u64 {
        self.interval_ms
    }

    pub fn limit_parent(&self) -> f64 {
        self.limit_p
    }

    pub fn limit_child(&self) -> f64 {
        self.limit_c
    }

    pub fn window_start(&self) -> i64 {
        self.window_start
    }

    pub fn window_end(&self) -> i64 {
        self.window_end
    }

    /// Buffer the item and eagerly join it with everything buffered on the
    /// opposite side, in that side's buffer order.
    pub fn on_record(&mut self, side: Side, item: Arc<DataItem>, now: i64) -> Vec<JoinedItem> {
        let (own, opposite) = match side {
            Side::Parent => (&mut self.list_p, &self.list_c),
            Side::Child => (&mut self.list_c, &self.list_p),
        };
        let emitted = opposite
            .iter()
            .map(|other| {
                let (child, parent) = match side {
                    Side::Parent => (other.clone(), item.clone()),
                    Side::Child => (item.clone(), other.clone()),
                };
                JoinedItem {
                    child,
                    parent,
                    key: self.key.clone(),
                    emit_time: now,
                }
            })
            .collect();
        own.push(item);
        emitted
    }

    /// Dynamic window eviction: adapt interval and limits from the buffer
    /// costs, clear both buffers, then open the next window.
    pub fn on_eviction(&mut self, params: &WindowParams) -> EvictionOutcome {
        let cost_parent = self.list_p.len() as f64 / self.limit_p;
        let cost_child = self.list_c.len() as f64 / self.limit_c;
        let total_cost = cost_parent + cost_child;
        let adjustment = if total_cost > params.cost_upper {
            self.interval_ms /= 2;
            self.limit_p = self.limit_p * cost_parent * 1.5;
            self.limit_c = self.limit_c * cost_child * 1.5;
            Adjustment::Shrink
        } else if total_cost < params.cost_lower {
            self.interval_ms = grow_interval(self.interval_ms);
            self.limit_p = self.limit_p * cost_parent * 1.5;
            self.limit_c = self.limit_c * cost_child * 1.5;
            Adjustment::Grow
        } else {
            Adjustment::Stable
        };
        self.list_p.clear();
        self.list_c.clear();
        self.interval_ms = self
            .interval_ms
            .clamp(params.min_interval_ms, params.max_interval_ms);
        // A zero cost would zero the limit and make the next cost divide by zero.
        self.limit_p = self.limit_p.max(1.0);
        self.limit_c = self.limit_c.max(1.0);
        self.advance();
        EvictionOutcome {
            cost_parent,
            cost_child,
            total_cost,
            adjustment,
        }
    }

    /// Tumbling window close: clear buffers and advance by the fixed interval.
    pub fn tumbling_join_close(&mut self) {
        self.list_p.clear();
        self.list_c.clear();
        self.advance();
    }

    fn advance(&mut self) {
        self.window_start = self.window_end;
        self.window_end = self.window_start + self.interval_ms as i64;
    }
}

/// `interval * 1.1` in integer ms, rounding half up.
pub fn grow_interval(interval_ms: u64) -> u64 {
    interval_ms.saturating_mul(11).saturating_add(5) / 10
}
