use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use super::state::{JoinedItem, Side, WindowParams, WindowState};
use crate::ingest::{DataItem, TimeMode};
use crate::mapping::WindowType;

/// What to do with an item whose event time precedes its window's start
/// when event times come from a record field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatePolicy {
    #[default]
    Drop,
    Join,
}

/// Per-key window states of one join operator instance, with their
/// processing-time eviction timers.
#[derive(Debug)]
pub struct WindowRegistry {
    window_type: WindowType,
    params: WindowParams,
    states: HashMap<Arc<str>, WindowState>,
    timers: BinaryHeap<Reverse<(i64, Arc<str>)>>,
}

impl WindowRegistry {
    pub fn new(window_type: WindowType, params: WindowParams) -> Self {
        Self {
            window_type,
            params,
            states: HashMap::new(),
            timers: BinaryHeap::new(),
        }
    }

    pub fn params(&self) -> &WindowParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&WindowState> {
        self.states.get(key)
    }

    pub fn states(&self) -> impl Iterator<Item = &WindowState> {
        self.states.values()
    }

    /// The state for `key`, created on first use with a window aligned to
    /// the interval grid at `now`.
    pub fn route(&mut self, key: &str, now: i64) -> &mut WindowState {
        if !self.states.contains_key(key) {
            let key: Arc<str> = Arc::from(key);
            let state = WindowState::new(key.clone(), &self.params, now);
            self.timers.push(Reverse((state.window_end(), key.clone())));
            self.states.insert(key, state);
        }
        self.states.get_mut(key).expect("inserted above")
    }

    /// Earliest pending eviction time.
    pub fn next_deadline(&self) -> Option<i64> {
        self.timers.peek().map(|Reverse((t, _))| *t)
    }

    /// Fire every eviction due at or before `now`. Returns the number fired.
    pub fn evict_due(&mut self, now: i64) -> usize {
        let mut fired = 0;
        while let Some(Reverse((deadline, _))) = self.timers.peek() {
            if *deadline > now {
                break;
            }
            let Reverse((deadline, key)) = self.timers.pop().expect("peeked");
            let Some(state) = self.states.get_mut(&key) else {
                continue;
            };
            if state.window_end() != deadline {
                continue;
            }
            match self.window_type {
                WindowType::Dynamic => {
                    state.on_eviction(&self.params);
                }
                WindowType::Tumbling => state.tumbling_join_close(),
            }
            fired += 1;
            self.timers.push(Reverse((state.window_end(), key)));
        }
        fired
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejected {
    MissingKey,
    Late,
}

/// Keyed two-stream join: routes items to per-key windows and emits joins
/// eagerly.
#[derive(Debug)]
pub struct JoinOperator {
    registry: WindowRegistry,
    child_attr: String,
    parent_attr: String,
    time_mode: TimeMode,
    late_policy: LatePolicy,
}

impl JoinOperator {
    pub fn new(
        window_type: WindowType,
        params: WindowParams,
        child_attr: impl Into<String>,
        parent_attr: impl Into<String>,
        time_mode: TimeMode,
        late_policy: LatePolicy,
    ) -> Self {
        Self {
            registry: WindowRegistry::new(window_type, params),
            child_attr: child_attr.into(),
            parent_attr: parent_attr.into(),
            time_mode,
            late_policy,
        }
    }

    pub fn registry(&self) -> &WindowRegistry {
        &self.registry
    }

    pub fn key_attr(&self, side: Side) -> &str {
        match side {
            Side::Parent => &self.parent_attr,
            Side::Child => &self.child_attr,
        }
    }

    /// Fire due evictions, then buffer and join the item.
    pub fn on_item(&mut self, side: Side, item: Arc<DataItem>, now: i64) -> Result<Vec<JoinedItem>, Rejected> {
        self.registry.evict_due(now);
        let attr = match side {
            Side::Parent => &self.parent_attr,
            Side::Child => &self.child_attr,
        };
        let key = item.get(attr).ok_or(Rejected::MissingKey)?.to_string();
        let state = self.registry.route(&key, now);
        if item.t() < state.window_start()
            && self.time_mode == TimeMode::Field
            && self.late_policy == LatePolicy::Drop
        {
            return Err(Rejected::Late);
        }
        Ok(state.on_record(side, item, now))
    }

    pub fn on_timer(&mut self, now: i64) -> usize {
        self.registry.evict_due(now)
    }

    pub fn next_deadline(&self) -> Option<i64> {
        self.registry.next_deadline()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SourceId;
    use std::collections::BTreeMap;

    fn item(id: &str, t: i64, seq: u64) -> Arc<DataItem> {
        let mut attrs = BTreeMap::new();
        attrs.insert("id".to_string(), id.to_string());
        Arc::new(DataItem::new(attrs, t, SourceId(0), seq))
    }

    #[test]
    fn same_key_same_state() {
        let mut reg = WindowRegistry::new(WindowType::Tumbling, WindowParams::default());
        reg.route("lane1", 100).on_record(Side::Parent, item("lane1", 100, 0), 100);
        reg.route("lane1", 150).on_record(Side::Parent, item("lane1", 150, 1), 150);
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.get("lane1").unwrap().parents().len(), 2);
    }

    #[test]
    fn distinct_keys_have_independent_windows() {
        let mut reg = WindowRegistry::new(WindowType::Dynamic, WindowParams::default());
        for i in 0..200 {
            reg.route("busy", 0).on_record(Side::Parent, item("busy", 0, i), 0);
        }
        reg.route("idle", 0);
        reg.evict_due(2000);
        assert_eq!(reg.get("busy").unwrap().interval_ms(), 1000);
        assert_eq!(reg.get("idle").unwrap().interval_ms(), 2200);
    }

    #[test]
    fn thousand_keys_thousand_states() {
        let mut reg = WindowRegistry::new(WindowType::Tumbling, WindowParams::default());
        for i in 0..1000 {
            reg.route(&format!("k{i}"), 0);
        }
        assert_eq!(reg.len(), 1000);
    }

    #[test]
    fn timers_fire_at_window_end() {
        let mut reg = WindowRegistry::new(WindowType::Tumbling, WindowParams::default());
        reg.route("a", 500);
        assert_eq!(reg.next_deadline(), Some(2000));
        assert_eq!(reg.evict_due(1999), 0);
        assert_eq!(reg.evict_due(2000), 1);
        assert_eq!(reg.next_deadline(), Some(4000));
        // Catch up over several missed windows.
        assert_eq!(reg.evict_due(9000), 3);
    }

    #[test]
    fn operator_rejects_missing_key_and_late_field_items() {
        let mut op = JoinOperator::new(
            WindowType::Tumbling,
            WindowParams::default(),
            "id",
            "id",
            TimeMode::Field,
            LatePolicy::Drop,
        );
        let no_key = Arc::new(DataItem::new(BTreeMap::new(), 1, SourceId(0), 0));
        assert_eq!(op.on_item(Side::Child, no_key, 10), Err(Rejected::MissingKey));
        assert!(op.on_item(Side::Parent, item("x", 2100, 1), 2100).is_ok());
        assert_eq!(op.on_item(Side::Child, item("x", 1500, 2), 2200), Err(Rejected::Late));

        let mut lenient = JoinOperator::new(
            WindowType::Tumbling,
            WindowParams::default(),
            "id",
            "id",
            TimeMode::Arrival,
            LatePolicy::Drop,
        );
        lenient.on_item(Side::Parent, item("x", 2100, 1), 2100).unwrap();
        assert_eq!(lenient.on_item(Side::Child, item("x", 1500, 2), 2200).unwrap().len(), 1);
    }
}
