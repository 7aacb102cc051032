use chrono::{DateTime, Local, LocalResult, NaiveDate, NaiveTime, TimeZone};

use super::item::DataItem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeMode {
    #[default]
    Arrival,
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldFormat {
    #[default]
    EpochMs,
    /// `HH:MM:SS` on the local calendar day of the record's arrival.
    ClockHms,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimePolicy {
    pub mode: TimeMode,
    pub field_path: Option<String>,
    pub field_format: FieldFormat,
}

impl TimePolicy {
    pub fn arrival() -> Self {
        Self::default()
    }

    pub fn field(path: impl Into<String>, format: FieldFormat) -> Self {
        Self {
            mode: TimeMode::Field,
            field_path: Some(path.into()),
            field_format: format,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match (self.mode, &self.field_path) {
            (TimeMode::Field, None) => Err("field time mode needs a field path".into()),
            (TimeMode::Field, Some(p)) if p.is_empty() => {
                Err("field time mode needs a non-empty field path".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeAssignment {
    Arrival,
    Field,
    /// The field was missing or unparseable; the arrival time was kept.
    Fallback,
}

/// Set the item's event time according to `policy`. `arrival_time` is the
/// record's arrival in epoch ms.
pub fn assign_timestamp(
    item: &mut DataItem,
    arrival_time: i64,
    policy: &TimePolicy,
) -> TimeAssignment {
    item.set_t(arrival_time);
    if policy.mode == TimeMode::Arrival {
        return TimeAssignment::Arrival;
    }
    let parsed = policy
        .field_path
        .as_deref()
        .and_then(|path| item.get(path))
        .and_then(|value| parse_field_time(value, policy.field_format, arrival_time));
    match parsed {
        Some(t) => {
            item.set_t(t);
            TimeAssignment::Field
        }
        None => TimeAssignment::Fallback,
    }
}

pub fn parse_field_time(value: &str, format: FieldFormat, arrival_time: i64) -> Option<i64> {
    match format {
        FieldFormat::EpochMs => value.trim().parse::<i64>().ok().filter(|t| *t > 0),
        FieldFormat::ClockHms => {
            let day = DateTime::from_timestamp_millis(arrival_time)?
                .with_timezone(&Local)
                .date_naive();
            clock_on_day(value, day)
        }
    }
}

/// Epoch ms of local wall-clock time `HH:MM:SS` on `day`.
pub fn clock_on_day(value: &str, day: NaiveDate) -> Option<i64> {
    let time = NaiveTime::parse_from_str(value.trim(), "%H:%M:%S").ok()?;
    let local = match Local.from_local_datetime(&day.and_time(time)) {
        LocalResult::Single(dt) => dt,
        LocalResult::Ambiguous(earliest, _) => earliest,
        LocalResult::None => return None,
    };
    Some(local.timestamp_millis()).filter(|t| *t > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::item::SourceId;
    use std::collections::BTreeMap;

    fn item(attrs: &[(&str, &str)]) -> DataItem {
        let attributes: BTreeMap<String, String> = attrs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        DataItem::new(attributes, 0, SourceId(0), 0)
    }

    #[test]
    fn arrival_mode_uses_arrival_time() {
        let mut it = item(&[("time", "14:42:00")]);
        assert_eq!(assign_timestamp(&mut it, 1000, &TimePolicy::arrival()), TimeAssignment::Arrival);
        assert_eq!(it.t(), 1000);
    }

    #[test]
    fn clock_field_on_fixed_day() {
        let day = NaiveDate::from_ymd_opt(2026, 10, 17).unwrap();
        let noon_ms = Local
            .from_local_datetime(&day.and_hms_opt(10, 0, 0).unwrap())
            .single()
            .unwrap()
            .timestamp_millis();
        // Oracle: same local day, 4h42m later than 10:00:00.
        let expected = noon_ms + (4 * 3600 + 42 * 60) * 1000;
        let mut it = item(&[("time", "14:42:00")]);
        let policy = TimePolicy::field("time", FieldFormat::ClockHms);
        assert_eq!(assign_timestamp(&mut it, noon_ms, &policy), TimeAssignment::Field);
        assert_eq!(it.t(), expected);
    }

    #[test]
    fn missing_field_falls_back() {
        let mut it = item(&[("id", "lane1")]);
        let policy = TimePolicy::field("time", FieldFormat::ClockHms);
        assert_eq!(assign_timestamp(&mut it, 5000, &policy), TimeAssignment::Fallback);
        assert_eq!(it.t(), 5000);
    }

    #[test]
    fn epoch_field() {
        let mut it = item(&[("ts", "1700000000000")]);
        let policy = TimePolicy::field("ts", FieldFormat::EpochMs);
        assert_eq!(assign_timestamp(&mut it, 5, &policy), TimeAssignment::Field);
        assert_eq!(it.t(), 1_700_000_000_000);
        let mut bad = item(&[("ts", "-4")]);
        assert_eq!(assign_timestamp(&mut bad, 5, &policy), TimeAssignment::Fallback);
    }

    #[test]
    fn field_mode_requires_path() {
        let policy = TimePolicy {
            mode: TimeMode::Field,
            field_path: None,
            field_format: FieldFormat::EpochMs,
        };
        assert!(policy.validate().is_err());
        assert!(TimePolicy::arrival().validate().is_ok());
    }
}
