use std::collections::BTreeMap;
use std::fmt;

/// Identifies the ingestion chain a record or item came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceId(pub u32);

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "source[{}]", self.0)
    }
}

/// One framed record as read from a source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub payload: Vec<u8>,
    /// Wall-clock epoch milliseconds at which the record was read.
    pub arrival_time: i64,
    pub source_id: SourceId,
    /// Per-source record counter, starting at 0.
    pub sequence_no: u64,
}

/// Bits of an item's sequence number reserved for its index within the record.
pub const ITEM_INDEX_BITS: u32 = 20;
pub const MAX_ITEMS_PER_RECORD: usize = 1 << ITEM_INDEX_BITS;

/// A decoded, timestamped unit of input with flattened string attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataItem {
    attributes: BTreeMap<String, String>,
    t: i64,
    source_id: SourceId,
    sequence_no: u64,
}

impl DataItem {
    pub fn new(
        attributes: BTreeMap<String, String>,
        t: i64,
        source_id: SourceId,
        sequence_no: u64,
    ) -> Self {
        Self {
            attributes,
            t,
            source_id,
            sequence_no,
        }
    }

    /// Sequence number of item `index` within record `record_sequence_no`.
    /// Strictly increasing in (record, index) order.
    pub fn compose_sequence_no(record_sequence_no: u64, index: usize) -> u64 {
        (record_sequence_no << ITEM_INDEX_BITS) | index as u64
    }

    pub fn get(&self, attr: &str) -> Option<&str> {
        self.attributes.get(attr).map(String::as_str)
    }

    pub fn attributes(&self) -> &BTreeMap<String, String> {
        &self.attributes
    }

    /// Event time in epoch milliseconds.
    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn source_id(&self) -> SourceId {
        self.source_id
    }

    pub fn sequence_no(&self) -> u64 {
        self.sequence_no
    }

    /// Copy of this item with one more attribute; the timestamp is kept.
    pub fn with_attribute(&self, key: impl Into<String>, value: impl Into<String>) -> Self {
        let mut attributes = self.attributes.clone();
        attributes.insert(key.into(), value.into());
        Self {
            attributes,
            t: self.t,
            source_id: self.source_id,
            sequence_no: self.sequence_no,
        }
    }

    pub fn set_attribute(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.attributes.insert(key.into(), value.into());
    }

    pub(crate) fn set_t(&mut self, t: i64) {
        self.t = t;
    }
}
