use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use super::item::{DataItem, RawRecord, MAX_ITEMS_PER_RECORD};
use super::jsonpath::JsonPath;
use super::time::{assign_timestamp, TimeAssignment, TimePolicy};
use crate::mapping::ContentType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("payload is not valid JSON: {0}")]
    Json(String),
    #[error("payload is not valid CSV: {0}")]
    Csv(String),
    #[error("CSV record has {found} fields, header has {expected}")]
    FieldCount { expected: usize, found: usize },
    #[error("CSV record arrived before a header")]
    MissingHeader,
}

/// Column names of a CSV source, taken from its first record.
pub type CsvHeader = Arc<[String]>;

#[derive(Debug, Clone, Copy)]
pub enum Formulation<'a> {
    Json(&'a JsonPath),
    Csv(Option<&'a CsvHeader>),
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct ItemBatch {
    pub items: Vec<DataItem>,
    pub time_fallbacks: usize,
}

/// Split one record into items. Decode failures are returned as errors for
/// the caller to count; they never panic.
pub fn generate_items(
    record: &RawRecord,
    formulation: Formulation<'_>,
    policy: &TimePolicy,
) -> Result<ItemBatch, DecodeError> {
    let attribute_sets = match formulation {
        Formulation::Json(path) => json_items(&record.payload, path)?,
        Formulation::Csv(header) => {
            let header = header.ok_or(DecodeError::MissingHeader)?;
            csv_item(&record.payload, header)?.into_iter().collect()
        }
    };
    let mut batch = ItemBatch {
        items: Vec::with_capacity(attribute_sets.len()),
        time_fallbacks: 0,
    };
    for (index, attributes) in attribute_sets.into_iter().enumerate().take(MAX_ITEMS_PER_RECORD) {
        let mut item = DataItem::new(
            attributes,
            record.arrival_time,
            record.source_id,
            DataItem::compose_sequence_no(record.sequence_no, index),
        );
        if assign_timestamp(&mut item, record.arrival_time, policy) == TimeAssignment::Fallback {
            batch.time_fallbacks += 1;
        }
        batch.items.push(item);
    }
    Ok(batch)
}

fn json_items(payload: &[u8], path: &JsonPath) -> Result<Vec<BTreeMap<String, String>>, DecodeError> {
    let doc: Value = serde_json::from_slice(payload).map_err(|e| DecodeError::Json(e.to_string()))?;
    Ok(path
        .select(&doc)
        .into_iter()
        .map(|value| {
            let mut attrs = BTreeMap::new();
            flatten(value, &mut String::new(), &mut attrs);
            attrs
        })
        .collect())
}

/// Flatten nested objects into dotted paths and arrays into `[i]` suffixes.
/// Nulls are dropped; a scalar match is stored under `$`.
pub fn flatten(value: &Value, prefix: &mut String, out: &mut BTreeMap<String, String>) {
    match value {
        Value::Null => {}
        Value::Bool(b) => {
            out.insert(key_or_root(prefix), b.to_string());
        }
        Value::Number(n) => {
            out.insert(key_or_root(prefix), n.to_string());
        }
        Value::String(s) => {
            out.insert(key_or_root(prefix), s.clone());
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                let len = prefix.len();
                prefix.push_str(&format!("[{i}]"));
                flatten(item, prefix, out);
                prefix.truncate(len);
            }
        }
        Value::Object(map) => {
            for (k, v) in map {
                let len = prefix.len();
                if !prefix.is_empty() {
                    prefix.push('.');
                }
                prefix.push_str(k);
                flatten(v, prefix, out);
                prefix.truncate(len);
            }
        }
    }
}

fn key_or_root(prefix: &str) -> String {
    if prefix.is_empty() {
        "$".to_string()
    } else {
        prefix.to_string()
    }
}

fn parse_csv_fields(payload: &[u8]) -> Result<Option<Vec<String>>, DecodeError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(payload);
    let mut record = csv::StringRecord::new();
    match reader.read_record(&mut record) {
        Ok(false) => Ok(None),
        Ok(true) => {
            let fields = record.iter().map(str::to_string).collect();
            // One framed record must hold exactly one CSV row.
            let mut extra = csv::StringRecord::new();
            match reader.read_record(&mut extra) {
                Ok(false) => Ok(Some(fields)),
                Ok(true) => Err(DecodeError::Csv("more than one row in record".into())),
                Err(e) => Err(DecodeError::Csv(e.to_string())),
            }
        }
        Err(e) => Err(DecodeError::Csv(e.to_string())),
    }
}

/// Parse a CSV header row.
pub fn parse_csv_header(payload: &[u8]) -> Result<Option<CsvHeader>, DecodeError> {
    Ok(parse_csv_fields(payload)?.map(Arc::from))
}

fn csv_item(payload: &[u8], header: &CsvHeader) -> Result<Option<BTreeMap<String, String>>, DecodeError> {
    let Some(fields) = parse_csv_fields(payload)? else {
        return Ok(None);
    };
    if fields.len() != header.len() {
        return Err(DecodeError::FieldCount {
            expected: header.len(),
            found: fields.len(),
        });
    }
    Ok(Some(header.iter().cloned().zip(fields).collect()))
}

/// Sequential item generation for one source, tracking the CSV header.
#[derive(Debug, Clone)]
pub struct ItemGenerator {
    content_type: ContentType,
    path: JsonPath,
    header: Option<CsvHeader>,
    policy: TimePolicy,
}

#[derive(Debug, PartialEq, Eq)]
pub enum GenerateOutcome {
    Items(ItemBatch),
    /// The record was consumed as the CSV header.
    Header,
    Failed(DecodeError),
}

impl ItemGenerator {
    pub fn new(content_type: ContentType, path: JsonPath, policy: TimePolicy) -> Self {
        Self {
            content_type,
            path,
            header: None,
            policy,
        }
    }

    pub fn header(&self) -> Option<&CsvHeader> {
        self.header.as_ref()
    }

    /// For CSV sources, capture the first non-empty record as the header.
    /// Returns true if the record was taken as the header.
    pub fn observe_header(&mut self, record: &RawRecord) -> Result<bool, DecodeError> {
        if self.content_type != ContentType::Csv || self.header.is_some() {
            return Ok(false);
        }
        match parse_csv_header(&record.payload)? {
            Some(header) => {
                self.header = Some(header);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    pub fn process(&mut self, record: &RawRecord) -> GenerateOutcome {
        match self.observe_header(record) {
            Ok(true) => return GenerateOutcome::Header,
            Ok(false) => {}
            Err(e) => return GenerateOutcome::Failed(e),
        }
        let formulation = match self.content_type {
            ContentType::Json => Formulation::Json(&self.path),
            ContentType::Csv => Formulation::Csv(self.header.as_ref()),
        };
        match generate_items(record, formulation, &self.policy) {
            Ok(batch) => GenerateOutcome::Items(batch),
            Err(e) => GenerateOutcome::Failed(e),
        }
    }
}
