//! Source connection, record framing, item generation, timestamps and
//! partitioning.

mod generate;
mod item;
pub mod jsonpath;
mod partition;
mod source;
mod time;

pub use generate::{
    flatten, generate_items, parse_csv_header, CsvHeader, DecodeError, Formulation,
    GenerateOutcome, ItemBatch, ItemGenerator,
};
pub use item::{DataItem, RawRecord, SourceId, ITEM_INDEX_BITS, MAX_ITEMS_PER_RECORD};
pub use jsonpath::JsonPath;
pub use partition::{partition_for_key, Partitioner, Route};
pub use source::{open_source, RecordStream};
pub use time::{
    assign_timestamp, clock_on_day, parse_field_time, FieldFormat, TimeAssignment, TimeMode,
    TimePolicy,
};
