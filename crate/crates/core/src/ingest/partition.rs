use std::hash::Hasher;
use std::num::NonZeroUsize;

use fnv::FnvHasher;

use super::item::DataItem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Partition(usize),
    /// The key attribute was missing.
    DeadLetter,
}

/// Partition index for a key value. Pure: the same key and parallelism always
/// give the same index, across runs and platforms.
pub fn partition_for_key(key: &str, parallelism: NonZeroUsize) -> usize {
    let mut hasher = FnvHasher::default();
    hasher.write(key.as_bytes());
    // Fold the high half in so the modulus sees every byte of the hash.
    let h = hasher.finish();
    ((h ^ (h >> 32)) % parallelism.get() as u64) as usize
}

/// Routes items to downstream instances: by key when a key attribute is
/// configured, round-robin otherwise.
#[derive(Debug, Clone)]
pub struct Partitioner {
    key_attr: Option<String>,
    parallelism: NonZeroUsize,
    next: usize,
}

impl Partitioner {
    pub fn new(key_attr: Option<String>, parallelism: NonZeroUsize) -> Self {
        Self {
            key_attr,
            parallelism,
            next: 0,
        }
    }

    pub fn partition(&mut self, item: &DataItem) -> Route {
        match &self.key_attr {
            Some(attr) => match item.get(attr) {
                Some(key) => Route::Partition(partition_for_key(key, self.parallelism)),
                None => Route::DeadLetter,
            },
            None => {
                let index = self.next;
                self.next = (self.next + 1) % self.parallelism.get();
                Route::Partition(index)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::item::SourceId;
    use std::collections::BTreeMap;

    fn nz(n: usize) -> NonZeroUsize {
        NonZeroUsize::new(n).unwrap()
    }

    fn item(id: Option<&str>) -> DataItem {
        let mut attrs = BTreeMap::new();
        if let Some(id) = id {
            attrs.insert("id".to_string(), id.to_string());
        }
        DataItem::new(attrs, 1, SourceId(0), 0)
    }

    #[test]
    fn same_key_same_partition() {
        let first = partition_for_key("lane1", nz(4));
        for _ in 0..100 {
            assert_eq!(partition_for_key("lane1", nz(4)), first);
        }
        assert!(first < 4);
    }

    #[test]
    fn parallelism_one_is_always_zero() {
        for key in ["a", "lane1", "", "zzz"] {
            assert_eq!(partition_for_key(key, nz(1)), 0);
        }
    }

    #[test]
    fn missing_key_goes_to_dead_letter() {
        let mut p = Partitioner::new(Some("id".into()), nz(4));
        assert_eq!(p.partition(&item(None)), Route::DeadLetter);
        assert!(matches!(p.partition(&item(Some("x"))), Route::Partition(_)));
    }

    #[test]
    fn round_robin_without_key() {
        let mut p = Partitioner::new(None, nz(3));
        let routes: Vec<Route> = (0..6).map(|_| p.partition(&item(None))).collect();
        assert_eq!(
            routes,
            [0, 1, 2, 0, 1, 2].map(Route::Partition).to_vec()
        );
    }
}
