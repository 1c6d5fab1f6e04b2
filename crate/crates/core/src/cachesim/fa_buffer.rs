use std::collections::{BTreeMap, HashMap};

use crate::grid::BlockKey;

/// Fully-associative LRU buffer of keys, filled on every miss.
#[derive(Debug, Clone)]
pub struct FaBuffer {
    capacity: usize,
    stamps: HashMap<BlockKey, u64>,
    by_age: BTreeMap<u64, BlockKey>,
    clock: u64,
    hits: u64,
    accesses: u64,
}

impl FaBuffer {
    /// Panics if `capacity` is zero.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "FA buffer capacity must be at least 1");
        Self {
            capacity,
            stamps: HashMap::with_capacity(capacity),
            by_age: BTreeMap::new(),
            clock: 0,
            hits: 0,
            accesses: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.stamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }

    /// Returns whether `key` was resident; it is most recent afterwards.
    pub fn access(&mut self, key: BlockKey) -> bool {
        self.clock += 1;
        self.accesses += 1;
        let hit = match self.stamps.insert(key, self.clock) {
            Some(old) => {
                self.by_age.remove(&old);
                true
            }
            None => false,
        };
        self.by_age.insert(self.clock, key);
        if self.stamps.len() > self.capacity {
            let (_, oldest) = self.by_age.pop_first().expect("non-empty");
            self.stamps.remove(&oldest);
        }
        if hit {
            self.hits += 1;
        }
        hit
    }

    pub fn remove(&mut self, key: BlockKey) {
        if let Some(stamp) = self.stamps.remove(&key) {
            self.by_age.remove(&stamp);
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn accesses(&self) -> u64 {
        self.accesses
    }
}
