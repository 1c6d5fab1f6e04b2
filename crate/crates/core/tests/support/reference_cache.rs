//! Straightforward reference for the reserved-way cache: explicit per-set
//! MRU lists of pseudoaddresses at each level, and one MRU-ordered pair list
//! per pseudoaddress shared by all levels.

use std::collections::HashMap;

use voxkv_core::cachesim::{pseudoaddress, CacheProfile};
use voxkv_core::grid::BlockKey;
use voxkv_core::store::BlockHandle;

struct RefLevel {
    sets: u64,
    ways: usize,
    lists: HashMap<u64, Vec<u64>>,
}

impl RefLevel {
    fn contains(&self, pa: u64) -> bool {
        self.lists.get(&(pa % self.sets)).is_some_and(|l| l.contains(&pa))
    }

    fn promote(&mut self, pa: u64) {
        if let Some(l) = self.lists.get_mut(&(pa % self.sets)) {
            if let Some(i) = l.iter().position(|&p| p == pa) {
                l.remove(i);
                l.insert(0, pa);
            }
        }
    }

    /// Returns the displaced pa, if any.
    fn install(&mut self, pa: u64) -> Option<u64> {
        let l = self.lists.entry(pa % self.sets).or_default();
        let victim = if l.len() == self.ways { l.pop() } else { None };
        l.insert(0, pa);
        victim
    }

    fn drop_pa(&mut self, pa: u64) {
        if let Some(l) = self.lists.get_mut(&(pa % self.sets)) {
            l.retain(|&p| p != pa);
        }
    }
}

pub struct ReferenceCache {
    levels: Vec<RefLevel>,
    nr: u64,
    pairs: usize,
    lines: HashMap<u64, Vec<(BlockKey, BlockHandle)>>,
}

impl ReferenceCache {
    pub fn new(profile: &CacheProfile) -> Self {
        let levels: Vec<RefLevel> = profile
            .levels
            .iter()
            .filter(|l| l.reserved_ways > 0)
            .map(|l| RefLevel {
                sets: l.sets as u64,
                ways: l.reserved_ways as usize,
                lists: HashMap::new(),
            })
            .collect();
        let outer = profile.levels.iter().rev().find(|l| l.reserved_ways > 0).unwrap();
        Self {
            nr: outer.sets as u64 * outer.reserved_ways as u64,
            pairs: (profile.levels[0].line_bytes / 20) as usize,
            levels,
            lines: HashMap::new(),
        }
    }

    pub fn nr(&self) -> u64 {
        self.nr
    }

    fn promote_everywhere(&mut self, pa: u64) {
        for l in &mut self.levels {
            l.promote(pa);
        }
    }

    fn install_at(&mut self, level: usize, pa: u64) {
        if let Some(victim) = self.levels[level].install(pa) {
            if level == self.levels.len() - 1 {
                self.lines.remove(&victim);
            }
            for inner in &mut self.levels[..level] {
                inner.drop_pa(victim);
            }
        }
    }

    /// Returns the handle and the index (among reserved levels) that hit.
    pub fn lookup(&mut self, key: BlockKey) -> (Option<BlockHandle>, Option<usize>) {
        let pa = pseudoaddress(key, self.nr);
        for i in 0..self.levels.len() {
            if !self.levels[i].contains(pa) {
                continue;
            }
            let line = self.lines.get_mut(&pa).unwrap();
            let Some(pos) = line.iter().position(|(k, _)| *k == key) else {
                self.promote_everywhere(pa);
                return (None, None);
            };
            let pair = line.remove(pos);
            line.insert(0, pair);
            for j in (0..i).rev() {
                self.install_at(j, pa);
            }
            self.promote_everywhere(pa);
            return (Some(pair.1), Some(i));
        }
        (None, None)
    }

    pub fn insert(&mut self, key: BlockKey, handle: BlockHandle) {
        let pa = pseudoaddress(key, self.nr);
        let hit = (0..self.levels.len()).find(|&i| self.levels[i].contains(pa));
        let first_missing = hit.unwrap_or(self.levels.len());
        if hit.is_none() {
            self.lines.insert(pa, Vec::new());
        }
        for j in (0..first_missing).rev() {
            self.install_at(j, pa);
        }
        self.promote_everywhere(pa);
        let line = self.lines.get_mut(&pa).unwrap();
        if let Some(pos) = line.iter().position(|(k, _)| *k == key) {
            line.remove(pos);
        } else if line.len() == self.pairs {
            line.pop();
        }
        line.insert(0, (key, handle));
    }

    pub fn remove(&mut self, key: BlockKey) {
        let pa = pseudoaddress(key, self.nr);
        if let Some(line) = self.lines.get_mut(&pa) {
            line.retain(|(k, _)| *k != key);
        }
    }
}
