use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::line::LineContent;
use super::profile::{CacheProfile, LevelConfig};
use super::SimError;
use crate::grid::{spatial_hash, BlockKey};
use crate::store::BlockHandle;

/// Line index shared by every reserved level: `spatial_hash(key) % nr`.
pub fn pseudoaddress(key: BlockKey, nr: u64) -> u64 {
    assert!(nr >= 1, "pseudoaddress needs at least one reserved line");
    spatial_hash(key) % nr
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub entire_line_read_hits: u64,
    pub entire_line_read_misses: u64,
    pub within_line_read_hits: u64,
    pub within_line_read_misses: u64,
    pub entire_line_write_hits: u64,
    pub entire_line_write_misses: u64,
    pub within_line_write_hits: u64,
    pub within_line_write_misses: u64,
    pub line_evictions: u64,
    /// Lines copied inward after a hit at this level.
    pub writebacks: u64,
    /// Line writes received from an insert that resolved at another level.
    pub writethroughs: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalStats {
    pub kv_lookups: u64,
    pub kv_inserts: u64,
    pub kv_removes: u64,
    pub overall_hits: u64,
    pub lookup_misses: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    /// Keyed by level name ("L1", "L2").
    pub levels: BTreeMap<String, LevelStats>,
    pub global: GlobalStats,
    pub invariant_violations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupOutcome {
    pub handle: Option<BlockHandle>,
    /// Index into the profile's level list of the level that returned the handle.
    pub hit_level: Option<usize>,
    pub levels_visited: usize,
    pub latency_cycles: u64,
}

/// Read-only copy of one reserved line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSnapshot {
    pub pseudoaddress: u64,
    pub slots: Vec<Option<(BlockKey, BlockHandle)>>,
    /// Valid slot indices, most recently used first.
    pub lru_order: Vec<u8>,
}

#[derive(Debug, Clone)]
struct ReservedLine {
    tag: Option<u64>,
    content: LineContent,
}

#[derive(Debug, Clone)]
struct Level {
    cfg: LevelConfig,
    reserved: usize,
    /// `sets * reserved` lines, set-major.
    lines: Vec<ReservedLine>,
    /// Per-set reserved-way indices, most recently used first.
    recency: Vec<Vec<u8>>,
    stats: LevelStats,
}

impl Level {
    fn new(cfg: LevelConfig) -> Self {
        let mut level = Self {
            cfg,
            reserved: 0,
            lines: Vec::new(),
            recency: Vec::new(),
            stats: LevelStats::default(),
        };
        level.reset(0);
        level
    }

    fn reset(&mut self, reserved: usize) {
        let sets = self.cfg.sets as usize;
        let pairs = self.cfg.pairs_per_line();
        self.reserved = reserved;
        self.lines = vec![
            ReservedLine {
                tag: None,
                content: LineContent::empty(pairs),
            };
            sets * reserved
        ];
        self.recency = vec![(0..reserved as u8).collect(); if reserved > 0 { sets } else { 0 }];
        self.stats = LevelStats::default();
    }

    fn set_of(&self, pa: u64) -> usize {
        (pa % self.cfg.sets as u64) as usize
    }

    fn line_index(&self, set: usize, way: usize) -> usize {
        set * self.reserved + way
    }

    fn find(&self, pa: u64) -> Option<usize> {
        let set = self.set_of(pa);
        (0..self.reserved)
            .map(|w| self.line_index(set, w))
            .find(|&i| self.lines[i].tag == Some(pa))
    }

    fn touch(&mut self, idx: usize) {
        let set = idx / self.reserved;
        let way = (idx % self.reserved) as u8;
        let order = &mut self.recency[set];
        if let Some(pos) = order.iter().position(|&w| w == way) {
            order.remove(pos);
        }
        order.insert(0, way);
    }

    /// Claims a line for `pa`: an invalid way if one exists, else the set's
    /// LRU way. Returns the line index and the displaced tag, if any.
    fn claim(&mut self, pa: u64) -> (usize, Option<u64>) {
        let set = self.set_of(pa);
        let way = (0..self.reserved)
            .find(|&w| self.lines[self.line_index(set, w)].tag.is_none())
            .unwrap_or_else(|| *self.recency[set].last().expect("reserved set") as usize);
        let idx = self.line_index(set, way);
        let evicted = self.lines[idx].tag.replace(pa);
        if evicted.is_some() {
            self.stats.line_evictions += 1;
        }
        (idx, evicted)
    }

    fn invalidate(&mut self, pa: u64) {
        if let Some(idx) = self.find(pa) {
            let pairs = self.cfg.pairs_per_line();
            self.lines[idx] = ReservedLine {
                tag: None,
                content: LineContent::empty(pairs),
            };
        }
    }
}

/// Key/handle cache in reserved ways of a set-associative hierarchy.
/// Operations are strictly serial.
#[derive(Debug, Clone)]
pub struct KvCacheHierarchy {
    levels: Vec<Level>,
    /// Indices of levels with reserved ways, innermost first.
    active: Vec<usize>,
    nr: u64,
    global: GlobalStats,
    debug_sweeps: bool,
    violations: u64,
    first_violation: Option<String>,
}

enum Sync {
    /// LRU-bit refresh after a read hit; no data movement counted.
    Refresh,
    WriteBack { source: usize },
    WriteThrough { source: Option<usize> },
}

impl KvCacheHierarchy {
    /// Builds the hierarchy with nothing reserved.
    pub fn new(levels: Vec<LevelConfig>) -> Result<Self, SimError> {
        if levels.is_empty() {
            return Err(SimError::Config("hierarchy has no levels".into()));
        }
        for l in &levels {
            l.validate()?;
        }
        Ok(Self {
            levels: levels.into_iter().map(Level::new).collect(),
            active: Vec::new(),
            nr: 0,
            global: GlobalStats::default(),
            debug_sweeps: false,
            violations: 0,
            first_violation: None,
        })
    }

    /// Builds the hierarchy and reserves each level's configured ways.
    pub fn from_profile(profile: &CacheProfile) -> Result<Self, SimError> {
        profile.validate()?;
        let mut h = Self::new(profile.levels.clone())?;
        for (i, l) in profile.levels.iter().enumerate() {
            h.reserve_lines(i, l.reserved_ways)?;
        }
        Ok(h)
    }

    pub fn level_configs(&self) -> impl Iterator<Item = &LevelConfig> {
        self.levels.iter().map(|l| &l.cfg)
    }

    /// Reserves the first `ways` ways of every set at `level`. Invalidates
    /// every reserved line in the hierarchy and zeroes statistics.
    pub fn reserve_lines(&mut self, level: usize, ways: u32) -> Result<(), SimError> {
        let lvl = self
            .levels
            .get(level)
            .ok_or_else(|| SimError::Config(format!("no cache level {level}")))?;
        if ways > lvl.cfg.ways {
            return Err(SimError::Config(format!(
                "cannot reserve {ways} of {} ways at {}",
                lvl.cfg.ways, lvl.cfg.name
            )));
        }
        let reserved: Vec<usize> = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| if i == level { ways as usize } else { l.reserved })
            .collect();
        for (l, m) in self.levels.iter_mut().zip(reserved) {
            l.reset(m);
        }
        self.recompute();
        Ok(())
    }

    /// Clears every reservation; kv operations fail until re-reserved.
    pub fn unreserve_lines(&mut self) {
        for l in &mut self.levels {
            l.reset(0);
        }
        self.recompute();
    }

    fn recompute(&mut self) {
        self.active = (0..self.levels.len())
            .filter(|&i| self.levels[i].reserved > 0)
            .collect();
        self.nr = self
            .active
            .last()
            .map_or(0, |&i| self.levels[i].lines.len() as u64);
        self.global = GlobalStats::default();
        self.violations = 0;
        self.first_violation = None;
    }

    pub fn is_reserved(&self) -> bool {
        !self.active.is_empty()
    }

    /// Reserved line count of the outermost reserved level (0 when none).
    pub fn nr(&self) -> u64 {
        self.nr
    }

    pub fn reserved_lines(&self, level: usize) -> usize {
        self.levels.get(level).map_or(0, |l| l.lines.len())
    }

    pub fn set_debug_sweeps(&mut self, enabled: bool) {
        self.debug_sweeps = enabled;
    }

    pub fn first_violation(&self) -> Option<&str> {
        self.first_violation.as_deref()
    }

    pub fn stats(&self) -> SimStats {
        SimStats {
            levels: self
                .levels
                .iter()
                .map(|l| (l.cfg.name.clone(), l.stats))
                .collect(),
            global: self.global,
            invariant_violations: self.violations,
        }
    }

    fn pa(&self, key: BlockKey) -> Result<u64, SimError> {
        if self.active.is_empty() {
            return Err(SimError::NotReserved);
        }
        Ok(pseudoaddress(key, self.nr))
    }

    pub fn kv_lookup(&mut self, key: BlockKey) -> Result<LookupOutcome, SimError> {
        let pa = self.pa(key)?;
        self.global.kv_lookups += 1;
        let mut out = LookupOutcome {
            handle: None,
            hit_level: None,
            levels_visited: 0,
            latency_cycles: 0,
        };
        for pos in 0..self.active.len() {
            let li = self.active[pos];
            out.levels_visited += 1;
            out.latency_cycles += self.levels[li].cfg.hit_latency_cycles;
            let level = &mut self.levels[li];
            let Some(idx) = level.find(pa) else {
                level.stats.entire_line_read_misses += 1;
                continue;
            };
            level.stats.entire_line_read_hits += 1;
            let content = &mut level.lines[idx].content;
            match content.find(key) {
                Some(slot) => {
                    level.stats.within_line_read_hits += 1;
                    content.promote(slot);
                    out.handle = content.slots[slot].map(|(_, h)| h);
                    out.hit_level = Some(li);
                    let content = content.clone();
                    let sync = if pos == 0 {
                        Sync::Refresh
                    } else {
                        Sync::WriteBack { source: li }
                    };
                    self.propagate(pa, &content, sync);
                    self.global.overall_hits += 1;
                }
                None => {
                    level.stats.within_line_read_misses += 1;
                    self.touch_present(pa);
                    self.global.lookup_misses += 1;
                }
            }
            self.sweep();
            return Ok(out);
        }
        self.global.lookup_misses += 1;
        self.sweep();
        Ok(out)
    }

    pub fn kv_insert(&mut self, key: BlockKey, handle: BlockHandle) -> Result<(), SimError> {
        if handle == BlockHandle::INVALID {
            return Err(SimError::InvalidHandle);
        }
        let pa = self.pa(key)?;
        self.global.kv_inserts += 1;
        let mut source = None;
        for &li in &self.active {
            let level = &mut self.levels[li];
            if level.find(pa).is_some() {
                level.stats.entire_line_write_hits += 1;
                source = Some(li);
                break;
            }
            level.stats.entire_line_write_misses += 1;
        }
        let mut content = match source {
            Some(li) => {
                let level = &self.levels[li];
                level.lines[level.find(pa).expect("tag hit")].content.clone()
            }
            None => LineContent::empty(self.levels[self.active[0]].cfg.pairs_per_line()),
        };
        let existed = content.upsert(key, handle);
        if let Some(li) = source {
            let stats = &mut self.levels[li].stats;
            if existed {
                stats.within_line_write_hits += 1;
            } else {
                stats.within_line_write_misses += 1;
            }
        }
        self.propagate(pa, &content, Sync::WriteThrough { source });
        self.sweep();
        Ok(())
    }

    pub fn kv_remove(&mut self, key: BlockKey) -> Result<(), SimError> {
        let pa = self.pa(key)?;
        self.global.kv_removes += 1;
        let outer = *self.active.last().expect("reserved");
        let level = &self.levels[outer];
        if let Some(idx) = level.find(pa) {
            let mut content = level.lines[idx].content.clone();
            if content.invalidate(key) {
                for &li in &self.active {
                    let level = &mut self.levels[li];
                    if let Some(idx) = level.find(pa) {
                        level.lines[idx].content = content.clone();
                    }
                }
            }
        }
        self.sweep();
        Ok(())
    }

    fn touch_present(&mut self, pa: u64) {
        for &li in &self.active {
            let level = &mut self.levels[li];
            if let Some(idx) = level.find(pa) {
                level.touch(idx);
            }
        }
    }

    /// Writes `content` as line `pa` at every reserved level, outermost first,
    /// installing where absent. A line displaced at an outer level is also
    /// dropped from inner levels to keep inclusion.
    fn propagate(&mut self, pa: u64, content: &LineContent, sync: Sync) {
        for pos in (0..self.active.len()).rev() {
            let li = self.active[pos];
            let idx = match self.levels[li].find(pa) {
                Some(idx) => idx,
                None => {
                    let (idx, evicted) = self.levels[li].claim(pa);
                    if let Some(victim) = evicted {
                        for &inner in &self.active[..pos] {
                            self.levels[inner].invalidate(victim);
                        }
                    }
                    idx
                }
            };
            match sync {
                Sync::Refresh => {}
                Sync::WriteBack { source } => {
                    if li < source {
                        self.levels[source].stats.writebacks += 1;
                    }
                }
                Sync::WriteThrough { source } => {
                    if source != Some(li) {
                        self.levels[li].stats.writethroughs += 1;
                    }
                }
            }
            let level = &mut self.levels[li];
            level.lines[idx].content = content.clone();
            level.touch(idx);
        }
    }

    pub fn line_snapshot(&self, level: usize, pa: u64) -> Option<LineSnapshot> {
        let l = self.levels.get(level)?;
        if l.reserved == 0 {
            return None;
        }
        let idx = l.find(pa)?;
        let c = &l.lines[idx].content;
        Some(LineSnapshot {
            pseudoaddress: pa,
            slots: c.slots.clone(),
            lru_order: c.order.clone(),
        })
    }

    /// Valid reserved lines at `level`.
    pub fn snapshots(&self, level: usize) -> Vec<LineSnapshot> {
        let Some(l) = self.levels.get(level) else {
            return Vec::new();
        };
        l.lines
            .iter()
            .filter_map(|line| {
                line.tag.map(|pa| LineSnapshot {
                    pseudoaddress: pa,
                    slots: line.content.slots.clone(),
                    lru_order: line.content.order.clone(),
                })
            })
            .collect()
    }

    fn sweep(&mut self) {
        if !self.debug_sweeps {
            return;
        }
        let found = self.check_invariants();
        if let Some(first) = found.first() {
            self.violations += found.len() as u64;
            self.first_violation.get_or_insert_with(|| first.clone());
        }
    }

    /// Full-state check of homogeneity, set/tag placement, LRU-order
    /// validity and write-through inclusion. Returns one message per
    /// violation.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (pos, &li) in self.active.iter().enumerate() {
            let level = &self.levels[li];
            let name = &level.cfg.name;
            for (idx, line) in level.lines.iter().enumerate() {
                let set = idx / level.reserved;
                let Some(pa) = line.tag else {
                    if line.content.pairs().next().is_some() {
                        errs.push(format!("{name} line {idx}: invalid line holds pairs"));
                    }
                    continue;
                };
                if pa >= self.nr || level.set_of(pa) != set {
                    errs.push(format!("{name} line {idx}: pa {pa} misplaced in set {set}"));
                }
                let c = &line.content;
                for (k, _) in c.pairs() {
                    let kp = pseudoaddress(k, self.nr);
                    if kp != pa {
                        errs.push(format!("{name} line {idx}: key {k} has pa {kp}, line pa {pa}"));
                    }
                }
                let mut valid: Vec<u8> = (0..c.slots.len() as u8)
                    .filter(|&s| c.slots[s as usize].is_some())
                    .collect();
                let mut order = c.order.clone();
                order.sort_unstable();
                valid.sort_unstable();
                if order != valid {
                    errs.push(format!("{name} line {idx}: LRU order is not a permutation of valid slots"));
                }
                let mut keys: Vec<BlockKey> = c.pairs().map(|(k, _)| k).collect();
                keys.sort_unstable();
                if keys.windows(2).any(|w| w[0] == w[1]) {
                    errs.push(format!("{name} line {idx}: duplicate key"));
                }
                if let Some(&outer) = self.active[pos + 1..].first() {
                    let o = &self.levels[outer];
                    match o.find(pa) {
                        Some(oi) if o.lines[oi].content == *c => {}
                        Some(_) => errs.push(format!("{name} pa {pa}: content differs at {}", o.cfg.name)),
                        None => errs.push(format!("{name} pa {pa}: missing at {}", o.cfg.name)),
                    }
                }
            }
            for (set, order) in level.recency.iter().enumerate() {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != (0..level.reserved as u8).collect::<Vec<_>>() {
                    errs.push(format!("{name} set {set}: line LRU order corrupt"));
                }
                let tags: Vec<u64> = (0..level.reserved)
                    .filter_map(|w| level.lines[level.line_index(set, w)].tag)
                    .collect();
                let mut dedup = tags.clone();
                dedup.sort_unstable();
                dedup.dedup();
                if dedup.len() != tags.len() {
                    errs.push(format!("{name} set {set}: duplicate tag"));
                }
            }
        }
        errs
    }
}
