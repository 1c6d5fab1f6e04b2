use crate::grid::BlockKey;
use crate::store::BlockHandle;

/// Stored bytes per pair: 12-byte key + 8-byte handle.
pub const PAIR_BYTES: u32 = 20;

/// Packed pair slots plus within-line LRU state. `order` lists the valid
/// slot indices, most recently used first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LineContent {
    pub slots: Vec<Option<(BlockKey, BlockHandle)>>,
    pub order: Vec<u8>,
}

impl LineContent {
    pub fn empty(pairs: usize) -> Self {
        Self {
            slots: vec![None; pairs],
            order: Vec::with_capacity(pairs),
        }
    }

    pub fn find(&self, key: BlockKey) -> Option<usize> {
        self.slots
            .iter()
            .position(|s| matches!(s, Some((k, _)) if *k == key))
    }

    pub fn promote(&mut self, slot: usize) {
        let s = slot as u8;
        if let Some(pos) = self.order.iter().position(|&o| o == s) {
            self.order.remove(pos);
        }
        self.order.insert(0, s);
    }

    /// Writes the pair; returns true when the key was already present.
    /// A new key takes the lowest free slot, else the within-line LRU slot.
    pub fn upsert(&mut self, key: BlockKey, handle: BlockHandle) -> bool {
        if let Some(i) = self.find(key) {
            self.slots[i] = Some((key, handle));
            self.promote(i);
            return true;
        }
        let slot = match self.slots.iter().position(Option::is_none) {
            Some(free) => free,
            None => *self.order.last().expect("full line has an LRU slot") as usize,
        };
        self.slots[slot] = Some((key, handle));
        self.promote(slot);
        false
    }

    /// Writes the invalid marker into the key's slot; it drops out of the LRU
    /// order and becomes the first slot reused.
    pub fn invalidate(&mut self, key: BlockKey) -> bool {
        match self.find(key) {
            Some(i) => {
                self.slots[i] = None;
                self.order.retain(|&o| o as usize != i);
                true
            }
            None => false,
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (BlockKey, BlockHandle)> + '_ {
        self.slots.iter().flatten().copied()
    }
}
