//! Array-backed binary min-heap with a key -> slot position map.

use std::collections::HashMap;

use rustc_hash::FxBuildHasher;
use std::hash::Hash;

/// Items stored in an [`IndexedMinHeap`].
pub trait HeapItem {
    type Key: Copy + Eq + Hash;

    fn key(&self) -> Self::Key;

    /// Strict "comes before" relation; the root is the item nothing precedes.
    fn precedes(&self, other: &Self) -> bool;
}

#[derive(Clone, Debug)]
pub struct IndexedMinHeap<T: HeapItem> {
    slots: Vec<T>,
    pos: HashMap<T::Key, usize, FxBuildHasher>,
}

impl<T: HeapItem> Default for IndexedMinHeap<T> {
    fn default() -> Self {
        Self::with_capacity(0)
    }
}

impl<T: HeapItem> IndexedMinHeap<T> {
    pub fn with_capacity(cap: usize) -> Self {
        Self {
            slots: Vec::with_capacity(cap),
            pos: HashMap::with_capacity_and_hasher(cap, FxBuildHasher),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn contains(&self, key: &T::Key) -> bool {
        self.pos.contains_key(key)
    }

    pub fn peek(&self) -> Option<&T> {
        self.slots.first()
    }

    pub fn get(&self, key: &T::Key) -> Option<&T> {
        self.pos.get(key).map(|&i| &self.slots[i])
    }

    /// Mutable access to an item. The caller must not change anything that
    /// `precedes` depends on.
    pub(crate) fn get_mut(&mut self, key: &T::Key) -> Option<&mut T> {
        match self.pos.get(key) {
            Some(&i) => Some(&mut self.slots[i]),
            None => None,
        }
    }

    /// Mutates every item in place. The closure must not change anything
    /// that `precedes` depends on.
    pub(crate) fn for_each_mut(&mut self, mut f: impl FnMut(&mut T)) {
        self.slots.iter_mut().for_each(&mut f);
    }

    /// Items in heap order (slot order), not sorted.
    pub fn as_slice(&self) -> &[T] {
        &self.slots
    }

    /// Inserts an item. Returns it back if the key is already present.
    pub fn push(&mut self, item: T) -> Result<(), T> {
        let key = item.key();
        if self.pos.contains_key(&key) {
            return Err(item);
        }
        let i = self.slots.len();
        self.slots.push(item);
        self.pos.insert(key, i);
        self.sift_up(i);
        Ok(())
    }

    pub fn pop(&mut self) -> Option<T> {
        if self.slots.is_empty() {
            return None;
        }
        let last = self.slots.len() - 1;
        self.swap(0, last);
        let item = self.slots.pop()?;
        self.pos.remove(&item.key());
        if !self.slots.is_empty() {
            self.sift_down(0);
        }
        Some(item)
    }

    /// Replaces the root with `item` and returns the old root; one sift-down.
    /// `item`'s key must not already be present.
    pub fn replace_root(&mut self, item: T) -> Option<T> {
        if self.slots.is_empty() {
            let _ = self.push(item);
            return None;
        }
        debug_assert!(!self.pos.contains_key(&item.key()));
        let old = std::mem::replace(&mut self.slots[0], item);
        self.pos.remove(&old.key());
        self.pos.insert(self.slots[0].key(), 0);
        self.sift_down(0);
        Some(old)
    }

    fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.slots.swap(a, b);
        self.pos.insert(self.slots[a].key(), a);
        self.pos.insert(self.slots[b].key(), b);
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.slots[i].precedes(&self.slots[parent]) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.slots.len();
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut best = i;
            if l < n && self.slots[l].precedes(&self.slots[best]) {
                best = l;
            }
            if r < n && self.slots[r].precedes(&self.slots[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    /// Checks heap order and that the position map is a bijection onto slots.
    pub fn is_consistent(&self) -> bool {
        if self.pos.len() != self.slots.len() {
            return false;
        }
        for (i, item) in self.slots.iter().enumerate() {
            if self.pos.get(&item.key()) != Some(&i) {
                return false;
            }
            if i > 0 && item.precedes(&self.slots[(i - 1) / 2]) {
                return false;
            }
        }
        true
    }
}
