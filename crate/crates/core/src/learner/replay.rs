use std::collections::BTreeMap;

use rand::Rng;

use crate::env::Action;

pub const REPLAY_CAPACITY: usize = 5;

/// Most recent successful action sequences per theorem, newest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayBuffer {
    proofs: BTreeMap<String, Vec<Vec<Action>>>,
}

impl ReplayBuffer {
    pub fn push(&mut self, theorem: &str, actions: Vec<Action>) {
        let q = self.proofs.entry(theorem.to_string()).or_default();
        q.insert(0, actions);
        q.truncate(REPLAY_CAPACITY);
    }

    pub fn get(&self, theorem: &str) -> &[Vec<Action>] {
        self.proofs.get(theorem).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self, theorem: &str) -> usize {
        self.proofs.get(theorem).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.proofs.values().all(Vec::is_empty)
    }

    /// A uniformly chosen stored proof and its slot.
    pub fn pick(&self, theorem: &str, rng: &mut impl Rng) -> Option<(usize, &[Action])> {
        let q = self.proofs.get(theorem).filter(|q| !q.is_empty())?;
        let slot = rng.gen_range(0..q.len());
        Some((slot, &q[slot]))
    }

    /// Drops a stale entry.
    pub fn evict(&mut self, theorem: &str, slot: usize) {
        if let Some(q) = self.proofs.get_mut(theorem) {
            if slot < q.len() {
                q.remove(slot);
            }
        }
    }
}
