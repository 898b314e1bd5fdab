use std::collections::VecDeque;

use rayon::prelude::*;

use super::Objective;
use crate::em::RisConfiguration;
use crate::error::Result;
use crate::qos::{Fitness, ThroughputReport};

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub config: RisConfiguration,
    /// `(step, iteration)` at which the entry was stored.
    pub stored_at: (usize, usize),
    pub cost_at_store: f64,
}

/// Bounded pool of good configurations, oldest evicted first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryPool {
    capacity: usize,
    entries: VecDeque<MemoryEntry>,
}

impl MemoryPool {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, entries: VecDeque::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &MemoryEntry> {
        self.entries.iter()
    }

    pub fn contains(&self, config: &RisConfiguration) -> bool {
        self.entries.iter().any(|e| &e.config == config)
    }

    /// Stores `config` unless already present. Returns whether it was added.
    pub fn insert(&mut self, config: RisConfiguration, stored_at: (usize, usize), cost: f64) -> bool {
        if self.capacity == 0 || self.contains(&config) {
            return false;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(MemoryEntry { config, stored_at, cost_at_store: cost });
        true
    }

    /// Best entry when every entry is re-scored with `objective`.
    pub fn best_under<O: Objective + ?Sized>(
        &self,
        objective: &O,
    ) -> Result<Option<(RisConfiguration, ThroughputReport)>> {
        let reports: Vec<ThroughputReport> = self
            .entries
            .par_iter()
            .map(|e| objective.evaluate(&e.config))
            .collect::<Result<_>>()?;
        let mut best: Option<(usize, Fitness)> = None;
        for (i, r) in reports.iter().enumerate() {
            let f = r.fitness();
            if best.is_none_or(|(_, b)| f.is_better_than(&b)) {
                best = Some((i, f));
            }
        }
        Ok(best.map(|(i, _)| (self.entries[i].config.clone(), reports[i].clone())))
    }
}
