use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Per-theorem exponential average of episode outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyTracker {
    pub decay: f64,
    rates: BTreeMap<String, f64>,
}

impl Default for DifficultyTracker {
    fn default() -> Self {
        DifficultyTracker {
            decay: 0.9,
            rates: BTreeMap::new(),
        }
    }
}

impl DifficultyTracker {
    /// Tracker with every listed theorem at rate 0.
    pub fn new<S: AsRef<str>>(theorems: impl IntoIterator<Item = S>) -> DifficultyTracker {
        let mut t = DifficultyTracker::default();
        for name in theorems {
            t.rates.insert(name.as_ref().to_string(), 0.0);
        }
        t
    }

    pub fn rate(&self, theorem: &str) -> f64 {
        self.rates.get(theorem).copied().unwrap_or(0.0)
    }

    /// Mean rate over every theorem seen so far (0 when none).
    pub fn mean_rate(&self) -> f64 {
        if self.rates.is_empty() {
            0.0
        } else {
            self.rates.values().sum::<f64>() / self.rates.len() as f64
        }
    }

    pub fn record(&mut self, theorem: &str, proved: bool) {
        let r = self.rates.entry(theorem.to_string()).or_insert(0.0);
        *r = self.decay * *r + (1.0 - self.decay) * if proved { 1.0 } else { 0.0 };
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}
