//! Work and working-set counters for rotation-map and product-entry queries.
//!
//! These stand in for a literal space bound: recursion depth and the number
//! of simultaneously retained vertex/label words are tracked as peaks.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

#[derive(Debug, Default)]
pub struct Metrics {
    rot_base_evals: AtomicU64,
    rot_expander_evals: AtomicU64,
    entry_evals: AtomicU64,
    peak_recursion_depth: AtomicU64,
    peak_live_words: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub rot_base_evals: u64,
    pub rot_expander_evals: u64,
    pub entry_evals: u64,
    pub peak_recursion_depth: u64,
    pub peak_live_words: u64,
}

impl Metrics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&self) {
        self.rot_base_evals.store(0, Ordering::Relaxed);
        self.rot_expander_evals.store(0, Ordering::Relaxed);
        self.entry_evals.store(0, Ordering::Relaxed);
        self.peak_recursion_depth.store(0, Ordering::Relaxed);
        self.peak_live_words.store(0, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> MetricsSnapshot {
        MetricsSnapshot {
            rot_base_evals: self.rot_base_evals.load(Ordering::Relaxed),
            rot_expander_evals: self.rot_expander_evals.load(Ordering::Relaxed),
            entry_evals: self.entry_evals.load(Ordering::Relaxed),
            peak_recursion_depth: self.peak_recursion_depth.load(Ordering::Relaxed),
            peak_live_words: self.peak_live_words.load(Ordering::Relaxed),
        }
    }

    pub(crate) fn base_eval(&self) {
        self.rot_base_evals.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn expander_eval(&self) {
        self.rot_expander_evals.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn entry_eval(&self) {
        self.entry_evals.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn observe_depth(&self, depth: u64, live_words: u64) {
        self.peak_recursion_depth.fetch_max(depth, Ordering::Relaxed);
        self.peak_live_words.fetch_max(live_words, Ordering::Relaxed);
    }
}

impl MetricsSnapshot {
    /// Componentwise sum of counters, max of peaks.
    pub fn merge(self, other: MetricsSnapshot) -> MetricsSnapshot {
        MetricsSnapshot {
            rot_base_evals: self.rot_base_evals + other.rot_base_evals,
            rot_expander_evals: self.rot_expander_evals + other.rot_expander_evals,
            entry_evals: self.entry_evals + other.entry_evals,
            peak_recursion_depth: self.peak_recursion_depth.max(other.peak_recursion_depth),
            peak_live_words: self.peak_live_words.max(other.peak_live_words),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaks_and_reset() {
        let m = Metrics::new();
        m.observe_depth(3, 5);
        m.observe_depth(1, 9);
        m.base_eval();
        let s = m.snapshot();
        assert_eq!(s.peak_recursion_depth, 3);
        assert_eq!(s.peak_live_words, 9);
        assert_eq!(s.rot_base_evals, 1);
        m.reset();
        assert_eq!(m.snapshot(), MetricsSnapshot::default());
    }
}
