use std::ops::Sub;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Shared tally of geometric queries. Every validity or clearance query bumps
/// exactly one field.
#[derive(Debug, Default)]
pub struct CollisionCounter {
    full: AtomicU64,
    partial: AtomicU64,
    clearance: AtomicU64,
}

impl CollisionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn bump_full(&self) {
        self.full.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn bump_partial(&self) {
        self.partial.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn bump_clearance(&self) {
        self.clearance.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CdSnapshot {
        CdSnapshot {
            full_cd_calls: self.full.load(Ordering::Relaxed),
            partial_cd_calls: self.partial.load(Ordering::Relaxed),
            clearance_calls: self.clearance.load(Ordering::Relaxed),
        }
    }

    /// Only meaningful between runs.
    pub fn reset(&self) {
        self.full.store(0, Ordering::Relaxed);
        self.partial.store(0, Ordering::Relaxed);
        self.clearance.store(0, Ordering::Relaxed);
    }
}

/// Point-in-time copy of a [`CollisionCounter`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdSnapshot {
    pub full_cd_calls: u64,
    pub partial_cd_calls: u64,
    pub clearance_calls: u64,
}

impl CdSnapshot {
    pub fn total(&self) -> u64 {
        self.full_cd_calls + self.partial_cd_calls + self.clearance_calls
    }
}

impl Sub for CdSnapshot {
    type Output = CdSnapshot;
    fn sub(self, rhs: Self) -> Self {
        CdSnapshot {
            full_cd_calls: self.full_cd_calls - rhs.full_cd_calls,
            partial_cd_calls: self.partial_cd_calls - rhs.partial_cd_calls,
            clearance_calls: self.clearance_calls - rhs.clearance_calls,
        }
    }
}
