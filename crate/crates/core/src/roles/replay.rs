use std::collections::BTreeSet;

use crate::identity::Timestamp;
use crate::primitives::POINT_LEN;

/// `(T_U, X)` pairs accepted within the freshness window.
///
/// Only requests that pass every check are recorded, so forged traffic
/// cannot fill the cache.
#[derive(Debug, Clone, Default)]
pub struct ReplayCache {
    seen: BTreeSet<(Timestamp, [u8; POINT_LEN])>,
}

impl ReplayCache {
    pub fn contains(&self, t: Timestamp, x: &[u8; POINT_LEN]) -> bool {
        self.seen.contains(&(t, *x))
    }

    pub fn insert(&mut self, t: Timestamp, x: [u8; POINT_LEN]) -> bool {
        self.seen.insert((t, x))
    }

    /// Drops entries whose timestamp can no longer pass the freshness check.
    pub fn prune(&mut self, now: Timestamp, window: u64) {
        let cutoff = now.saturating_sub(window);
        self.seen = self.seen.split_off(&(cutoff, [0u8; POINT_LEN]));
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// `|now - t| <= window`.
pub fn is_fresh(t: Timestamp, now: Timestamp, window: u64) -> bool {
    now.abs_diff(t) <= window
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_is_inclusive() {
        assert!(is_fresh(100, 160, 60));
        assert!(!is_fresh(99, 160, 60));
        assert!(is_fresh(220, 160, 60));
        assert!(!is_fresh(221, 160, 60));
    }

    #[test]
    fn prune_keeps_live_entries() {
        let mut cache = ReplayCache::default();
        cache.insert(10, [1; POINT_LEN]);
        cache.insert(50, [2; POINT_LEN]);
        cache.insert(50, [0; POINT_LEN]);
        cache.prune(110, 60);
        assert!(!cache.contains(10, &[1; POINT_LEN]));
        assert!(cache.contains(50, &[2; POINT_LEN]));
        assert!(cache.contains(50, &[0; POINT_LEN]));
        assert_eq!(cache.len(), 2);
    }
}
