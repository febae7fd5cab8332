//! Concurrent cache for node-marginal scores.
//!
//! Keys are 128-bit hashes of (salt, node, sorted neighbor ids); values are
//! the cached f64 scores. The cache stores pure-function results only, so it
//! never affects outputs, only speed: reads are concurrent, inserts
//! synchronized per shard, and eviction drops the least-recently-used half of
//! a full shard.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

const SHARDS: usize = 64;

/// Default capacity; graph moves revisit neighborhoods heavily, so the cache
/// is sized generously.
pub const DEFAULT_CACHE_CAPACITY: usize = 1_000_000;

struct Entry {
    value: f64,
    stamp: u64,
}

pub struct ValueCache {
    shards: Option<Vec<RwLock<HashMap<u128, Entry>>>>,
    per_shard_cap: usize,
    clock: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ValueCache {
    pub fn new(capacity: usize) -> Self {
        let per_shard_cap = (capacity / SHARDS).max(8);
        Self {
            shards: Some((0..SHARDS).map(|_| RwLock::new(HashMap::new())).collect()),
            per_shard_cap,
            clock: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// A cache that never stores anything; used to verify cache transparency.
    pub fn disabled() -> Self {
        Self {
            shards: None,
            per_shard_cap: 0,
            clock: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.shards.is_some()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        match &self.shards {
            Some(shards) => shards.iter().map(|s| s.read().unwrap().len()).sum(),
            None => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the cached value for `key`, or computes, stores, and returns
    /// it. Errors are propagated and nothing is stored.
    pub fn get_or_try_insert<E>(
        &self,
        key: u128,
        compute: impl FnOnce() -> Result<f64, E>,
    ) -> Result<f64, E> {
        let Some(shards) = &self.shards else {
            return compute();
        };
        let shard = &shards[(key >> 64) as usize % SHARDS];
        if let Some(entry) = shard.read().unwrap().get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(entry.value);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let value = compute()?;
        let stamp = self.clock.fetch_add(1, Ordering::Relaxed);
        let mut guard = shard.write().unwrap();
        if guard.len() >= self.per_shard_cap {
            evict_older_half(&mut guard);
        }
        guard.insert(key, Entry { value, stamp });
        Ok(value)
    }
}

fn evict_older_half(map: &mut HashMap<u128, Entry>) {
    let mut stamps: Vec<u64> = map.values().map(|e| e.stamp).collect();
    stamps.sort_unstable();
    let cutoff = stamps[stamps.len() / 2];
    map.retain(|_, e| e.stamp >= cutoff);
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fold(seed: u64, words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = seed;
    for w in words {
        h = mix64(h ^ w.wrapping_mul(GOLDEN));
    }
    h
}

/// 128-bit key for (salt, node, sorted item list): two independently seeded
/// mix chains. Collisions are astronomically unlikely at cache scale.
pub fn hash128(salt: u64, node: u64, items: &[u32]) -> u128 {
    let words = || {
        std::iter::once(node)
            .chain(items.iter().map(|&x| x as u64 + 1))
            .chain(std::iter::once(items.len() as u64 ^ GOLDEN))
    };
    let lo = fold(salt ^ 0x243f_6a88_85a3_08d3, words());
    let hi = fold(salt ^ 0x1319_8a2e_0370_7344, words());
    ((hi as u128) << 64) | lo as u128
}
