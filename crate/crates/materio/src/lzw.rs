//! LZW coding of bit strings, used as a signal-complexity measure.
//!
//! The coder works over the two-symbol alphabet {0, 1} with a dictionary
//! that starts at 2 entries and grows by one per emitted code. Only the
//! emitted-code count matters here; no code stream is materialized.

use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Number of reference strings behind the per-length worst-case table.
const BASELINE_SAMPLES: usize = 64;

/// Seed root for the reference strings; fixed so the normalization is
/// reproducible everywhere.
const BASELINE_SEED: u64 = 0x4C5A_57_42_41_53_45;

/// Emitted-code count of the LZW parse of `bits` (entries must be 0 or 1).
pub fn code_count(bits: &[u8]) -> usize {
    // dictionary as a trie over (node, symbol); roots are implicit
    let mut next: HashMap<(u32, u8), u32> = HashMap::new();
    let mut next_code: u32 = 2;
    let mut emitted = 0usize;
    let mut current: Option<u32> = None;
    for &b in bits {
        debug_assert!(b <= 1);
        match current {
            None => current = Some(b as u32),
            Some(node) => match next.get(&(node, b)) {
                Some(&child) => current = Some(child),
                None => {
                    emitted += 1;
                    next.insert((node, b), next_code);
                    next_code += 1;
                    current = Some(b as u32);
                }
            },
        }
    }
    if current.is_some() {
        emitted += 1;
    }
    emitted
}

/// Worst case (maximum) emitted-code count over 64 seeded uniform-random
/// bit strings of the given length. Memoized per length; the table is
/// computed once and read-only afterwards.
pub fn worst_case_count(len: usize) -> usize {
    static TABLE: LazyLock<Mutex<HashMap<usize, usize>>> =
        LazyLock::new(|| Mutex::new(HashMap::new()));
    if let Some(&cached) = TABLE.lock().unwrap().get(&len) {
        return cached;
    }
    let mut worst = 0;
    for i in 0..BASELINE_SAMPLES {
        let mut rng =
            ChaCha8Rng::seed_from_u64(BASELINE_SEED ^ (len as u64).rotate_left(17) ^ i as u64);
        let bits: Vec<u8> = (0..len).map(|_| (rng.next_u64() & 1) as u8).collect();
        worst = worst.max(code_count(&bits));
    }
    TABLE.lock().unwrap().insert(len, worst);
    worst
}
