//! Seeded 64-bit linear congruential generator.
//!
//! Sampling in the check suites must be reproducible across runs and across
//! language ports, so the generator is pinned here rather than borrowed from
//! a library:
//!
//! ```text
//! state ← state · 6364136223846793005 + 1442695040888963407   (mod 2⁶⁴)
//! ```
//!
//! `next_u64` returns the full updated state.  Derived samplers are defined
//! in terms of `next_u64` only:
//!
//! - `next_range(lo, hi)` = `lo + (next_u64 mod (hi − lo + 1))`, inclusive;
//! - `next_f64` = `(next_u64 >> 11) / 2⁵³`.

const MUL: u64 = 6364136223846793005;
const INC: u64 = 1442695040888963407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Lcg64 {
        Lcg64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MUL).wrapping_add(INC);
        self.state
    }

    /// Uniform-ish integer in `lo..=hi` (modulo bias is irrelevant at the
    /// tiny ranges used here, and the rule must stay portable).
    pub fn next_range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        assert!(!items.is_empty());
        let i = (self.next_u64() % items.len() as u64) as usize;
        &items[i]
    }
}
