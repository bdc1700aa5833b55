//! Odd-only packed Eratosthenes sieve, processed in cache-sized segments.

use crate::{Error, Result};

/// Odd numbers handled per sieving segment (2^20 odds = 128 KiB of bits).
pub const DEFAULT_BLOCK_ODDS: usize = 1 << 20;

/// Odds covered by one cumulative-count chunk (eight 64-bit words).
const CHUNK_ODDS: u64 = 512;
const WORDS_PER_CHUNK: usize = 8;

/// Primality and prime counting for every integer up to `limit`.
///
/// Bit `i` of the packed array stands for the odd number `2i + 1`; the prime
/// 2 is handled out of band. Besides the bitset the table keeps the number of
/// odd primes below every 512-odd chunk so that `pi` costs at most eight
/// popcounts.
#[derive(Clone)]
pub struct PrimeTable {
    limit: u64,
    bits: Vec<u64>,
    cumulative: Vec<u64>,
}

impl std::fmt::Debug for PrimeTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrimeTable")
            .field("limit", &self.limit)
            .field("primes", &self.prime_count())
            .finish()
    }
}

/// Odd primes up to `limit` by a plain (unsegmented) sieve. Only used for
/// base primes, so `limit` is at most a few million.
pub(crate) fn small_odd_primes(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let n = (limit as usize - 1) / 2 + 1;
    let mut composite = vec![false; n];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut k = (p * p - 1) / 2;
            while k < n {
                composite[k] = true;
                k += p;
            }
        }
        i += 1;
    }
    (1..n)
        .filter(|&i| !composite[i])
        .map(|i| 2 * i as u64 + 1)
        .collect()
}

pub(crate) fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Clear the bits of odd composites in the index range `[lo, hi)` of `words`,
/// where `words[0]` bit 0 corresponds to odd index `base`.
fn cross_off(words: &mut [u64], base: u64, lo: u64, hi: u64, base_primes: &[u64]) {
    let top = 2 * (hi - 1) + 1;
    for &p in base_primes {
        if p * p > top {
            break;
        }
        // first odd multiple m >= max(p^2, 2lo+1), index (m-1)/2
        let start_val = (2 * lo + 1).max(p * p);
        let mut m = start_val.div_ceil(p) * p;
        if m % 2 == 0 {
            m += p;
        }
        let mut idx = (m - 1) / 2;
        while idx < hi {
            let rel = (idx - base) as usize;
            words[rel / 64] &= !(1u64 << (rel % 64));
            idx += p;
        }
    }
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_block(limit, DEFAULT_BLOCK_ODDS)
    }

    pub fn with_block(limit: u64, block_odds: usize) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        if block_odds == 0 || block_odds % 64 != 0 {
            return Err(Error::InvalidArgument(format!(
                "block size must be a positive multiple of 64, got {block_odds}"
            )));
        }
        let n_odds = (limit - 1) / 2 + 1; // odd numbers 1, 3, ..., <= limit
        let n_words = (n_odds as usize).div_ceil(64);
        let mut bits = vec![u64::MAX; n_words];
        let base_primes = small_odd_primes(isqrt(limit));

        let block = block_odds as u64;
        let mut lo = 0u64;
        while lo < n_odds {
            let hi = (lo + block).min(n_odds);
            let w0 = (lo / 64) as usize;
            let w1 = (hi as usize).div_ceil(64);
            cross_off(&mut bits[w0..w1], lo, lo, hi, &base_primes);
            lo = hi;
        }
        // 1 is not prime; trim bits past the limit
        bits[0] &= !1;
        let tail = n_odds % 64;
        if tail != 0 {
            bits[n_words - 1] &= (1u64 << tail) - 1;
        }

        let mut cumulative = Vec::with_capacity(n_words / WORDS_PER_CHUNK + 2);
        let mut acc = 0u64;
        for chunk in bits.chunks(WORDS_PER_CHUNK) {
            cumulative.push(acc);
            acc += chunk.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        }
        cumulative.push(acc);
        Ok(Self {
            limit,
            bits,
            cumulative,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Total number of primes `<= limit`.
    pub fn prime_count(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0) + 1
    }

    /// # Panics
    /// If `n > limit`.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(
            n <= self.limit,
            "{n} is beyond the sieve limit {}",
            self.limit
        );
        if n == 2 {
            return true;
        }
        if n % 2 == 0 {
            return false;
        }
        let i = (n / 2) as usize;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Exact `pi(x)` for `x <= limit`.
    ///
    /// # Panics
    /// If `x > limit`.
    pub fn pi(&self, x: u64) -> u64 {
        assert!(
            x <= self.limit,
            "{x} is beyond the sieve limit {}",
            self.limit
        );
        if x < 2 {
            return 0;
        }
        let idx = (if x % 2 == 0 { x - 1 } else { x } / 2) as usize;
        let chunk = idx / CHUNK_ODDS as usize;
        let word = idx / 64;
        let mut count = self.cumulative[chunk];
        for w in &self.bits[chunk * WORDS_PER_CHUNK..word] {
            count += w.count_ones() as u64;
        }
        let bit = idx % 64;
        let mask = if bit == 63 {
            u64::MAX
        } else {
            (1u64 << (bit + 1)) - 1
        };
        count += (self.bits[word] & mask).count_ones() as u64;
        count + 1
    }

    /// The `n`-th prime (1-based).
    pub fn nth_prime(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::InvalidArgument("nth_prime is 1-based".into()));
        }
        if n > self.prime_count() {
            return Err(Error::CapacityExceeded(format!(
                "the {n}-th prime lies beyond the sieve limit {} (only {} primes); widen the sieve",
                self.limit,
                self.prime_count()
            )));
        }
        if n == 1 {
            return Ok(2);
        }
        let target = n - 1; // among odd primes
                            // last chunk whose starting count is < target
        let chunk = self.cumulative.partition_point(|&c| c < target) - 1;
        let mut remaining = target - self.cumulative[chunk];
        let mut w = chunk * WORDS_PER_CHUNK;
        loop {
            let ones = self.bits[w].count_ones() as u64;
            if ones >= remaining {
                let mut word = self.bits[w];
                for _ in 1..remaining {
                    word &= word - 1;
                }
                let bit = word.trailing_zeros() as u64;
                return Ok(2 * (w as u64 * 64 + bit) + 1);
            }
            remaining -= ones;
            w += 1;
        }
    }

    /// Primes in `[lo, hi]`, clipped to the sieve limit, ascending.
    pub fn primes_between(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.limit);
        let two = (lo <= 2 && hi >= 2).then_some(2);
        let start = lo.max(3);
        let odd_lo = (start / 2) as usize;
        let odd_hi = if hi >= 3 { (hi - 1) / 2 + 1 } else { 0 } as usize;
        two.into_iter().chain(
            (odd_lo..odd_hi.max(odd_lo))
                .filter(move |&i| self.bits[i / 64] >> (i % 64) & 1 == 1)
                .map(|i| 2 * i as u64 + 1),
        )
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes_between(2, self.limit)
    }
}

/// Primes in `[lo, hi)` by sieving only that window. `base` must contain every
/// prime up to `sqrt(hi - 1)`.
pub fn primes_in_window(lo: u64, hi: u64, base: &PrimeTable) -> Result<Vec<u64>> {
    if hi <= lo {
        return Ok(Vec::new());
    }
    let root = isqrt(hi - 1);
    if root > base.limit() {
        return Err(Error::CapacityExceeded(format!(
            "window [{lo}, {hi}) needs base primes up to {root}, sieve limit is {}",
            base.limit()
        )));
    }
    if hi - 1 <= base.limit() {
        return Ok(base.primes_between(lo, hi - 1).collect());
    }
    let mut out = Vec::new();
    if lo <= 2 && hi > 2 {
        out.push(2);
    }
    // odd numbers in [max(lo, 3), hi); odd n has index n / 2
    let first_odd = lo.max(3) | 1;
    let last_odd = if (hi - 1) % 2 == 1 { hi - 1 } else { hi - 2 };
    if last_odd < first_odd {
        return Ok(out);
    }
    let (first, last) = (first_odd / 2, last_odd / 2 + 1);
    let len = (last - first) as usize;
    let mut words = vec![u64::MAX; len.div_ceil(64)];
    let odd_base: Vec<u64> = base.primes_between(3, root).collect();
    cross_off(&mut words, first, first, last, &odd_base);
    for rel in 0..len {
        if words[rel / 64] >> (rel % 64) & 1 == 1 {
            out.push(2 * (first + rel as u64) + 1);
        }
    }
    Ok(out)
}

/// `pi(limit)` by a segmented sieve that never holds more than one segment.
pub fn count_primes_segmented(limit: u64) -> u64 {
    if limit < 2 {
        return 0;
    }
    let n_odds = (limit - 1) / 2 + 1;
    let base_primes = small_odd_primes(isqrt(limit));
    let block = DEFAULT_BLOCK_ODDS as u64;
    let mut words = vec![0u64; DEFAULT_BLOCK_ODDS / 64];
    let mut total = 1; // the prime 2
    let mut lo = 0u64;
    while lo < n_odds {
        let hi = (lo + block).min(n_odds);
        let len = (hi - lo) as usize;
        let nw = len.div_ceil(64);
        words[..nw].fill(u64::MAX);
        cross_off(&mut words[..nw], lo, lo, hi, &base_primes);
        if lo == 0 {
            words[0] &= !1;
        }
        if len % 64 != 0 {
            words[nw - 1] &= (1u64 << (len % 64)) - 1;
        }
        total += words[..nw]
            .iter()
            .map(|w| w.count_ones() as u64)
            .sum::<u64>();
        lo = hi;
    }
    total
}
