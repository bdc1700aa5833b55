//! Sublinear prime counting by the Lucy/Legendre `S(v, p)` recurrence.
//!
//! For a fixed `v` the recurrence produces `pi(floor(v / k))` for every
//! `k >= 1` at once, in `O(v^{3/4})` time and `O(sqrt v)` memory.

use super::sieve::isqrt;

#[derive(Debug, Clone)]
pub struct QuotientCounts {
    v: u64,
    root: u64,
    /// `small[i] = pi(i)` for `i <= root`
    small: Vec<u64>,
    /// `large[k] = pi(v / k)` for `1 <= k <= root`
    large: Vec<u64>,
}

impl QuotientCounts {
    pub fn new(v: u64) -> Self {
        let root = isqrt(v);
        let r = root as usize;
        let mut small: Vec<u64> = (0..=root).map(|i| i.saturating_sub(1)).collect();
        let mut large: Vec<u64> = (0..=root)
            .map(|k| if k == 0 { 0 } else { v / k - 1 })
            .collect();
        for p in 2..=r {
            if small[p] == small[p - 1] {
                continue;
            }
            let sp = small[p - 1];
            let p64 = p as u64;
            let p2 = p64 * p64;
            let kmax = (v / p2).min(root) as usize;
            for k in 1..=kmax {
                let kp = k as u64 * p64;
                let sub = if kp <= root {
                    large[kp as usize]
                } else {
                    small[(v / kp) as usize]
                };
                large[k] -= sub - sp;
            }
            for i in (p * p..=r).rev() {
                small[i] -= small[i / p] - sp;
            }
        }
        Self {
            v,
            root,
            small,
            large,
        }
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    /// `pi(v)`.
    pub fn total(&self) -> u64 {
        self.quotient(1)
    }

    /// `pi(floor(v / k))` for any `k >= 1`.
    pub fn quotient(&self, k: u64) -> u64 {
        assert!(k >= 1);
        if k <= self.root {
            self.large[k as usize]
        } else {
            self.small[(self.v / k) as usize]
        }
    }

    /// `pi(w)` when `w` is representable (`w <= sqrt v` or `w = floor(v/k)`).
    pub fn get(&self, w: u64) -> Option<u64> {
        if w <= self.root {
            return Some(self.small[w as usize]);
        }
        if w > self.v {
            return None;
        }
        let k = self.v / w;
        (self.v / k == w).then(|| self.quotient(k))
    }
}

/// `pi(x)` by the sublinear recurrence.
pub fn pi_sublinear(x: u64) -> u64 {
    if x < 2 {
        return 0;
    }
    QuotientCounts::new(x).total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::PrimeTable;

    #[test]
    fn small_values() {
        let expected = [0, 0, 1, 2, 2, 3, 3, 4, 4, 4, 4, 5];
        for (x, &e) in expected.iter().enumerate() {
            assert_eq!(pi_sublinear(x as u64), e, "pi({x})");
        }
    }

    #[test]
    fn quotients_match_sieve() {
        let t = PrimeTable::new(1_000_000).unwrap();
        let v = 999_983;
        let q = QuotientCounts::new(v);
        for k in 1..=2000 {
            assert_eq!(q.quotient(k), t.pi(v / k), "k={k}");
        }
        assert_eq!(q.get(v / 7), Some(t.pi(v / 7)));
        assert_eq!(q.get(500), Some(t.pi(500)));
    }
}
