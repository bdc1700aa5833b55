//! Exact prime infrastructure: primality, enumeration and `pi(x)`.

mod lucy;
mod sieve;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub use lucy::{pi_sublinear, QuotientCounts};
pub use sieve::{count_primes_segmented, primes_in_window, PrimeTable, DEFAULT_BLOCK_ODDS};

pub(crate) use sieve::isqrt;

use crate::{Error, Result};

/// Arguments up to this value are answered by a sieve table by default;
/// larger ones go to the sublinear counter.
pub const SIEVE_THRESHOLD: u64 = 100_000_000;

/// Build a sieve table for every integer `<= limit`.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    PrimeTable::new(limit)
}

/// Upper bound for the `n`-th prime (Rosser–Schoenfeld for `n >= 6`).
pub fn nth_prime_upper_bound(n: u64) -> u64 {
    if n < 6 {
        return 13;
    }
    let nf = n as f64;
    (nf * (nf.ln() + nf.ln().ln())).ceil() as u64 + 1
}

/// Prime counting oracle: sieve table for small arguments, sublinear
/// counting plus a result cache for large ones.
///
/// Safe to share between threads; only the cache is mutable and it sits
/// behind a mutex.
#[derive(Debug)]
pub struct PiOracle {
    table: PrimeTable,
    cache: Mutex<CacheState>,
    cache_path: Option<PathBuf>,
}

#[derive(Debug, Default)]
struct CacheState {
    loaded: bool,
    values: BTreeMap<u64, u64>,
}

impl PiOracle {
    pub fn new(table: PrimeTable) -> Self {
        Self {
            table,
            cache: Mutex::new(CacheState::default()),
            cache_path: None,
        }
    }

    pub fn with_limit(limit: u64) -> Result<Self> {
        Ok(Self::new(PrimeTable::new(limit)?))
    }

    /// An oracle whose table reaches the `(j+1)`-th prime, which is what
    /// enumerating `F(j)` requires.
    pub fn for_ensemble(j: u64) -> Result<Self> {
        Self::with_limit(nth_prime_upper_bound(j + 1).max(100))
    }

    /// Attach a persisted cache file. The file is read lazily, on the first
    /// query that misses the sieve table.
    pub fn with_cache_file(mut self, path: impl Into<PathBuf>) -> Self {
        self.cache_path = Some(path.into());
        self
    }

    pub fn table(&self) -> &PrimeTable {
        &self.table
    }

    pub fn limit(&self) -> u64 {
        self.table.limit()
    }

    /// Exact number of primes `<= x`.
    pub fn pi(&self, x: u64) -> u64 {
        if x <= self.table.limit() {
            return self.table.pi(x);
        }
        if let Some(&v) = self.lock_loaded().values.get(&x) {
            return v;
        }
        let v = pi_sublinear(x);
        self.lock_loaded().values.insert(x, v);
        v
    }

    /// `pi(floor(v/k))` for all `k`, for enumerations that need many
    /// quotients of the same `v`.
    pub fn quotient_counts(&self, v: u64) -> QuotientCounts {
        QuotientCounts::new(v)
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.table.limit() {
            self.table.is_prime(n)
        } else {
            is_prime_u64(n)
        }
    }

    pub fn nth_prime(&self, n: u64) -> Result<u64> {
        self.table.nth_prime(n)
    }

    fn lock_loaded(&self) -> std::sync::MutexGuard<'_, CacheState> {
        let mut guard = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if !guard.loaded {
            guard.loaded = true;
            if let Some(path) = &self.cache_path {
                if path.exists() {
                    match read_cache(path) {
                        Ok(values) => guard.values.extend(values),
                        Err(e) => log::warn!("ignoring pi cache: {e}"),
                    }
                }
            }
        }
        guard
    }

    /// Load the attached cache file now, failing on malformed content.
    pub fn load_cache(&self) -> Result<usize> {
        let Some(path) = &self.cache_path else {
            return Ok(0);
        };
        let values = if path.exists() {
            read_cache(path)?
        } else {
            BTreeMap::new()
        };
        let mut guard = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        guard.loaded = true;
        guard.values.extend(values);
        Ok(guard.values.len())
    }

    /// Write the cache to the attached file (no-op without one).
    pub fn persist_cache(&self) -> Result<()> {
        let Some(path) = &self.cache_path else {
            return Ok(());
        };
        let guard = self.lock_loaded();
        write_cache(path, &guard.values)
    }

    pub fn cached_values(&self) -> BTreeMap<u64, u64> {
        self.lock_loaded().values.clone()
    }
}

/// Parse a cache file of `x<TAB>pi` lines, strictly ascending in `x`.
pub fn read_cache(path: &Path) -> Result<BTreeMap<u64, u64>> {
    let text = fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    let mut prev: Option<u64> = None;
    for (i, line) in text.lines().enumerate() {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (a, b) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(format!("expected `x<TAB>pi`, got {line:?}")))?;
        let x: u64 = a.parse().map_err(|_| parse_err(format!("bad x {a:?}")))?;
        let p: u64 = b
            .parse()
            .map_err(|_| parse_err(format!("bad count {b:?}")))?;
        if prev.is_some_and(|q| q >= x) {
            return Err(parse_err(format!("x = {x} is not ascending")));
        }
        prev = Some(x);
        out.insert(x, p);
    }
    Ok(out)
}

pub fn write_cache(path: &Path, values: &BTreeMap<u64, u64>) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for (x, p) in values {
        writeln!(f, "{x}\t{p}")?;
    }
    f.flush()?;
    Ok(())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for the whole `u64` range.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}
