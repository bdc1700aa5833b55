//! The factorization ensemble `F(j)`: every prime pair `x <= y` whose
//! product lies in `[p_j^2, p_{j+1}^2)`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::primes::{isqrt, primes_in_window, PiOracle};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EnsembleEntry {
    pub x: u64,
    pub y: u64,
    pub n_k: u64,
    pub pi_x: u64,
    pub pi_y: u64,
}

/// Limits applied before and during enumeration.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Refuse to enumerate when the cardinality estimate exceeds this.
    pub max_entries: u64,
    /// Largest y-window (in integers) a single sieve pass may cover.
    pub max_window: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            max_entries: 100_000_000,
            max_window: 1 << 33,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Ensemble {
    pub j: u64,
    pub p_j: u64,
    pub p_j1: u64,
    entries: Vec<EnsembleEntry>,
    per_x_counts: BTreeMap<u64, u64>,
}

impl Ensemble {
    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    pub fn per_x_counts(&self) -> &BTreeMap<u64, u64> {
        &self.per_x_counts
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `N = p_j^2`, the reference number of the ensemble.
    pub fn n(&self) -> u64 {
        self.p_j * self.p_j
    }

    pub fn window(&self) -> (u64, u64) {
        (self.p_j * self.p_j, self.p_j1 * self.p_j1)
    }

    pub fn contains(&self, x: u64, y: u64) -> bool {
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        self.entries
            .binary_search_by(|e| (e.x, e.y).cmp(&(x, y)))
            .is_ok()
    }

    /// Entries whose smaller factor is exactly `x`.
    pub fn entries_for_x(&self, x: u64) -> &[EnsembleEntry] {
        let lo = self.entries.partition_point(|e| e.x < x);
        let hi = self.entries.partition_point(|e| e.x <= x);
        &self.entries[lo..hi]
    }

    /// Number of entries whose smaller factor is `< x`.
    pub fn count_below(&self, x: u64) -> u64 {
        self.per_x_counts.range(..x).map(|(_, &c)| c).sum()
    }

    /// Number of entries whose smaller factor is `<= x`.
    pub fn count_through(&self, x: u64) -> u64 {
        self.per_x_counts.range(..=x).map(|(_, &c)| c).sum()
    }

    pub fn smallest_x(&self) -> Option<u64> {
        self.per_x_counts.keys().next().copied()
    }

    pub fn largest_x(&self) -> Option<u64> {
        self.per_x_counts.keys().next_back().copied()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,n_k,pi_x,pi_y")?;
        for e in &self.entries {
            writeln!(w, "{},{},{},{},{}", e.x, e.y, e.n_k, e.pi_x, e.pi_y)?;
        }
        Ok(())
    }
}

/// Enumerate `F(j)` with default limits.
pub fn build_ensemble(j: u64, oracle: &PiOracle) -> Result<Ensemble> {
    build_ensemble_with(j, oracle, BuildOptions::default())
}

pub fn build_ensemble_with(j: u64, oracle: &PiOracle, opts: BuildOptions) -> Result<Ensemble> {
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    let p_j = oracle.nth_prime(j)?;
    let p_j1 = oracle.nth_prime(j + 1)?;
    if j >= 2 {
        let est = cardinality_estimate(j, oracle)?.closed_form;
        if est > opts.max_entries as f64 {
            return Err(Error::CapacityExceeded(format!(
                "estimated |F({j})| = {est:.0} exceeds the budget of {} entries",
                opts.max_entries
            )));
        }
    }
    let lo_n = p_j.checked_mul(p_j).ok_or_else(|| overflow(j))?;
    let hi_n = p_j1.checked_mul(p_j1).ok_or_else(|| overflow(j))?;
    let table = oracle.table();
    if table.limit() < isqrt(hi_n / 2) {
        return Err(Error::CapacityExceeded(format!(
            "prime table limit {} too small for the y-windows of F({j})",
            table.limit()
        )));
    }
    // pi(ceil(p_j^2/x) - 1) = pi(floor((p_j^2 - 1)/x)) for every x at once.
    let quotients = oracle.quotient_counts(lo_n - 1);

    let xs: Vec<u64> = table.primes_between(2, p_j).collect();
    let rows: Vec<Vec<EnsembleEntry>> = xs
        .par_iter()
        .map(|&x| -> Result<Vec<EnsembleEntry>> {
            let ylo = lo_n.div_ceil(x).max(x);
            let yhi = hi_n.div_ceil(x);
            if ylo >= yhi {
                return Ok(Vec::new());
            }
            if yhi - ylo > opts.max_window {
                return Err(Error::CapacityExceeded(format!(
                    "y-window of length {} for x = {x} exceeds the sieve budget {}",
                    yhi - ylo,
                    opts.max_window
                )));
            }
            let below = if ylo == x {
                table.pi(x - 1)
            } else {
                quotients.quotient(x)
            };
            let pi_x = table.pi(x);
            let ys = primes_in_window(ylo, yhi, table)?;
            Ok(ys
                .into_iter()
                .enumerate()
                .map(|(i, y)| EnsembleEntry {
                    x,
                    y,
                    n_k: x * y,
                    pi_x,
                    pi_y: below + i as u64 + 1,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut per_x_counts = BTreeMap::new();
    for (x, row) in xs.iter().zip(&rows) {
        if !row.is_empty() {
            per_x_counts.insert(*x, row.len() as u64);
        }
    }
    let entries: Vec<EnsembleEntry> = rows.into_iter().flatten().collect();
    Ok(Ensemble {
        j,
        p_j,
        p_j1,
        entries,
        per_x_counts,
    })
}

fn overflow(j: u64) -> Error {
    Error::CapacityExceeded(format!("p_(j+1)^2 overflows u64 for j = {j}"))
}

/// The unique prime pair `(x, y)`, `x <= y`, with `n = x y` in the window of
/// `F(j)`, if any.
pub fn membership(n: u64, j: u64, oracle: &PiOracle) -> Result<Option<(u64, u64)>> {
    if j == 0 || n < 4 {
        return Ok(None);
    }
    let p_j = oracle.nth_prime(j)?;
    let p_j1 = oracle.nth_prime(j + 1)?;
    if n < p_j * p_j || n >= p_j1 * p_j1 {
        return Ok(None);
    }
    let root = isqrt(n);
    let Some(x) = oracle.table().primes_between(2, root).find(|&p| n % p == 0) else {
        return Ok(None);
    };
    let y = n / x;
    Ok(oracle.is_prime(y).then_some((x, y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CardinalityEstimate {
    /// `sqrt(N) (ln ln sqrt(N) + 1)` with `N = p_j^2`.
    pub closed_form: f64,
    /// `sum_{p <= sqrt(N)} sqrt(N) / p`.
    pub prime_sum: f64,
}

pub fn cardinality_estimate(j: u64, oracle: &PiOracle) -> Result<CardinalityEstimate> {
    if j < 2 {
        return Err(Error::InvalidArgument(
            "cardinality estimate needs j >= 2".into(),
        ));
    }
    let root = oracle.nth_prime(j)? as f64;
    let closed_form = root * (root.ln().ln() + 1.0);
    let prime_sum = oracle
        .table()
        .primes_between(2, root as u64)
        .map(|p| root / p as f64)
        .sum();
    Ok(CardinalityEstimate {
        closed_form,
        prime_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoprimeStat {
    pub x: u64,
    pub observed: u64,
    /// `sqrt(N) / x`
    pub predicted: f64,
}

pub fn coprime_statistics(e: &Ensemble) -> Result<Vec<CoprimeStat>> {
    if e.is_empty() {
        return Err(Error::EmptyEnsemble(e.j));
    }
    let root = e.p_j as f64;
    Ok(e.per_x_counts
        .iter()
        .map(|(&x, &observed)| CoprimeStat {
            x,
            observed,
            predicted: root / x as f64,
        })
        .collect())
}

/// Pearson correlation between observed and predicted counts.
pub fn correlation(stats: &[CoprimeStat]) -> f64 {
    let n = stats.len() as f64;
    let mx = stats.iter().map(|s| s.observed as f64).sum::<f64>() / n;
    let my = stats.iter().map(|s| s.predicted).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for s in stats {
        let dx = s.observed as f64 - mx;
        let dy = s.predicted - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j1_window_is_four_to_nine() {
        let oracle = PiOracle::with_limit(100).unwrap();
        let e = build_ensemble(1, &oracle).unwrap();
        let pairs: Vec<_> = e.entries().iter().map(|e| (e.x, e.y)).collect();
        assert_eq!(pairs, vec![(2, 2), (2, 3)]);
        assert_eq!(e.entries()[1].pi_y, 2);
    }

    #[test]
    fn counts_below_and_through() {
        let oracle = PiOracle::for_ensemble(20).unwrap();
        let e = build_ensemble(20, &oracle).unwrap();
        let total: u64 = e.per_x_counts().values().sum();
        assert_eq!(total as usize, e.len());
        assert_eq!(e.count_below(2), 0);
        assert_eq!(e.count_through(e.largest_x().unwrap()), total);
        assert_eq!(e.count_below(3), e.per_x_counts()[&2]);
        assert_eq!(e.entries_for_x(2).len() as u64, e.per_x_counts()[&2]);
    }

    #[test]
    fn budget_guard_refuses() {
        let oracle = PiOracle::for_ensemble(304).unwrap();
        let opts = BuildOptions {
            max_entries: 1000,
            ..Default::default()
        };
        assert!(matches!(
            build_ensemble_with(304, &oracle, opts),
            Err(Error::CapacityExceeded(_))
        ));
        let opts = BuildOptions {
            max_window: 100,
            ..Default::default()
        };
        assert!(matches!(
            build_ensemble_with(304, &oracle, opts),
            Err(Error::CapacityExceeded(_))
        ));
    }

    #[test]
    fn membership_basic() {
        let oracle = PiOracle::for_ensemble(304).unwrap();
        assert_eq!(
            membership(4012009, 304, &oracle).unwrap(),
            Some((2003, 2003))
        );
        assert_eq!(membership(4012008, 304, &oracle).unwrap(), None);
        assert_eq!(
            membership(4021993, 304, &oracle).unwrap(),
            Some((1019, 3947))
        );
        // 9 * 445779 lies in the window but is not a semiprime
        assert_eq!(membership(4012011, 304, &oracle).unwrap(), None);
    }

    #[test]
    fn predicted_ratio_is_three_halves() {
        let oracle = PiOracle::for_ensemble(62).unwrap();
        let e = build_ensemble(62, &oracle).unwrap();
        let s = coprime_statistics(&e).unwrap();
        assert!((s[0].predicted / s[1].predicted - 1.5).abs() < 1e-15);
    }
}
