//! Li, Riemann's R, real zeta values, zeta zeros and the zero-driven
//! fluctuation term.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default number of zeros used by the fluctuation term.
pub const DEFAULT_ZERO_COUNT: usize = 30;

const BUNDLED_ZEROS: &str = include_str!("../data/zeta_zeros.txt");

// B_2 .. B_24
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Logarithmic integral, principal value through the singularity at 1.
pub fn li(x: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("li needs x > 1, got {x}")));
    }
    // Ramanujan's series
    let l = x.ln();
    let mut sum = 0.0;
    let mut inner = 0.0;
    let mut fact_pow = 1.0; // l^n / (n! 2^(n-1))
    for n in 1..2000u32 {
        fact_pow *= l / n as f64;
        if n > 1 {
            fact_pow /= 2.0;
        }
        if n % 2 == 1 {
            inner += 1.0 / n as f64;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * fact_pow * inner;
        sum += term;
        if n as f64 > l && term.abs() < 1e-17 * sum.abs() {
            return Ok(EULER_GAMMA + l.ln() + x.sqrt() * sum);
        }
    }
    Err(Error::Accuracy(format!("li({x}) did not converge")))
}

/// Riemann zeta on the real axis, `s > 1`, by Euler–Maclaurin summation.
pub fn zeta_real(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta_real needs s > 1, got {s}")));
    }
    if s >= 60.0 {
        return Ok(1.0 + 2f64.powf(-s) + 3f64.powf(-s));
    }
    const N: f64 = 10.0;
    let mut sum: f64 = (1..10).map(|n| (n as f64).powf(-s)).sum();
    sum += N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s);
    // B_2k / (2k)! * s (s+1) ... (s+2k-2) * N^(-s-2k+1)
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = N.powf(-s - 1.0);
    for (k, b) in BERNOULLI.iter().enumerate() {
        let k = k + 1;
        let term = b / fact * rising * npow;
        sum += term;
        if term.abs() < 1e-18 * sum {
            break;
        }
        let a = (2 * k) as f64;
        rising *= (s + a - 1.0) * (s + a);
        fact *= (a + 1.0) * (a + 2.0);
        npow /= N * N;
    }
    Ok(sum)
}

/// Truncation control and the `zeta(n+1)` cache for the Gram series.
#[derive(Debug, Clone)]
pub struct GramSeriesParams {
    pub max_terms: usize,
    pub tolerance: f64,
    zeta_values: Vec<f64>,
}

impl GramSeriesParams {
    pub fn new(max_terms: usize, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let zeta_values = (1..=max_terms)
            .map(|n| zeta_real(n as f64 + 1.0))
            .collect::<Result<_>>()?;
        Ok(Self {
            max_terms,
            tolerance,
            zeta_values,
        })
    }

    /// `zeta(n + 1)` for `1 <= n <= max_terms`.
    pub fn zeta(&self, n: usize) -> f64 {
        self.zeta_values[n - 1]
    }
}

impl Default for GramSeriesParams {
    fn default() -> Self {
        Self::new(2000, 1e-16).expect("valid defaults")
    }
}

/// Riemann's `R(x)` for real `x >= 1`.
pub fn riemann_r(x: f64, params: &GramSeriesParams) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("riemann_r needs x >= 1, got {x}")));
    }
    Ok(gram(Complex64::new(x.ln(), 0.0), params)?.re)
}

/// `R(e^l)` for complex `l`.
///
/// Near the positive real axis the Gram series is summed directly. Elsewhere
/// its terms cancel catastrophically, so the series is regrouped through
/// `1/zeta(k+1) = sum_n mu(n) n^-(k+1)` into
/// `1 + sum_{n<=m} mu(n)/n S(l/n) + sum_k l^k T_k(m) / (k k!)`
/// with `S(w) = Ei(w) - gamma - ln w` and `T_k(m) = sum_{n>m} mu(n) n^-(k+1)`.
pub fn riemann_r_log(l: Complex64, params: &GramSeriesParams) -> Result<Complex64> {
    if l.norm() - l.re <= DIRECT_CANCELLATION {
        gram(l, params)
    } else {
        gram_mobius(l, split_point(l))
    }
}

fn split_point(l: Complex64) -> usize {
    ((l.norm() / 4.0).ceil() as usize)
        .max(1)
        .next_power_of_two()
}

/// `R(x^rho)` with `x^rho` taken as `e^(rho ln x)`.
pub fn riemann_r_pow(x: f64, rho: Complex64, params: &GramSeriesParams) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("riemann_r_pow needs x > 0, got {x}")));
    }
    riemann_r_log(rho * x.ln(), params)
}

// Largest |l| - Re l summed directly; the cancellation loss is about e^this.
const DIRECT_CANCELLATION: f64 = 8.0;

fn gram(l: Complex64, params: &GramSeriesParams) -> Result<Complex64> {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0); // l^n / n!
    for n in 1..=params.max_terms {
        pow *= l / n as f64;
        let term = pow / (n as f64 * params.zeta(n));
        sum += term;
        if n as f64 > l.norm() && term.norm() < params.tolerance * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::Accuracy(format!(
        "Gram series for R(e^{l}) not converged in {} terms",
        params.max_terms
    )))
}

fn gram_mobius(l: Complex64, m: usize) -> Result<Complex64> {
    let tails = mobius_tails(m);
    let mu = mobius_table(m);
    let mut sum = Complex64::new(1.0, 0.0);
    for n in 1..=m {
        if mu[n] != 0 {
            sum += mu[n] as f64 / n as f64 * ein_shift(l / n as f64)?;
        }
    }
    let mut pow = Complex64::new(1.0, 0.0);
    for (k, t) in tails.iter().enumerate() {
        let k = k + 1;
        pow *= l / k as f64;
        sum += pow * (*t / k as f64);
    }
    Ok(sum)
}

/// `S(w) = sum_{k>=1} w^k / (k k!) = Ei(w) - gamma - ln w`.
fn ein_shift(w: Complex64) -> Result<Complex64> {
    if w.norm() - w.re <= DIRECT_CANCELLATION || w.norm() <= 4.0 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for k in 1..4000 {
            pow *= w / k as f64;
            let term = pow / k as f64;
            sum += term;
            if k as f64 > w.norm() && term.norm() <= 1e-17 * sum.norm() {
                return Ok(sum);
            }
        }
        Err(Error::Accuracy(format!("S({w}) series not converged")))
    } else {
        Ok(-e1(-w)? - EULER_GAMMA - (-w).ln())
    }
}

/// Exponential integral `Ei(w) = gamma + ln w + sum w^k/(k k!)`, principal
/// branch of the logarithm.
pub fn ei(w: Complex64) -> Result<Complex64> {
    if w.norm() == 0.0 {
        return Err(Error::Pole(0.0));
    }
    Ok(EULER_GAMMA + w.ln() + ein_shift(w)?)
}

/// `E1(z)` by its continued fraction; intended for `|z| >= 1` away from the
/// negative real axis.
pub fn e1(z: Complex64) -> Result<Complex64> {
    const TINY: f64 = 1e-300;
    let one = Complex64::new(1.0, 0.0);
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 1..20_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = one / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            return Ok(h * (-z).exp());
        }
    }
    Err(Error::Accuracy(format!(
        "E1({z}) continued fraction not converged"
    )))
}

static MOBIUS: OnceLock<Mutex<Arc<Vec<i8>>>> = OnceLock::new();
static TAILS: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();

/// Möbius function values for `0..=n` (index 0 unused).
pub fn mobius_table(n: usize) -> Arc<Vec<i8>> {
    let cell = MOBIUS.get_or_init(|| Mutex::new(Arc::new(Vec::new())));
    let mut guard = cell.lock().unwrap_or_else(|e| e.into_inner());
    if guard.len() <= n {
        *guard = Arc::new(mobius_sieve((n + 1).max(2 * guard.len())));
    }
    Arc::clone(&guard)
}

fn mobius_sieve(len: usize) -> Vec<i8> {
    let mut mu = vec![1i8; len];
    let mut composite = vec![false; len];
    if len > 0 {
        mu[0] = 0;
    }
    for p in 2..len {
        if composite[p] {
            continue;
        }
        for k in (p..len).step_by(p) {
            if k > p {
                composite[k] = true;
            }
            mu[k] = -mu[k];
        }
        if let Some(sq) = p.checked_mul(p) {
            for k in (sq..len).step_by(sq) {
                mu[k] = 0;
            }
        }
    }
    mu
}

// T_k(m) for k = 1..=TAIL_TERMS; |l| <= 4m keeps (4^k / k!) below 1e-19 there.
const TAIL_TERMS: usize = 36;

fn mobius_tails(m: usize) -> Arc<Vec<f64>> {
    let cell = TAILS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cell.lock().unwrap_or_else(|e| e.into_inner()).get(&m) {
        return Arc::clone(t);
    }
    let t = Arc::new(compute_tails(m));
    cell.lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(m, Arc::clone(&t));
    t
}

// 1/zeta(k+1) for k = 1..=4 as (hi, lo) pairs
const INV_ZETA: [(f64, f64); 4] = [
    (0.6079271018540267, -2.379773927663665e-17),
    (0.8319073725807075, 8.275403359195136e-18),
    (0.9239384029215901, 3.752195618558758e-17),
    (0.9643873404292624, 1.8404522925589472e-17),
];

fn compute_tails(m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(TAIL_TERMS);
    let mu = mobius_table(m);
    for k in 1..=TAIL_TERMS {
        let s = (k + 1) as f64;
        if k <= INV_ZETA.len() {
            // the difference loses ~m^-k of relative precision, so it is
            // carried in double-double arithmetic
            let mut acc = Dd::new(INV_ZETA[k - 1].0, INV_ZETA[k - 1].1);
            for n in 1..=m {
                if mu[n] != 0 {
                    let inv = Dd::recip_int((n as u128).pow(k as u32 + 1));
                    acc = if mu[n] > 0 {
                        acc.sub(inv)
                    } else {
                        acc.add(inv)
                    };
                }
            }
            out.push(acc.hi + acc.lo);
        } else {
            // the dropped part beyond `upper` is below 1e-13 after scaling by l^k/(k k!)
            let kf = k as f64;
            let lg = 4f64.ln() * kf - 2.0 * kf.ln() - ln_factorial(k) + 13.0 * 10f64.ln();
            let c = (lg / kf).exp().max(2.0);
            let upper = (m as f64 * c) as usize;
            let mu = mobius_table(upper);
            let mut sum = 0.0;
            for n in (m + 1..=upper).rev() {
                if mu[n] != 0 {
                    sum += mu[n] as f64 * (n as f64).powf(-s);
                }
            }
            out.push(sum);
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (o.hi - bb);
        Dd::new(s, err + self.lo + o.lo)
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(Dd {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    fn recip_int(v: u128) -> Dd {
        let hi = v as f64;
        let lo = (v as i128 - hi as i128) as f64;
        let q = 1.0 / hi;
        let r = (-q).mul_add(hi, 1.0) - q * lo;
        Dd::new(q, r * q)
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Ordinates `gamma_n` of the nontrivial zeros `1/2 + i gamma_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaZeros {
    imaginary_parts: Vec<f64>,
}

impl ZetaZeros {
    pub fn new(imaginary_parts: Vec<f64>) -> Result<Self> {
        for (i, w) in imaginary_parts.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Monotonicity {
                    line: i + 2,
                    value: w[1],
                });
            }
        }
        Ok(Self { imaginary_parts })
    }

    pub fn empty() -> Self {
        Self {
            imaginary_parts: Vec::new(),
        }
    }

    /// The first 100 ordinates shipped with the crate.
    pub fn bundled() -> Self {
        parse_zeros(BUNDLED_ZEROS, Path::new("<bundled>")).expect("bundled zeros are valid")
    }

    pub fn first(&self, m: usize) -> Self {
        Self {
            imaginary_parts: self.imaginary_parts[..m.min(self.len())].to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.imaginary_parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.imaginary_parts.is_empty()
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.imaginary_parts
    }
}

pub fn load_zeros(path: &Path) -> Result<ZetaZeros> {
    let text = std::fs::read_to_string(path)?;
    parse_zeros(&text, path)
}

fn parse_zeros(text: &str, path: &Path) -> Result<ZetaZeros> {
    let mut values = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("not a decimal number: {line:?}"),
        })?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("ordinate must be positive and finite, got {v}"),
            });
        }
        if v <= prev {
            return Err(Error::Monotonicity {
                line: i + 1,
                value: v,
            });
        }
        prev = v;
        values.push(v);
    }
    Ok(ZetaZeros {
        imaginary_parts: values,
    })
}

/// `f(x) = sum_rho R(x^rho)` over the given zeros and their conjugates.
pub fn fluctuation_f(x: f64, zeros: &ZetaZeros, params: &GramSeriesParams) -> Result<f64> {
    if !(x > 2.0) {
        return Err(Error::Domain(format!("fluctuation_f needs x > 2, got {x}")));
    }
    let mut sum = 0.0;
    for &g in zeros.ordinates() {
        sum += riemann_r_pow(x, Complex64::new(0.5, g), params)?.re;
    }
    Ok(2.0 * sum)
}

/// `-(f(x) R(y) + f(y) R(x) - f(x) f(y)) / j^2`.
pub fn epsilon_fl(
    x: u64,
    y: u64,
    j: u64,
    zeros: &ZetaZeros,
    params: &GramSeriesParams,
) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    let (xf, yf) = (x as f64, y as f64);
    let fx = fluctuation_f(xf, zeros, params)?;
    let fy = fluctuation_f(yf, zeros, params)?;
    let rx = riemann_r(xf, params)?;
    let ry = riemann_r(yf, params)?;
    Ok(-(fx * ry + fy * rx - fx * fy) / (j as f64).powi(2))
}

/// `pi(x)` approximated by `R(x) - f(x)`.
pub fn explicit_pi(x: f64, zeros: &ZetaZeros, params: &GramSeriesParams) -> Result<f64> {
    Ok(riemann_r(x, params)? - fluctuation_f(x, zeros, params)?)
}

#[doc(hidden)]
pub fn riemann_r_log_split(l: Complex64, m: Option<usize>) -> Result<Complex64> {
    gram_mobius(l, m.unwrap_or_else(|| split_point(l)))
}

#[doc(hidden)]
pub fn riemann_r_log_direct(l: Complex64, params: &GramSeriesParams) -> Result<Complex64> {
    gram(l, params)
}
