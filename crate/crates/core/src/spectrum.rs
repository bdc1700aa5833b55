//! Arithmetic energies, canonical variables and the hypergeometric
//! eigenvalue problem of the simulator.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::Ensemble;
use crate::primes::{isqrt, PiOracle, QuotientCounts};
use crate::specfun::{kummer_m, tricomi_u, HypergeomParams};
use crate::{Error, Result};

const B: Complex64 = Complex64::new(1.5, 0.0);

/// Constants of the spectral problem for one `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralContext {
    pub n: u64,
    pub j: u64,
    /// `j / sqrt(N)`
    pub gamma: f64,
    /// smallest factor occurring in `F(j)`
    pub x_m: u64,
    /// `(pi(N / x_m) + pi(x_m)) / (2 j)`
    pub q_m: f64,
    /// `q_m^2`
    pub rho_m: f64,
    pub e_max: f64,
}

impl SpectralContext {
    pub fn sqrt_n(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    /// `u(N, x) = gamma ln(sqrt(N) / x)`.
    pub fn u(&self, x: f64) -> Result<f64> {
        u_regular(self.n, x, self.gamma)
    }
}

pub fn u_regular(n: u64, x: f64, gamma: f64) -> Result<f64> {
    let root = (n as f64).sqrt();
    if !(x > 0.0) || x > root {
        return Err(Error::Domain(format!(
            "u(N, x) needs 0 < x <= sqrt(N) = {root}, got {x}"
        )));
    }
    Ok(gamma * (root / x).ln())
}

pub fn build_context(n: u64, ensemble: &Ensemble, oracle: &PiOracle) -> Result<SpectralContext> {
    let j = oracle.pi(isqrt(n));
    if j != ensemble.j {
        return Err(Error::InvalidArgument(format!(
            "pi(floor(sqrt({n}))) = {j} but the ensemble is F({})",
            ensemble.j
        )));
    }
    let x_m = ensemble.smallest_x().ok_or(Error::EmptyEnsemble(j))?;
    let q_m = (oracle.pi(n / x_m) + oracle.pi(x_m)) as f64 / (2 * j) as f64;
    let j2 = (j * j) as f64;
    let e_max = if ensemble.per_x_counts().contains_key(&3) {
        2.0 * oracle.pi(n / 3) as f64 / j2
    } else {
        let quotients = QuotientCounts::new(n);
        ensemble
            .per_x_counts()
            .keys()
            .map(|&x| (oracle.pi(x) * quotients.quotient(x)) as f64 / j2)
            .fold(0.0, f64::max)
    };
    Ok(SpectralContext {
        n,
        j,
        gamma: j as f64 / (n as f64).sqrt(),
        x_m,
        q_m,
        rho_m: q_m * q_m,
        e_max,
    })
}

/// Context for `N` without enumerating its ensemble, taking `x_m = 2` and
/// the `x = 3` maximum energy; both hold once `F(j)` is populated by its
/// smallest primes.
pub fn context_without_ensemble(n: u64, oracle: &PiOracle) -> Result<SpectralContext> {
    let j = oracle.pi(isqrt(n));
    if j < 2 {
        return Err(Error::InvalidArgument(format!(
            "N = {n} is too small for a context without its ensemble"
        )));
    }
    let q_m = (oracle.pi(n / 2) + 1) as f64 / (2 * j) as f64;
    Ok(SpectralContext {
        n,
        j,
        gamma: j as f64 / (n as f64).sqrt(),
        x_m: 2,
        q_m,
        rho_m: q_m * q_m,
        e_max: 2.0 * oracle.pi(n / 3) as f64 / (j * j) as f64,
    })
}

/// `pi(x) pi(y) / j^2` in exact and floating form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnergyValue {
    pub numerator: u64,
    pub denominator: u64,
}

impl EnergyValue {
    pub fn new(numerator: u64, j: u64) -> Self {
        Self {
            numerator,
            denominator: j * j,
        }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn ratio(&self) -> Ratio<i128> {
        Ratio::new(self.numerator as i128, self.denominator as i128)
    }
}

pub fn energy(x: u64, y: u64, j: u64, oracle: &PiOracle) -> Result<EnergyValue> {
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let not_member = || Error::PairNotInEnsemble { x, y, j };
    if j == 0 || !oracle.is_prime(x) || !oracle.is_prime(y) {
        return Err(not_member());
    }
    let lo = oracle.nth_prime(j)?.pow(2);
    let hi = oracle.nth_prime(j + 1)?.pow(2);
    let n = x.checked_mul(y).ok_or_else(not_member)?;
    if n < lo || n >= hi {
        return Err(not_member());
    }
    Ok(EnergyValue::new(oracle.pi(x) * oracle.pi(y), j))
}

/// `p = (pi(y) - pi(x)) / 2j`, `q = (pi(y) + pi(x)) / 2j`.
pub fn canonical_pq(x: u64, y: u64, j: u64, oracle: &PiOracle) -> (Ratio<i128>, Ratio<i128>) {
    pq_from_counts(oracle.pi(x), oracle.pi(y), j)
}

pub fn pq_from_counts(pi_x: u64, pi_y: u64, j: u64) -> (Ratio<i128>, Ratio<i128>) {
    let d = 2 * j as i128;
    (
        Ratio::new(pi_y as i128 - pi_x as i128, d),
        Ratio::new(pi_y as i128 + pi_x as i128, d),
    )
}

fn alpha(e: f64) -> Complex64 {
    Complex64::new(0.75, -e / 4.0)
}

fn mu(e: f64, rho: f64, p: &HypergeomParams) -> Result<(Complex64, Complex64)> {
    let a = alpha(e);
    let z = Complex64::new(0.0, rho);
    Ok((kummer_m(a, B, z, p)?, tricomi_u(a, B, z, p)?))
}

/// `D_0(E) = -U(alpha, 3/2, iE) / M(alpha, 3/2, iE)`.
pub fn d0(e: f64, p: &HypergeomParams) -> Result<Complex64> {
    let (m, u) = mu(e, e, p)?;
    Ok(-u / m)
}

/// `R_E(rho) = rho^(-1/4) Re{ e^(-i rho/2) [U(alpha, 3/2, i rho) + D_0 M(alpha, 3/2, i rho)] }`.
pub fn wavefunction(e: f64, rho: f64, ctx: &SpectralContext, p: &HypergeomParams) -> Result<f64> {
    if !(rho > 0.0) || rho > ctx.rho_m {
        return Err(Error::Domain(format!(
            "wavefunction needs 0 < rho <= rho_m = {}, got {rho}",
            ctx.rho_m
        )));
    }
    wave_with(e, rho, d0(e, p)?, p)
}

fn wave_with(e: f64, rho: f64, d0: Complex64, p: &HypergeomParams) -> Result<f64> {
    let (m, u) = mu(e, rho, p)?;
    let phase = Complex64::from_polar(1.0, -rho / 2.0);
    Ok(rho.powf(-0.25) * (phase * (u + d0 * m)).re)
}

/// Samples of `R_E` on `[E, rho_m]`, sharing one `D_0` evaluation.
pub fn wavefunction_samples(
    e: f64,
    ctx: &SpectralContext,
    p: &HypergeomParams,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    let d = d0(e, p)?;
    let lo = e.max(1e-12);
    (0..points)
        .into_par_iter()
        .map(|i| {
            let rho = lo + (ctx.rho_m - lo) * i as f64 / (points.max(2) - 1) as f64;
            Ok((rho, wave_with(e, rho, d, p)?))
        })
        .collect()
}

/// `M(i rho_m) U(iE) / (M(iE) U(i rho_m))`; equal to 1 at an eigenvalue.
pub fn quantum_condition(e: f64, ctx: &SpectralContext, p: &HypergeomParams) -> Result<Complex64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!(
            "quantum condition needs E > 0, got {e}"
        )));
    }
    let (me, ue) = mu(e, e, p)?;
    let (mm, um) = mu(e, ctx.rho_m, p)?;
    Ok(mm * ue / (me * um))
}

/// The inverted ratio `M(iE) U(i rho_m) / (M(i rho_m) U(iE))`, evaluated
/// independently of [`quantum_condition`].
pub fn quantum_condition_reciprocal(
    e: f64,
    ctx: &SpectralContext,
    p: &HypergeomParams,
) -> Result<Complex64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!(
            "quantum condition needs E > 0, got {e}"
        )));
    }
    let (me, ue) = mu(e, e, p)?;
    let (mm, um) = mu(e, ctx.rho_m, p)?;
    Ok(me * um / (mm * ue))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub e_lo: f64,
    pub grid: usize,
    /// bisection stops when the bracket is narrower than this
    pub tol: f64,
    /// accepted `|Re(ratio) - 1|`
    pub re_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            e_lo: 1e-3,
            grid: 1000,
            tol: 1e-12,
            re_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub e: f64,
    pub re_ratio: f64,
    pub im_ratio: f64,
    pub residual_at_rho_m: f64,
}

/// Roots of `Im(ratio)` on `(e_lo, e_max]` at which `Re(ratio)` is 1.
pub fn scan_eigenvalues(
    ctx: &SpectralContext,
    p: &HypergeomParams,
    grid: usize,
    tol: f64,
) -> Result<Vec<Eigenvalue>> {
    scan_eigenvalues_with(
        ctx,
        p,
        &ScanOptions {
            grid,
            tol,
            ..ScanOptions::default()
        },
    )
}

pub fn scan_eigenvalues_with(
    ctx: &SpectralContext,
    p: &HypergeomParams,
    opts: &ScanOptions,
) -> Result<Vec<Eigenvalue>> {
    if opts.grid < 2 {
        return Err(Error::InvalidArgument(
            "scan grid needs at least 2 points".into(),
        ));
    }
    let (lo, hi) = (opts.e_lo, ctx.e_max);
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let step = (hi - lo) / (opts.grid - 1) as f64;
    let im = |e: f64| quantum_condition(e, ctx, p).map(|r| r.im);
    let samples: Vec<(f64, f64)> = (0..opts.grid)
        .into_par_iter()
        .map(|i| {
            let e = if i + 1 == opts.grid {
                hi
            } else {
                lo + step * i as f64
            };
            Ok((e, im(e)?))
        })
        .collect::<Result<_>>()?;
    let brackets: Vec<(f64, f64, f64)> = samples
        .windows(2)
        .filter(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0].0, w[1].0, w[0].1))
        .collect();
    let refined: Vec<Option<Eigenvalue>> = brackets
        .into_par_iter()
        .map(|(mut a, mut b, fa)| -> Result<Option<Eigenvalue>> {
            if fa != 0.0 {
                while b - a > opts.tol {
                    let mid = 0.5 * (a + b);
                    let fm = im(mid)?;
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                    } else if fm.signum() == fa.signum() {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
            }
            let e = 0.5 * (a + b);
            let r = quantum_condition(e, ctx, p)?;
            if (r.re - 1.0).abs() > opts.re_tol {
                return Ok(None);
            }
            Ok(Some(Eigenvalue {
                e,
                re_ratio: r.re,
                im_ratio: r.im,
                residual_at_rho_m: wavefunction(e, ctx.rho_m, ctx, p)?,
            }))
        })
        .collect::<Result<_>>()?;
    let mut roots: Vec<Eigenvalue> = refined.into_iter().flatten().collect();
    roots.dedup_by(|b, a| (b.e - a.e).abs() <= 2.0 * opts.tol);
    Ok(roots)
}

pub fn write_roots_csv<W: Write>(roots: &[Eigenvalue], mut w: W) -> Result<()> {
    writeln!(w, "E_root,re_ratio,im_ratio,residual_at_rho_m")?;
    for r in roots {
        writeln!(
            w,
            "{:.15e},{:.15e},{:.15e},{:.15e}",
            r.e, r.re_ratio, r.im_ratio, r.residual_at_rho_m
        )?;
    }
    Ok(())
}

/// Distance from each energy to the nearest root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub e: f64,
    pub nearest_root: Option<f64>,
    pub distance: Option<f64>,
}

pub fn discrepancy_report(energies: &[f64], roots: &[Eigenvalue]) -> Vec<Discrepancy> {
    energies
        .iter()
        .map(|&e| {
            let nearest = roots
                .iter()
                .map(|r| r.e)
                .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()));
            Discrepancy {
                e,
                nearest_root: nearest,
                distance: nearest.map(|r| (r - e).abs()),
            }
        })
        .collect()
}

/// `delta_0 = atan(e^(3 pi E/8) D_0(E))` in `(-pi/2, pi/2)`.
///
/// `e^(-i rho/2) M(alpha, 3/2, i rho)` is real, so only `Re D_0` enters the
/// wavefunction and the phase.
pub fn phase_delta0(e: f64, p: &HypergeomParams) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("delta_0 needs E > 0, got {e}")));
    }
    let d = d0(e, p)?.re;
    // atan(s d) with s = e^(3 pi E / 8), kept finite for large E
    let ln_s = 3.0 * PI * e / 8.0;
    if d == 0.0 {
        return Ok(0.0);
    }
    let mag = ln_s + d.abs().ln();
    let t = if mag > 700.0 {
        PI / 2.0
    } else {
        mag.exp().atan()
    };
    Ok(t.copysign(d))
}

/// `delta_0` along increasing energies, unwrapped by multiples of `pi` so
/// that it is continuous, anchored at the first energy.
pub fn phase_delta0_unwrapped(energies: &[f64], p: &HypergeomParams) -> Result<Vec<f64>> {
    let raw: Vec<f64> = energies
        .par_iter()
        .map(|&e| phase_delta0(e, p))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    for (i, &v) in raw.iter().enumerate() {
        if i > 0 {
            let prev = raw[i - 1];
            let jump = v - prev;
            if jump > PI / 2.0 {
                offset -= PI;
            } else if jump < -PI / 2.0 {
                offset += PI;
            }
        }
        out.push(v + offset);
    }
    Ok(out)
}

/// The prime `x <= sqrt(N)` dividing `N` with `pi(x) pi(N/x)` equal to the
/// energy numerator.
pub fn invert_energy(e: &EnergyValue, n: u64, oracle: &PiOracle) -> Result<(u64, u64)> {
    let none = || Error::NoSolution {
        n,
        numerator: e.numerator,
    };
    if n < 4 || e.numerator == 0 {
        return Err(none());
    }
    let root = isqrt(n);
    let quotients = QuotientCounts::new(n);
    let mut pi_x = 0u64;
    for x in oracle.table().primes_between(2, root) {
        pi_x += 1;
        if e.numerator % pi_x != 0 {
            continue;
        }
        if pi_x * quotients.quotient(x) == e.numerator && n % x == 0 {
            return Ok((x, n / x));
        }
    }
    Err(none())
}
