//! Semiclassical spectrum `E = C gamma^(-kappa)`, the quadratic `u(kappa)`
//! fit and the resulting prediction `pi(x|N)`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{li, riemann_r, GramSeriesParams, ZetaZeros};
use crate::ensemble::Ensemble;
use crate::primes::PiOracle;
use crate::spectrum::SpectralContext;
use crate::{Error, Result};

pub const DEFAULT_P1: u64 = 2;
pub const DEFAULT_P2: u64 = 3;
pub const DEFAULT_X0: u64 = 3;
/// Predictions are restricted to `x <= sqrt(N) / DEFAULT_DOMAIN_FACTOR`.
pub const DEFAULT_DOMAIN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaMode {
    /// Lagrange conditions on the enumerated ensemble.
    Empirical,
    /// Large-`N` closed forms for the coefficients.
    Asymptotic,
}

/// `u = alpha1 kappa - alpha2 kappa^2` together with the constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitModel {
    pub alpha1: f64,
    pub alpha2: f64,
    pub p1: u64,
    pub p2: u64,
    pub c_const: f64,
    pub x0: u64,
    pub kappa_mode: KappaMode,
}

impl FitModel {
    pub fn u(&self, kappa: f64) -> f64 {
        self.alpha1 * kappa - self.alpha2 * kappa * kappa
    }

    /// Largest `u` reached by the parabola.
    pub fn apex(&self) -> f64 {
        self.alpha1 * self.alpha1 / (4.0 * self.alpha2)
    }

    /// Recomputes `C` at a different anchor.
    pub fn with_anchor(
        mut self,
        x0: u64,
        ctx: &SpectralContext,
        oracle: &PiOracle,
    ) -> Result<Self> {
        self.c_const = constant_c(&self, ctx, oracle, x0)?;
        self.x0 = x0;
        Ok(self)
    }
}

/// `kappa(x) = 1 - #{entries with smaller factor < x} / |F|`.
pub fn kappa_empirical(x: u64, ensemble: &Ensemble) -> Result<f64> {
    if !ensemble.per_x_counts().contains_key(&x) {
        return Err(Error::XNotPresent(x));
    }
    Ok(1.0 - ensemble.count_below(x) as f64 / ensemble.len() as f64)
}

/// `kappa` after the last entry with smaller factor `x`.
fn kappa_after(x: u64, ensemble: &Ensemble) -> f64 {
    1.0 - ensemble.count_through(x) as f64 / ensemble.len() as f64
}

fn solve_lagrange(k1: f64, u1: f64, k2: f64, u2: f64, p1: u64, p2: u64) -> Result<(f64, f64)> {
    // [k1, -k1^2; k2, -k2^2] (alpha1, alpha2) = (u1, u2)
    let det = -k1 * k2 * k2 + k2 * k1 * k1;
    if det.abs() < 1e-14 || k1 == 0.0 || k2 == 0.0 {
        return Err(Error::SingularSystem { p1, p2 });
    }
    let alpha1 = (-u1 * k2 * k2 + u2 * k1 * k1) / det;
    let alpha2 = (k1 * u2 - k2 * u1) / det;
    if alpha2 == 0.0 {
        return Err(Error::SingularSystem { p1, p2 });
    }
    Ok((alpha1, alpha2))
}

/// Fits `u(kappa)` at the anchors `p1 < p2` and evaluates `C` at
/// [`DEFAULT_X0`].
///
/// Empirical mode places `p1` at the start of its step (`kappa_empirical`)
/// and `p2` at the end of its step.
pub fn fit_u_of_kappa(
    ensemble: &Ensemble,
    ctx: &SpectralContext,
    oracle: &PiOracle,
    p1: u64,
    p2: u64,
    mode: KappaMode,
) -> Result<FitModel> {
    if p1 >= p2 {
        return Err(Error::InvalidArgument(format!(
            "anchors need p1 < p2, got {p1}, {p2}"
        )));
    }
    for p in [p1, p2] {
        if !ensemble.per_x_counts().contains_key(&p) {
            return Err(Error::XNotPresent(p));
        }
    }
    match mode {
        KappaMode::Empirical => {
            let k1 = kappa_empirical(p1, ensemble)?;
            let k2 = kappa_after(p2, ensemble);
            let (alpha1, alpha2) =
                solve_lagrange(k1, ctx.u(p1 as f64)?, k2, ctx.u(p2 as f64)?, p1, p2)?;
            finish(alpha1, alpha2, p1, p2, mode, ctx, oracle)
        }
        KappaMode::Asymptotic => fit_asymptotic(ctx, oracle, ensemble.len() as f64, p1, p2),
    }
}

/// Closed-form coefficients for a given ensemble size (exact or estimated):
/// `nu = sqrt(N)/|F| sum_{p1 <= p <= p2} 1/p`,
/// `tau = gamma (1 - nu) ln(p2/p1) / nu`,
/// `alpha2 = (1 - tau)/(1 - nu)`, `alpha1 = 1 + alpha2 + gamma ln(p2/p1)`.
pub fn fit_asymptotic(
    ctx: &SpectralContext,
    oracle: &PiOracle,
    cardinality: f64,
    p1: u64,
    p2: u64,
) -> Result<FitModel> {
    if p1 >= p2 || !oracle.is_prime(p1) || !oracle.is_prime(p2) {
        return Err(Error::InvalidArgument(format!(
            "anchors need primes p1 < p2, got {p1}, {p2}"
        )));
    }
    if !(cardinality > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ensemble size must be positive, got {cardinality}"
        )));
    }
    let harmonic: f64 = (p1..=p2)
        .filter(|&p| oracle.is_prime(p))
        .map(|p| 1.0 / p as f64)
        .sum();
    let nu = harmonic * ctx.sqrt_n() / cardinality;
    if nu == 0.0 || nu == 1.0 {
        return Err(Error::SingularSystem { p1, p2 });
    }
    let log_ratio = (p2 as f64 / p1 as f64).ln();
    let tau = ctx.gamma * (1.0 - nu) * log_ratio / nu;
    let alpha2 = (1.0 - tau) / (1.0 - nu);
    let alpha1 = 1.0 + alpha2 + ctx.gamma * log_ratio;
    if alpha2 == 0.0 {
        return Err(Error::SingularSystem { p1, p2 });
    }
    finish(alpha1, alpha2, p1, p2, KappaMode::Asymptotic, ctx, oracle)
}

fn finish(
    alpha1: f64,
    alpha2: f64,
    p1: u64,
    p2: u64,
    kappa_mode: KappaMode,
    ctx: &SpectralContext,
    oracle: &PiOracle,
) -> Result<FitModel> {
    let fit = FitModel {
        alpha1,
        alpha2,
        p1,
        p2,
        c_const: f64::NAN,
        x0: DEFAULT_X0,
        kappa_mode,
    };
    fit.with_anchor(DEFAULT_X0, ctx, oracle)
}

/// Inverse of the fitted parabola on the branch through `kappa(0) = 0`.
pub fn kappa_of_u(u: f64, fit: &FitModel) -> Result<f64> {
    let h = fit.alpha1 / (2.0 * fit.alpha2);
    let disc = h * h - u / fit.alpha2;
    if disc < 0.0 {
        return Err(Error::DiscriminantNegative {
            u,
            apex: fit.apex(),
        });
    }
    Ok(h - disc.sqrt())
}

/// `C = pi(x0) / (x0 (1 + u(N, x0))) gamma^(kappa(x0) - 1)`.
pub fn constant_c(
    fit: &FitModel,
    ctx: &SpectralContext,
    oracle: &PiOracle,
    x0: u64,
) -> Result<f64> {
    if !oracle.is_prime(x0) {
        return Err(Error::InvalidArgument(format!(
            "anchor x0 = {x0} is not prime"
        )));
    }
    let u = ctx.u(x0 as f64)?;
    if u <= -1.0 {
        return Err(Error::Domain(format!("u(N, {x0}) = {u} <= -1")));
    }
    let kappa = kappa_of_u(u, fit)?;
    Ok(oracle.pi(x0) as f64 / (x0 as f64 * (1.0 + u)) * ctx.gamma.powf(kappa - 1.0))
}

/// `E(x) = C gamma^(-kappa(u(N, x)))`.
pub fn semiclassical_energy(x: f64, fit: &FitModel, ctx: &SpectralContext) -> Result<f64> {
    let kappa = kappa_of_u(ctx.u(x)?, fit)?;
    Ok(fit.c_const * ctx.gamma.powf(-kappa))
}

/// `pi(x|N) = gamma x (1 + u(N, x)) E(x)` for `x <= sqrt(N) / 10`.
pub fn predict_pi(x: f64, fit: &FitModel, ctx: &SpectralContext) -> Result<f64> {
    predict_pi_with(x, fit, ctx, DEFAULT_DOMAIN_FACTOR)
}

pub fn predict_pi_with(
    x: f64,
    fit: &FitModel,
    ctx: &SpectralContext,
    domain_factor: f64,
) -> Result<f64> {
    let bound = ctx.sqrt_n() / domain_factor;
    if !(x >= 2.0) || x > bound {
        return Err(Error::Domain(format!(
            "prediction domain is 2 <= x <= sqrt(N)/{domain_factor} = {bound}, got {x}"
        )));
    }
    let u = ctx.u(x)?;
    Ok(ctx.gamma * x * (1.0 + u) * semiclassical_energy(x, fit, ctx)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub x: u64,
    pub pi_exact: u64,
    pub pi_sim: f64,
    pub r_of_x: f64,
    pub li_of_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionSeries {
    pub rows: Vec<SeriesRow>,
    pub j: u64,
    pub n: u64,
    pub fit: FitModel,
    /// number of zeta zeros loaded alongside the series, reported in the header
    pub zeros: usize,
    pub domain_factor: f64,
}

/// Medians and root-mean-squares of the prediction and comparison errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesStats {
    pub points: usize,
    pub median_sim_error: f64,
    pub median_li_error: f64,
    pub median_r_error: f64,
    /// RMS of `pi(x|N) - R(x)`
    pub rms_sim_vs_r: f64,
    /// RMS of `Li(x) - pi(x)`
    pub rms_li_error: f64,
    /// RMS of `pi(x|N) - pi(x)`
    pub rms_sim_error: f64,
    /// share of rows with `|pi(x|N) - pi(x)| <= |Li(x) - pi(x)|`
    pub sim_beats_li: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), d| (s + d * d, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (s / n as f64).sqrt()
    }
}

impl PredictionSeries {
    pub fn stats(&self) -> SeriesStats {
        let err = |f: fn(&SeriesRow) -> f64| self.rows.iter().map(f).collect::<Vec<_>>();
        let sim = err(|r| (r.pi_sim - r.pi_exact as f64).abs());
        let lie = err(|r| (r.li_of_x - r.pi_exact as f64).abs());
        let beats = sim.iter().zip(&lie).filter(|(s, l)| s <= l).count();
        SeriesStats {
            points: self.rows.len(),
            median_sim_error: median(sim.clone()),
            median_li_error: median(lie.clone()),
            median_r_error: median(err(|r| (r.r_of_x - r.pi_exact as f64).abs())),
            rms_sim_vs_r: rms(self.rows.iter().map(|r| r.pi_sim - r.r_of_x)),
            rms_li_error: rms(lie.iter().copied()),
            rms_sim_error: rms(sim.iter().copied()),
            sim_beats_li: beats as f64 / self.rows.len().max(1) as f64,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# N={} j={} alpha1={} alpha2={} C={} zeros={} domain_factor={}",
            self.n,
            self.j,
            self.fit.alpha1,
            self.fit.alpha2,
            self.fit.c_const,
            self.zeros,
            self.domain_factor
        )?;
        writeln!(w, "x,pi_exact,pi_sim,R,Li")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.x, r.pi_exact, r.pi_sim, r.r_of_x, r.li_of_x
            )?;
        }
        Ok(())
    }
}

/// One row per prime `x <= x_max`.
pub fn build_series(
    ctx: &SpectralContext,
    fit: &FitModel,
    oracle: &PiOracle,
    zeros: &ZetaZeros,
    x_max: u64,
    gram: &GramSeriesParams,
) -> Result<PredictionSeries> {
    build_series_with(ctx, fit, oracle, zeros, x_max, gram, DEFAULT_DOMAIN_FACTOR)
}

pub fn build_series_with(
    ctx: &SpectralContext,
    fit: &FitModel,
    oracle: &PiOracle,
    zeros: &ZetaZeros,
    x_max: u64,
    gram: &GramSeriesParams,
    domain_factor: f64,
) -> Result<PredictionSeries> {
    let bound = ctx.sqrt_n() / domain_factor;
    if x_max as f64 > bound {
        return Err(Error::Domain(format!(
            "x_max = {x_max} exceeds the prediction domain sqrt(N)/{domain_factor} = {bound}"
        )));
    }
    if x_max > oracle.limit() {
        return Err(Error::CapacityExceeded(format!(
            "x_max = {x_max} beyond the sieve limit {}",
            oracle.limit()
        )));
    }
    let primes: Vec<u64> = oracle.table().primes_between(2, x_max).collect();
    let rows = primes
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let xf = x as f64;
            Ok(SeriesRow {
                x,
                pi_exact: i as u64 + 1,
                pi_sim: predict_pi_with(xf, fit, ctx, domain_factor)?,
                r_of_x: riemann_r(xf, gram)?,
                li_of_x: li(xf)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PredictionSeries {
        rows,
        j: ctx.j,
        n: ctx.n,
        fit: *fit,
        zeros: zeros.len(),
        domain_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(alpha1: f64, alpha2: f64) -> FitModel {
        FitModel {
            alpha1,
            alpha2,
            p1: 2,
            p2: 3,
            c_const: 0.4,
            x0: 3,
            kappa_mode: KappaMode::Empirical,
        }
    }

    #[test]
    fn lagrange_solution_passes_anchors() {
        let (a1, a2) = solve_lagrange(1.0, 1.05, 0.7, 0.99, 2, 3).unwrap();
        let f = fit(a1, a2);
        assert!((f.u(1.0) - 1.05).abs() < 1e-14);
        assert!((f.u(0.7) - 0.99).abs() < 1e-14);
        assert_eq!(f.u(0.0), 0.0);
        assert!(solve_lagrange(0.5, 1.0, 0.5, 1.0, 2, 3).is_err());
    }

    #[test]
    fn kappa_inverse_branch() {
        let f = fit(2.26, 1.2);
        assert_eq!(kappa_of_u(0.0, &f).unwrap(), 0.0);
        for k in [0.05, 0.3, 0.6, 0.9] {
            assert!((kappa_of_u(f.u(k), &f).unwrap() - k).abs() < 1e-12);
        }
        assert!(matches!(
            kappa_of_u(f.apex() + 0.01, &f),
            Err(Error::DiscriminantNegative { .. })
        ));
    }

    #[test]
    fn stats_on_small_series() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((rms([3.0, 4.0].into_iter()) - 12.5f64.sqrt()).abs() < 1e-15);
    }
}
