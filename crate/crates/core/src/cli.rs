//! Command-line front end. Exit codes: 0 success, 1 no result, 2 error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{epsilon_fl, load_zeros, GramSeriesParams, ZetaZeros, DEFAULT_ZERO_COUNT};
use crate::ensemble::{
    build_ensemble_with, cardinality_estimate, coprime_statistics, correlation, BuildOptions,
    Ensemble,
};
use crate::primes::{isqrt, nth_prime_upper_bound, pi_sublinear, PiOracle};
use crate::semiclassical::{
    build_series_with, fit_asymptotic, fit_u_of_kappa, FitModel, KappaMode, DEFAULT_DOMAIN_FACTOR,
    DEFAULT_P1, DEFAULT_P2, DEFAULT_X0,
};
use crate::specfun::HypergeomParams;
use crate::spectrum::{
    build_context, context_without_ensemble, discrepancy_report, invert_energy, quantum_condition,
    scan_eigenvalues_with, wavefunction, write_roots_csv, EnergyValue, ScanOptions,
    SpectralContext,
};
use crate::{Error, Result};

pub const CACHE_DIR_ENV: &str = "QFACTOR_CACHE_DIR";
const CACHE_FILE: &str = "pi_cache.tsv";

#[derive(Parser, Debug)]
#[command(
    name = "qfactor",
    version,
    about = "Factorization ensembles and the spectrum of a factoring simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate F(j) as CSV (x,y,n_k,pi_x,pi_y)
    Ensemble(CommonArgs),
    /// Coprime counts per smaller factor against sqrt(N)/x
    Stats(CommonArgs),
    /// Energies E_k against u(N_k, x_k), with the regular part and the zero correction
    Spectrum(SpectrumArgs),
    /// Roots of the quantum condition on (E_lo, e_max]
    Scan(ScanArgs),
    /// Coefficients of u(kappa) and the constant C
    Fit(FitArgs),
    /// The prediction pi(x|N) against pi, R and Li
    Predict(PredictArgs),
    /// Recover (x, y) from an energy numerator pi(x) pi(y)
    Invert(InvertArgs),
    /// Evaluate the quantum condition at one energy
    Qc(QcArgs),
    /// Show or clear the prime-count cache
    Cache(CacheArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Empirical,
    Asymptotic,
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("target").required(true).args(["j", "n"])))]
pub struct CommonArgs {
    /// Ensemble index; N defaults to p_j^2
    #[arg(long)]
    pub j: Option<u64>,
    /// Number to study; j = pi(floor(sqrt(N)))
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Output file (standard output when omitted)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Largest ensemble size that may be enumerated
    #[arg(long, default_value_t = 100_000_000)]
    pub budget: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ZeroArgs {
    /// File of zeta-zero ordinates, one per line (bundled table when omitted)
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    /// Number of zeros used
    #[arg(long, default_value_t = DEFAULT_ZERO_COUNT)]
    pub zeros_count: usize,
    #[arg(long, default_value_t = 2000)]
    pub gram_terms: usize,
    #[arg(long, default_value_t = 1e-16)]
    pub gram_tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct HypergeomArgs {
    #[arg(long, default_value_t = 1e-16)]
    pub series_tol: f64,
    #[arg(long, default_value_t = 20000)]
    pub series_max_terms: usize,
    #[arg(long, default_value_t = 30.0)]
    pub switch_radius: f64,
}

#[derive(Args, Debug, Clone)]
pub struct FitOptions {
    #[arg(long, default_value_t = DEFAULT_P1)]
    pub p1: u64,
    #[arg(long, default_value_t = DEFAULT_P2)]
    pub p2: u64,
    /// Anchor prime for the constant C
    #[arg(long, default_value_t = DEFAULT_X0)]
    pub x0: u64,
    /// empirical when the ensemble fits the budget, asymptotic otherwise
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub zeros: ZeroArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub hypergeom: HypergeomArgs,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// Bisection width
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Accepted |Re(ratio) - 1|
    #[arg(long, default_value_t = 1e-4)]
    pub re_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub e_lo: f64,
    /// Write the distance from each ensemble energy to its nearest root here
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub fit: FitOptions,
}

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub fit: FitOptions,
    #[command(flatten)]
    pub zeros: ZeroArgs,
    /// Predictions cover x <= sqrt(N) / domain_factor
    #[arg(long, default_value_t = DEFAULT_DOMAIN_FACTOR)]
    pub domain_factor: f64,
    /// Largest x in the series (the domain bound when omitted)
    #[arg(long)]
    pub x_max: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct InvertArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// pi(x) pi(y), the numerator of E = pi(x) pi(y) / j^2
    #[arg(long)]
    pub numerator: u64,
}

#[derive(Args, Debug, Clone)]
pub struct QcArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub hypergeom: HypergeomArgs,
    #[arg(long)]
    pub energy: f64,
}

#[derive(Args, Debug, Clone)]
pub struct CacheArgs {
    /// Delete the cache file
    #[arg(long)]
    pub clear: bool,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NoResult,
}

pub fn run(cli: Cli) -> u8 {
    match dispatch(cli.command) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::NoResult) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::CapacityExceeded(_) = e {
                eprintln!("hint: raise --budget or use --mode asymptotic where available");
            }
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Ensemble(a) => cmd_ensemble(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Scan(a) => cmd_scan(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Invert(a) => cmd_invert(&a),
        Command::Qc(a) => cmd_qc(&a),
        Command::Cache(a) => cmd_cache(&a),
    }
}

fn cache_path() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).map(|d| PathBuf::from(d).join(CACHE_FILE))
}

/// Oracle, `j` and `N` for the requested target.
struct Target {
    oracle: PiOracle,
    j: u64,
    n: u64,
}

impl Target {
    fn resolve(a: &CommonArgs) -> Result<Self> {
        let j = match (a.j, a.n) {
            (Some(j), _) => j,
            (None, Some(n)) => pi_sublinear(isqrt(n)),
            (None, None) => unreachable!("clap enforces --j or --N"),
        };
        if j == 0 {
            return Err(Error::InvalidArgument(
                "j = pi(floor(sqrt(N))) must be at least 1".into(),
            ));
        }
        let mut oracle = PiOracle::with_limit(nth_prime_upper_bound(j + 1).max(100))?;
        if let Some(path) = cache_path() {
            oracle = oracle.with_cache_file(path);
        }
        let n = match a.n {
            Some(n) => n,
            None => oracle.nth_prime(j)?.pow(2),
        };
        Ok(Self { oracle, j, n })
    }

    fn ensemble(&self, budget: u64) -> Result<Ensemble> {
        build_ensemble_with(
            self.j,
            &self.oracle,
            BuildOptions {
                max_entries: budget,
                ..BuildOptions::default()
            },
        )
    }

    fn finish(&self) -> Result<()> {
        self.oracle.persist_cache()
    }
}

fn writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize + ?Sized>(value: &T, w: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

fn cmd_ensemble(a: &CommonArgs) -> Result<Outcome> {
    let t = Target::resolve(a)?;
    let e = t.ensemble(a.budget)?;
    let mut w = writer(&a.output)?;
    match a.format {
        Format::Csv => e.write_csv(&mut w)?,
        Format::Json => write_json(e.entries(), &mut w)?,
    }
    w.flush()?;
    let (lo, hi) = e.window();
    eprintln!("F({}): window [{lo}, {hi}), size={}", e.j, e.len());
    if e.j >= 2 {
        let est = cardinality_estimate(e.j, &t.oracle)?;
        eprintln!(
            "estimate={:.2} prime_sum={:.2}",
            est.closed_form, est.prime_sum
        );
    }
    for x in e.per_x_counts().keys().take(5) {
        let rows = e.entries_for_x(*x);
        eprintln!(
            "x={x}: {} entries, y in [{}, {}]",
            rows.len(),
            rows.first().map_or(0, |r| r.y),
            rows.last().map_or(0, |r| r.y)
        );
    }
    t.finish()?;
    Ok(Outcome::Success)
}

fn cmd_stats(a: &CommonArgs) -> Result<Outcome> {
    let t = Target::resolve(a)?;
    let e = t.ensemble(a.budget)?;
    let stats = coprime_statistics(&e)?;
    let mut w = writer(&a.output)?;
    match a.format {
        Format::Csv => {
            writeln!(w, "x,observed,predicted")?;
            for s in &stats {
                writeln!(w, "{},{},{}", s.x, s.observed, s.predicted)?;
            }
        }
        Format::Json => write_json(&stats, &mut w)?,
    }
    w.flush()?;
    eprintln!(
        "F({}): {} smaller factors, correlation={:.6}",
        e.j,
        stats.len(),
        correlation(&stats)
    );
    t.finish()?;
    Ok(Outcome::Success)
}

fn zeros_of(a: &ZeroArgs) -> Result<(ZetaZeros, GramSeriesParams)> {
    let all = match &a.zeros {
        Some(path) => load_zeros(path)?,
        None => ZetaZeros::bundled(),
    };
    Ok((
        all.first(a.zeros_count),
        GramSeriesParams::new(a.gram_terms, a.gram_tol)?,
    ))
}

#[derive(Serialize)]
struct SpectrumRow {
    x: u64,
    y: u64,
    n_k: u64,
    energy: f64,
    u: f64,
    regular: f64,
    /// undefined for x = 2
    eps_fl: Option<f64>,
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let t = Target::resolve(&a.common)?;
    let e = t.ensemble(a.common.budget)?;
    let (zeros, gram) = zeros_of(&a.zeros)?;
    let j = e.j;
    let rows = e
        .entries()
        .par_iter()
        .map(|r| {
            let root = (r.n_k as f64).sqrt();
            let u = j as f64 / root * (root / r.x as f64).ln();
            Ok(SpectrumRow {
                x: r.x,
                y: r.y,
                n_k: r.n_k,
                energy: (r.pi_x * r.pi_y) as f64 / (j * j) as f64,
                u,
                regular: 1.0 + u * u,
                eps_fl: if r.x > 2 {
                    Some(epsilon_fl(r.x, r.y, j, &zeros, &gram)?)
                } else {
                    None
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w = writer(&a.common.output)?;
    match a.common.format {
        Format::Csv => {
            writeln!(w, "# j={j} zeros={}", zeros.len())?;
            writeln!(w, "x,y,n_k,E,u,E_regular,eps_fl")?;
            for r in &rows {
                let eps = r.eps_fl.map_or(String::new(), |v| v.to_string());
                writeln!(
                    w,
                    "{},{},{},{},{},{},{eps}",
                    r.x, r.y, r.n_k, r.energy, r.u, r.regular
                )?;
            }
        }
        Format::Json => write_json(&rows, &mut w)?,
    }
    w.flush()?;
    eprintln!("F({j}): {} energies, {} zeros", rows.len(), zeros.len());
    t.finish()?;
    Ok(Outcome::Success)
}

fn hypergeom(a: &HypergeomArgs) -> Result<HypergeomParams> {
    HypergeomParams::new(a.series_tol, a.series_max_terms, a.switch_radius)
}

/// Context from the enumerated ensemble when it fits the budget.
fn context(t: &Target, budget: u64) -> Result<(SpectralContext, Option<Ensemble>)> {
    match t.ensemble(budget) {
        Ok(e) => Ok((build_context(t.n, &e, &t.oracle)?, Some(e))),
        Err(Error::CapacityExceeded(msg)) => {
            log::info!("{msg}; using x_m = 2 without enumeration");
            Ok((context_without_ensemble(t.n, &t.oracle)?, None))
        }
        Err(e) => Err(e),
    }
}

fn cmd_scan(a: &ScanArgs) -> Result<Outcome> {
    let t = Target::resolve(&a.common)?;
    let p = hypergeom(&a.hypergeom)?;
    let (ctx, ens) = context(&t, a.common.budget)?;
    let opts = ScanOptions {
        e_lo: a.e_lo,
        grid: a.grid,
        tol: a.tol,
        re_tol: a.re_tol,
    };
    let roots = scan_eigenvalues_with(&ctx, &p, &opts)?;
    let mut w = writer(&a.common.output)?;
    match a.common.format {
        Format::Csv => write_roots_csv(&roots, &mut w)?,
        Format::Json => write_json(&roots, &mut w)?,
    }
    w.flush()?;
    eprintln!(
        "N={} j={} q_m={:.6} rho_m={:.6} e_max={:.6}: {} roots",
        ctx.n,
        ctx.j,
        ctx.q_m,
        ctx.rho_m,
        ctx.e_max,
        roots.len()
    );
    if let Some(e) = ens {
        let mut energies: Vec<f64> = e
            .entries()
            .iter()
            .map(|r| (r.pi_x * r.pi_y) as f64 / (e.j * e.j) as f64)
            .collect();
        energies.sort_by(f64::total_cmp);
        energies.dedup();
        let report = discrepancy_report(&energies, &roots);
        let mut d: Vec<f64> = report.iter().filter_map(|r| r.distance).collect();
        d.sort_by(f64::total_cmp);
        if !d.is_empty() {
            eprintln!(
                "distance from {} distinct ensemble energies to the nearest root: min={:.3e} median={:.3e} max={:.3e}",
                energies.len(),
                d[0],
                d[d.len() / 2],
                d[d.len() - 1]
            );
        }
        if let Some(path) = &a.report {
            let mut r = BufWriter::new(File::create(path)?);
            writeln!(r, "E_k,nearest_root,distance")?;
            for row in &report {
                let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
                writeln!(
                    r,
                    "{},{},{}",
                    row.e,
                    opt(row.nearest_root),
                    opt(row.distance)
                )?;
            }
            r.flush()?;
        }
    }
    t.finish()?;
    Ok(if roots.is_empty() {
        Outcome::NoResult
    } else {
        Outcome::Success
    })
}

fn fitted(t: &Target, f: &FitOptions, budget: u64) -> Result<(SpectralContext, FitModel)> {
    let want = f.mode;
    let (ctx, ens) = if want == Some(ModeArg::Asymptotic) {
        match t.ensemble(budget) {
            Ok(e) => (build_context(t.n, &e, &t.oracle)?, Some(e)),
            Err(Error::CapacityExceeded(_)) => (context_without_ensemble(t.n, &t.oracle)?, None),
            Err(e) => return Err(e),
        }
    } else if want == Some(ModeArg::Empirical) {
        let e = t.ensemble(budget)?;
        (build_context(t.n, &e, &t.oracle)?, Some(e))
    } else {
        context(t, budget)?
    };
    let fit = match (&ens, want) {
        (Some(e), Some(ModeArg::Empirical) | None) => {
            fit_u_of_kappa(e, &ctx, &t.oracle, f.p1, f.p2, KappaMode::Empirical)?
        }
        (Some(e), Some(ModeArg::Asymptotic)) => {
            fit_u_of_kappa(e, &ctx, &t.oracle, f.p1, f.p2, KappaMode::Asymptotic)?
        }
        (None, _) => {
            let est = cardinality_estimate(t.j, &t.oracle)?.closed_form;
            fit_asymptotic(&ctx, &t.oracle, est, f.p1, f.p2)?
        }
    };
    let fit = if f.x0 == fit.x0 {
        fit
    } else {
        fit.with_anchor(f.x0, &ctx, &t.oracle)?
    };
    Ok((ctx, fit))
}

fn mode_name(m: KappaMode) -> &'static str {
    match m {
        KappaMode::Empirical => "empirical",
        KappaMode::Asymptotic => "asymptotic",
    }
}

fn cmd_fit(a: &FitArgs) -> Result<Outcome> {
    let t = Target::resolve(&a.common)?;
    let (ctx, fit) = fitted(&t, &a.fit, a.common.budget)?;
    let mut w = writer(&a.common.output)?;
    match a.common.format {
        Format::Csv => {
            writeln!(w, "N,j,alpha1,alpha2,p1,p2,C,x0,mode")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                ctx.n,
                ctx.j,
                fit.alpha1,
                fit.alpha2,
                fit.p1,
                fit.p2,
                fit.c_const,
                fit.x0,
                mode_name(fit.kappa_mode)
            )?;
        }
        Format::Json => write_json(&fit, &mut w)?,
    }
    w.flush()?;
    eprintln!(
        "N={} j={}: u = {:.4} kappa - {:.4} kappa^2, C = {:.4} ({})",
        ctx.n,
        ctx.j,
        fit.alpha1,
        fit.alpha2,
        fit.c_const,
        mode_name(fit.kappa_mode)
    );
    t.finish()?;
    Ok(Outcome::Success)
}

fn cmd_predict(a: &PredictArgs) -> Result<Outcome> {
    let t = Target::resolve(&a.common)?;
    let (ctx, fit) = fitted(&t, &a.fit, a.common.budget)?;
    let (zeros, gram) = zeros_of(&a.zeros)?;
    let bound = (ctx.sqrt_n() / a.domain_factor).floor() as u64;
    let x_max = a.x_max.unwrap_or(bound);
    let series = build_series_with(&ctx, &fit, &t.oracle, &zeros, x_max, &gram, a.domain_factor)?;
    let mut w = writer(&a.common.output)?;
    match a.common.format {
        Format::Csv => series.write_csv(&mut w)?,
        Format::Json => write_json(&series, &mut w)?,
    }
    w.flush()?;
    let s = series.stats();
    eprintln!(
        "N={} j={}: {} primes; median |sim-pi|={:.3} |Li-pi|={:.3}; rms(sim-R)={:.3} rms(Li-pi)={:.3}",
        ctx.n, ctx.j, s.points, s.median_sim_error, s.median_li_error, s.rms_sim_vs_r, s.rms_li_error
    );
    t.finish()?;
    Ok(if series.rows.is_empty() {
        Outcome::NoResult
    } else {
        Outcome::Success
    })
}

fn cmd_invert(a: &InvertArgs) -> Result<Outcome> {
    let t = Target::resolve(&a.common)?;
    let e = EnergyValue::new(a.numerator, t.j);
    let out = match invert_energy(&e, t.n, &t.oracle) {
        Ok((x, y)) => {
            let mut w = writer(&a.common.output)?;
            match a.common.format {
                Format::Csv => writeln!(w, "{x} {y}")?,
                Format::Json => write_json(&serde_json::json!({ "x": x, "y": y }), &mut w)?,
            }
            w.flush()?;
            Outcome::Success
        }
        Err(err @ Error::NoSolution { .. }) => {
            eprintln!("{err}");
            Outcome::NoResult
        }
        Err(err) => return Err(err),
    };
    t.finish()?;
    Ok(out)
}

fn cmd_qc(a: &QcArgs) -> Result<Outcome> {
    let t = Target::resolve(&a.common)?;
    let p = hypergeom(&a.hypergeom)?;
    let (ctx, _) = context(&t, a.common.budget)?;
    let r = quantum_condition(a.energy, &ctx, &p)?;
    let residual = wavefunction(a.energy, ctx.rho_m, &ctx, &p)?;
    let mut w = writer(&a.common.output)?;
    match a.common.format {
        Format::Csv => {
            writeln!(w, "E,re_ratio,im_ratio,residual_at_rho_m")?;
            writeln!(w, "{},{},{},{}", a.energy, r.re, r.im, residual)?;
        }
        Format::Json => write_json(
            &serde_json::json!({
                "E": a.energy,
                "re_ratio": r.re,
                "im_ratio": r.im,
                "residual_at_rho_m": residual,
                "context": ctx,
            }),
            &mut w,
        )?,
    }
    w.flush()?;
    t.finish()?;
    Ok(Outcome::Success)
}

fn cmd_cache(a: &CacheArgs) -> Result<Outcome> {
    let Some(path) = cache_path() else {
        eprintln!("{CACHE_DIR_ENV} is not set; no cache in use");
        return Ok(Outcome::NoResult);
    };
    if a.clear {
        if path.exists() {
            std::fs::remove_file(&path)?;
        }
        eprintln!("cleared {}", path.display());
        return Ok(Outcome::Success);
    }
    let oracle = PiOracle::with_limit(100)?.with_cache_file(&path);
    let n = oracle.load_cache()?;
    println!("{}\t{n} entries", path.display());
    Ok(Outcome::Success)
}
