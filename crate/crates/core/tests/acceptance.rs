//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfactor::analytic::{GramSeriesParams, ZetaZeros};
use qfactor::ensemble::{build_ensemble, cardinality_estimate, Ensemble};
use qfactor::primes::{count_primes_segmented, pi_sublinear, PiOracle, PrimeTable};
use qfactor::semiclassical::{build_series, fit_u_of_kappa, KappaMode};
use qfactor::specfun::{
    gamma, kummer_m, kummer_m_prime, tricomi_u, tricomi_u_prime, HypergeomParams, Method,
};
use qfactor::spectrum::{
    build_context, discrepancy_report, energy, invert_energy, pq_from_counts, scan_eigenvalues,
    wavefunction, wavefunction_samples, SpectralContext,
};

const ENSEMBLE_SIZE_304: usize = 5760;
const X2_COUNT: usize = 1123;
const X2_RANGE: (u64, u64) = (2006021, 2022043);
const X3_COUNT: usize = 764;
const X3_RANGE: (u64, u64) = (1337359, 1348033);
const ENSEMBLE_RUNTIME: Duration = Duration::from_secs(10);

const ESTIMATE_304: f64 = 6082.0;
const ESTIMATE_TOL: f64 = 1.0;
const ESTIMATE_RATIO_BAND: (f64, f64) = (0.9, 1.2);

const ALPHA1: f64 = 2.26;
const ALPHA2: f64 = 1.20;
const ALPHA_TOL: f64 = 0.05;

const C_LIMIT: f64 = 1.0 / 3.0;
const C_ANCHOR: u64 = 3;

const LARGE_J_BUDGET: Duration = Duration::from_secs(300);

const KUMMER_TOL: f64 = 1e-9;
const WRONSKIAN_TOL: f64 = 1e-8;
const ROUTE_BAND: f64 = 1e-6;
const RANDOM_POINTS: usize = 100;

const SCAN_GRID: usize = 1000;
const SCAN_TOL: f64 = 1e-12;
const BOUNDARY_REL: f64 = 1e-6;

const INVERT_SAMPLES: usize = 500;

const PI_1E9: u64 = 50847534;

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, title: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2}. {title}: {detail}");
        if !pass {
            self.failed.push(id);
        }
    }
}

fn setup(j: u64) -> (PiOracle, Ensemble) {
    let oracle = PiOracle::for_ensemble(j).unwrap();
    let e = build_ensemble(j, &oracle).unwrap();
    (oracle, e)
}

fn context(j: u64, n: Option<u64>) -> (PiOracle, Ensemble, SpectralContext) {
    let (o, e) = setup(j);
    let n = n.unwrap_or(e.n());
    let c = build_context(n, &e, &o).unwrap();
    (o, e, c)
}

fn y_range(e: &Ensemble, x: u64) -> (usize, u64, u64) {
    let rows = e.entries_for_x(x);
    (
        rows.len(),
        rows.first().map_or(0, |r| r.y),
        rows.last().map_or(0, |r| r.y),
    )
}

fn criterion_1(r: &mut Report) {
    let start = Instant::now();
    let (_, e) = setup(304);
    let elapsed = start.elapsed();
    let x2 = y_range(&e, 2);
    let x3 = y_range(&e, 3);
    let members = e.contains(1019, 3947) && e.contains(1291, 3119);
    let pass = e.len() == ENSEMBLE_SIZE_304
        && x2 == (X2_COUNT, X2_RANGE.0, X2_RANGE.1)
        && x3 == (X3_COUNT, X3_RANGE.0, X3_RANGE.1)
        && members
        && elapsed < ENSEMBLE_RUNTIME;
    r.line(
        1,
        "ensemble exactness F(304)",
        pass,
        format!(
            "|F|={} (want {ENSEMBLE_SIZE_304}); x=2: {} in [{}, {}] (want {X2_COUNT} in {X2_RANGE:?}); \
             x=3: {} in [{}, {}] (want {X3_COUNT} in {X3_RANGE:?}); members={members}; {:.2?}",
            e.len(), x2.0, x2.1, x2.2, x3.0, x3.1, x3.2, elapsed
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let mut detail = Vec::new();
    let mut pass = true;
    for j in [62, 139, 304] {
        let (o, e) = setup(j);
        let est = cardinality_estimate(j, &o).unwrap().closed_form;
        let ratio = est / e.len() as f64;
        pass &= (ESTIMATE_RATIO_BAND.0..=ESTIMATE_RATIO_BAND.1).contains(&ratio);
        if j == 304 {
            pass &= (est - ESTIMATE_304).abs() <= ESTIMATE_TOL;
            detail.push(format!(
                "estimate(304)={est:.2} (want {ESTIMATE_304} +- {ESTIMATE_TOL})"
            ));
        }
        detail.push(format!("j={j}: ratio {ratio:.3}"));
    }
    r.line(2, "cardinality estimate", pass, detail.join("; "));
}

fn criterion_3(r: &mut Report) {
    let (o, e, c) = context(304, None);
    let f = fit_u_of_kappa(&e, &c, &o, 2, 3, KappaMode::Empirical).unwrap();
    let pass = (f.alpha1 - ALPHA1).abs() <= ALPHA_TOL && (f.alpha2 - ALPHA2).abs() <= ALPHA_TOL;
    r.line(
        3,
        "fit reproduction j=304, anchors (2,3)",
        pass,
        format!(
            "alpha1={:.4} (want {ALPHA1} +- {ALPHA_TOL}), alpha2={:.4} (want {ALPHA2} +- {ALPHA_TOL})",
            f.alpha1, f.alpha2
        ),
    );
}

fn criterion_4(r: &mut Report) {
    let mut checked = 0;
    let mut bad = 0;
    for j in [62, 139, 304] {
        let (_, e) = setup(j);
        for k in e.entries() {
            let (p, q) = pq_from_counts(k.pi_x, k.pi_y, j);
            let en = Ratio::new((k.pi_x * k.pi_y) as i128, (j * j) as i128);
            if q * q - p * p != en {
                bad += 1;
            }
            checked += 1;
        }
    }
    r.line(
        4,
        "exact algebra q^2 - p^2 = E",
        bad == 0,
        format!("{checked} entries over F(62), F(139), F(304), {bad} mismatches"),
    );
}

fn criterion_5(r: &mut Report) {
    let mut gaps = Vec::new();
    for j in [62, 139, 304, 3155] {
        let (o, e, c) = context(j, None);
        let f = fit_u_of_kappa(&e, &c, &o, 2, 3, KappaMode::Empirical)
            .unwrap()
            .with_anchor(C_ANCHOR, &c, &o)
            .unwrap();
        gaps.push((j, f.c_const, (f.c_const - C_LIMIT).abs()));
    }
    let pass = gaps.windows(2).all(|w| w[1].2 < w[0].2);
    let detail = gaps
        .iter()
        .map(|(j, c, g)| format!("j={j}: C={c:.4} gap={g:.4}"))
        .collect::<Vec<_>>()
        .join("; ");
    r.line(5, "constant C approaches 1/3 monotonically", pass, detail);
}

fn prediction_check(j: u64, n: Option<u64>) -> (bool, String) {
    let (o, e, c) = context(j, n);
    let f = fit_u_of_kappa(&e, &c, &o, 2, 3, KappaMode::Empirical).unwrap();
    let x_max = (c.sqrt_n() / 10.0).floor() as u64;
    let s = build_series(
        &c,
        &f,
        &o,
        &ZetaZeros::empty(),
        x_max,
        &GramSeriesParams::default(),
    )
    .unwrap()
    .stats();
    let median_ok = s.median_sim_error <= s.median_li_error;
    let rms_ok = s.rms_sim_vs_r < s.rms_li_error;
    (
        median_ok && rms_ok,
        format!(
            "j={j} N={}: {} primes, median |sim-pi| {:.3} vs |Li-pi| {:.3} ({}), rms(sim-R) {:.3} vs rms(Li-pi) {:.3} ({})",
            c.n,
            s.points,
            s.median_sim_error,
            s.median_li_error,
            if median_ok { "ok" } else { "no" },
            s.rms_sim_vs_r,
            s.rms_li_error,
            if rms_ok { "ok" } else { "no" }
        ),
    )
}

fn criterion_6(r: &mut Report) {
    let mut pass = true;
    let mut detail = Vec::new();
    // N = p_139^2; the number 661643 quoted for j = 139 has pi(floor(sqrt)) = 141
    for (j, n) in [(139, None), (62, Some(91301))] {
        let (ok, d) = prediction_check(j, n);
        pass &= ok;
        detail.push(d);
    }
    let start = Instant::now();
    let (ok, d) = prediction_check(3155, None);
    if start.elapsed() < LARGE_J_BUDGET {
        pass &= ok;
        detail.push(d);
    } else {
        detail.push(format!("j=3155 skipped after {:.0?}", start.elapsed()));
    }
    r.line(6, "prediction quality", pass, detail.join("; "));
}

fn random_params(rng: &mut ChaCha8Rng) -> (Complex64, Complex64, Complex64) {
    let a = Complex64::new(rng.gen_range(-2.0..3.0), rng.gen_range(-3.0..3.0));
    let mut b = Complex64::new(rng.gen_range(0.2..3.5), rng.gen_range(-1.0..1.0));
    if b.im.abs() < 1e-3 && (b.re - b.re.round()).abs() < 0.05 {
        b.re += 0.25;
    }
    let z = Complex64::from_polar(rng.gen_range(0.1..40.0), rng.gen_range(-3.0..3.0));
    (a, b, z)
}

fn criterion_7(r: &mut Report) {
    let p = HypergeomParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut m0 = 0.0f64;
    for _ in 0..RANDOM_POINTS {
        let (a, b, _) = random_params(&mut rng);
        m0 = m0.max((kummer_m(a, b, Complex64::new(0.0, 0.0), &p).unwrap() - 1.0).norm());
    }

    let mut kummer = 0.0f64;
    for _ in 0..RANDOM_POINTS {
        let (a, b, z) = random_params(&mut rng);
        let lhs = kummer_m(a, b, z, &p).unwrap();
        let rhs = z.exp() * kummer_m(b - a, b, -z, &p).unwrap();
        kummer = kummer.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()));
    }

    let mut wronskian = 0.0f64;
    let mut n = 0;
    while n < RANDOM_POINTS {
        let (a, b, z) = random_params(&mut rng);
        let m = kummer_m(a, b, z, &p).unwrap();
        let u = tricomi_u(a, b, z, &p).unwrap();
        let w =
            m * tricomi_u_prime(a, b, z, &p).unwrap() - kummer_m_prime(a, b, z, &p).unwrap() * u;
        let want = -gamma(b).unwrap() / gamma(a).unwrap() * (-b * z.ln()).exp() * z.exp();
        let scale = (m * tricomi_u_prime(a, b, z, &p).unwrap())
            .norm()
            .max(want.norm());
        wronskian = wronskian.max((w - want).norm() / scale);
        n += 1;
    }

    let b = Complex64::new(1.5, 0.0);
    let radius = p.asymptotic_switch_radius;
    let mut band = 0.0f64;
    for e in [0.1, 0.6, 1.0, 1.6, 2.2] {
        let a = Complex64::new(0.75, -e / 4.0);
        for t in [0.5f64, 1.0, std::f64::consts::FRAC_PI_2, 2.5] {
            let z = Complex64::from_polar(radius, t);
            let asym = p.with_method(Method::Asymptotic);
            let near = p.with_method(Method::Ode);
            let rel = |x: Complex64, y: Complex64| (x - y).norm() / y.norm();
            band = band.max(rel(
                kummer_m(a, b, z, &near).unwrap(),
                kummer_m(a, b, z, &asym).unwrap(),
            ));
            band = band.max(rel(
                tricomi_u(a, b, z, &near).unwrap(),
                tricomi_u(a, b, z, &asym).unwrap(),
            ));
        }
    }
    let pass =
        m0 == 0.0 && kummer <= KUMMER_TOL && wronskian <= WRONSKIAN_TOL && band <= ROUTE_BAND;
    r.line(
        7,
        "special-function identities",
        pass,
        format!(
            "max|M(a,b,0)-1|={m0:.1e}; Kummer {kummer:.1e} (<= {KUMMER_TOL:.0e}); \
             Wronskian {wronskian:.1e} (<= {WRONSKIAN_TOL:.0e}); route band {band:.1e} (<= {ROUTE_BAND:.0e})"
        ),
    );
}

fn criterion_8(r: &mut Report) {
    let (_, e, c) = context(62, None);
    let p = HypergeomParams::default();
    let a = scan_eigenvalues(&c, &p, SCAN_GRID, SCAN_TOL).unwrap();
    let b = scan_eigenvalues(&c, &p, 2 * SCAN_GRID, SCAN_TOL).unwrap();
    let stable = a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(x, y)| (x.e - y.e).abs() <= 10.0 * SCAN_TOL);
    let mut verified = true;
    let mut worst = 0.0f64;
    for root in &a {
        let samples = wavefunction_samples(root.e, &c, &p, 4000).unwrap();
        let peak = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
        let end = wavefunction(root.e, c.rho_m, &c, &p).unwrap().abs() / peak;
        worst = worst.max(end);
        verified &= end < BOUNDARY_REL;
    }
    let mut energies: Vec<f64> = e
        .entries()
        .iter()
        .map(|k| (k.pi_x * k.pi_y) as f64 / (62.0 * 62.0))
        .collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup();
    let mut d: Vec<f64> = discrepancy_report(&energies, &a)
        .iter()
        .filter_map(|x| x.distance)
        .collect();
    d.sort_by(f64::total_cmp);
    let roots = a
        .iter()
        .map(|x| format!("{:.10}", x.e))
        .collect::<Vec<_>>()
        .join(", ");
    let report = if d.is_empty() {
        "no roots to compare".to_string()
    } else {
        format!(
            "exploratory: {} distinct E_k, distance to nearest root min {:.3} median {:.3} max {:.3}",
            energies.len(),
            d[0],
            d[d.len() / 2],
            d[d.len() - 1]
        )
    };
    r.line(
        8,
        "quantum-condition roots j=62",
        stable && verified && !a.is_empty(),
        format!(
            "N={} roots [{roots}] stable under grid doubling={stable}; max |R(rho_m)|/max|R| = {worst:.1e} (< {BOUNDARY_REL:.0e}); {report}",
            c.n
        ),
    );
}

fn criterion_9(r: &mut Report) {
    let mut checked = 0;
    let mut bad = 0;
    let (o, e) = setup(62);
    for k in e.entries() {
        let v = energy(k.x, k.y, 62, &o).unwrap();
        bad += (invert_energy(&v, k.n_k, &o).ok() != Some((k.x, k.y))) as usize;
        checked += 1;
    }
    let (o, e) = setup(304);
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    for k in e.entries().choose_multiple(&mut rng, INVERT_SAMPLES) {
        let v = energy(k.x, k.y, 304, &o).unwrap();
        bad += (invert_energy(&v, k.n_k, &o).ok() != Some((k.x, k.y))) as usize;
        checked += 1;
    }
    r.line(
        9,
        "inversion correctness",
        bad == 0,
        format!("{checked} members (all of F(62), {INVERT_SAMPLES} of F(304)), {bad} mismatches"),
    );
}

fn trial_division(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn criterion_10(r: &mut Report) {
    let oracle = PiOracle::with_limit(1_000_000).unwrap();
    let mut count = 0;
    let mut exhaustive = true;
    let mut cumulative = vec![0u64; 1_000_001];
    for n in 0..=1_000_000u64 {
        if trial_division(n) {
            count += 1;
        }
        cumulative[n as usize] = count;
        if n <= 10_000 {
            exhaustive &= oracle.pi(n) == count;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let random_ok = (0..1000).all(|_| {
        let x = rng.gen_range(0..=1_000_000u64);
        oracle.pi(x) == cumulative[x as usize]
    });

    let table = PrimeTable::new(100_000_000).unwrap();
    let spots = [
        100_000_000u64,
        99_999_989,
        99_999_988,
        65_536_000,
        50_000_017,
        12_345_678,
    ];
    let spot_ok = spots.iter().all(|&x| pi_sublinear(x) == table.pi(x));
    let pi9 = pi_sublinear(1_000_000_000);
    let pi9_segmented = count_primes_segmented(1_000_000_000);
    let pass = exhaustive && random_ok && spot_ok && pi9 == PI_1E9 && pi9_segmented == PI_1E9;
    r.line(
        10,
        "prime-counting substrate",
        pass,
        format!(
            "exhaustive to 1e4={exhaustive}; 1000 random points to 1e6={random_ok}; \
             sublinear vs sieve at 1e8 scale={spot_ok}; pi(1e9)={pi9} / {pi9_segmented} (want {PI_1E9})"
        ),
    );
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r);
    if r.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!(
            "acceptance: {} failing criteria {:?}",
            r.failed.len(),
            r.failed
        );
        std::process::exit(1);
    }
}
