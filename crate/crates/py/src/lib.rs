//! Python bindings for the `qfactor` crate.

use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyLookupError, PyOSError, PyValueError};
use pyo3::prelude::*;

use qfactor::analytic::{self, GramSeriesParams, ZetaZeros};
use qfactor::ensemble::{self, build_ensemble_with, BuildOptions};
use qfactor::primes::{self, PiOracle};
use qfactor::semiclassical::{self as sc, KappaMode};
use qfactor::specfun::{self, HypergeomParams};
use qfactor::spectrum::{self, EnergyValue};
use qfactor::Error;

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Io(_) | Error::Parse { .. } => PyOSError::new_err(msg),
        Error::PairNotInEnsemble { .. } | Error::NoSolution { .. } | Error::XNotPresent(_) => {
            PyLookupError::new_err(msg)
        }
        Error::Accuracy(_) | Error::Pole(_) | Error::SingularSystem { .. } => {
            PyArithmeticError::new_err(msg)
        }
        _ => PyValueError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for qfactor::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Exact prime counting backed by a sieve table up to `limit`.
#[pyclass(name = "PiOracle", module = "qfactor_py", frozen)]
struct PyPiOracle {
    inner: Arc<PiOracle>,
}

#[pymethods]
impl PyPiOracle {
    #[new]
    fn new(limit: u64) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(PiOracle::with_limit(limit).py()?),
        })
    }

    /// An oracle large enough to enumerate `F(j)`.
    #[staticmethod]
    fn for_ensemble(j: u64) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(PiOracle::for_ensemble(j).py()?),
        })
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.inner.limit()
    }

    fn pi(&self, x: u64) -> u64 {
        self.inner.pi(x)
    }

    fn is_prime(&self, n: u64) -> bool {
        self.inner.is_prime(n)
    }

    fn nth_prime(&self, n: u64) -> PyResult<u64> {
        self.inner.nth_prime(n).py()
    }
}

/// The factorization ensemble `F(j)`.
#[pyclass(name = "Ensemble", module = "qfactor_py", frozen)]
struct PyEnsemble {
    inner: Arc<ensemble::Ensemble>,
    oracle: Arc<PiOracle>,
}

#[pymethods]
impl PyEnsemble {
    #[new]
    #[pyo3(signature = (j, budget = 100_000_000))]
    fn new(py: Python<'_>, j: u64, budget: u64) -> PyResult<Self> {
        let (inner, oracle) = py
            .detach(|| -> qfactor::Result<_> {
                let oracle = PiOracle::for_ensemble(j)?;
                let opts = BuildOptions {
                    max_entries: budget,
                    ..BuildOptions::default()
                };
                Ok((build_ensemble_with(j, &oracle, opts)?, oracle))
            })
            .py()?;
        Ok(Self {
            inner: Arc::new(inner),
            oracle: Arc::new(oracle),
        })
    }

    #[getter]
    fn j(&self) -> u64 {
        self.inner.j
    }

    #[getter]
    fn p_j(&self) -> u64 {
        self.inner.p_j
    }

    #[getter]
    fn p_j1(&self) -> u64 {
        self.inner.p_j1
    }

    /// `p_j^2`
    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    #[getter]
    fn oracle(&self) -> PyPiOracle {
        PyPiOracle {
            inner: self.oracle.clone(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, pair: (u64, u64)) -> bool {
        self.inner.contains(pair.0, pair.1)
    }

    fn __repr__(&self) -> String {
        format!("Ensemble(j={}, size={})", self.inner.j, self.inner.len())
    }

    fn window(&self) -> (u64, u64) {
        self.inner.window()
    }

    /// `(x, y, n_k, pi_x, pi_y)` tuples in ascending order.
    fn entries(&self) -> Vec<(u64, u64, u64, u64, u64)> {
        self.inner
            .entries()
            .iter()
            .map(|e| (e.x, e.y, e.n_k, e.pi_x, e.pi_y))
            .collect()
    }

    fn per_x_counts(&self) -> Vec<(u64, u64)> {
        self.inner
            .per_x_counts()
            .iter()
            .map(|(&x, &c)| (x, c))
            .collect()
    }

    /// `(closed_form, prime_sum)` estimates of the size.
    fn cardinality_estimate(&self) -> PyResult<(f64, f64)> {
        let est = ensemble::cardinality_estimate(self.inner.j, &self.oracle).py()?;
        Ok((est.closed_form, est.prime_sum))
    }

    fn energy(&self, x: u64, y: u64) -> PyResult<(u64, u64)> {
        let e = spectrum::energy(x, y, self.inner.j, &self.oracle).py()?;
        Ok((e.numerator, e.denominator))
    }

    /// `((p_num, p_den), (q_num, q_den))` in lowest terms.
    fn canonical_pq(&self, x: u64, y: u64) -> ((i128, i128), (i128, i128)) {
        let (p, q) = spectrum::canonical_pq(x, y, self.inner.j, &self.oracle);
        ((*p.numer(), *p.denom()), (*q.numer(), *q.denom()))
    }

    fn kappa(&self, x: u64) -> PyResult<f64> {
        sc::kappa_empirical(x, &self.inner).py()
    }

    /// Spectral context for `n` (default `p_j^2`).
    #[pyo3(signature = (n = None))]
    fn context(&self, n: Option<u64>) -> PyResult<PySpectralContext> {
        let n = n.unwrap_or(self.inner.n());
        let ctx = spectrum::build_context(n, &self.inner, &self.oracle).py()?;
        Ok(PySpectralContext {
            inner: ctx,
            oracle: self.oracle.clone(),
        })
    }

    /// Fit `u(kappa)` at the anchors `p1 < p2`.
    #[pyo3(signature = (n = None, p1 = 2, p2 = 3, mode = "empirical", x0 = 3))]
    fn fit(&self, n: Option<u64>, p1: u64, p2: u64, mode: &str, x0: u64) -> PyResult<PyFitModel> {
        let ctx = self.context(n)?;
        let mode = match mode {
            "empirical" => KappaMode::Empirical,
            "asymptotic" => KappaMode::Asymptotic,
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let fit = sc::fit_u_of_kappa(&self.inner, &ctx.inner, &self.oracle, p1, p2, mode).py()?;
        let fit = fit.with_anchor(x0, &ctx.inner, &self.oracle).py()?;
        Ok(PyFitModel {
            inner: fit,
            ctx: ctx.inner,
            oracle: self.oracle.clone(),
        })
    }
}

/// Constants of the spectral problem for one `N`.
#[pyclass(name = "SpectralContext", module = "qfactor_py", frozen)]
struct PySpectralContext {
    inner: spectrum::SpectralContext,
    oracle: Arc<PiOracle>,
}

fn hyper(tol: f64, terms: usize, radius: f64) -> PyResult<HypergeomParams> {
    HypergeomParams::new(tol, terms, radius).py()
}

#[pymethods]
impl PySpectralContext {
    #[getter]
    fn n(&self) -> u64 {
        self.inner.n
    }
    #[getter]
    fn j(&self) -> u64 {
        self.inner.j
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn x_m(&self) -> u64 {
        self.inner.x_m
    }
    #[getter]
    fn q_m(&self) -> f64 {
        self.inner.q_m
    }
    #[getter]
    fn rho_m(&self) -> f64 {
        self.inner.rho_m
    }
    #[getter]
    fn e_max(&self) -> f64 {
        self.inner.e_max
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "SpectralContext(N={}, j={}, q_m={}, rho_m={}, e_max={})",
            c.n, c.j, c.q_m, c.rho_m, c.e_max
        )
    }

    fn u(&self, x: f64) -> PyResult<f64> {
        self.inner.u(x).py()
    }

    fn quantum_condition(&self, energy: f64) -> PyResult<Complex64> {
        spectrum::quantum_condition(energy, &self.inner, &HypergeomParams::default()).py()
    }

    fn wavefunction(&self, energy: f64, rho: f64) -> PyResult<f64> {
        spectrum::wavefunction(energy, rho, &self.inner, &HypergeomParams::default()).py()
    }

    /// `(E, re_ratio, im_ratio, residual_at_rho_m)` for each root.
    #[pyo3(signature = (grid = 1000, tol = 1e-12, re_tol = 1e-4, e_lo = 1e-3))]
    fn scan_eigenvalues(
        &self,
        py: Python<'_>,
        grid: usize,
        tol: f64,
        re_tol: f64,
        e_lo: f64,
    ) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        let opts = spectrum::ScanOptions {
            e_lo,
            grid,
            tol,
            re_tol,
        };
        let roots = py
            .detach(|| {
                spectrum::scan_eigenvalues_with(&self.inner, &HypergeomParams::default(), &opts)
            })
            .py()?;
        Ok(roots
            .iter()
            .map(|r| (r.e, r.re_ratio, r.im_ratio, r.residual_at_rho_m))
            .collect())
    }

    /// Recover `(x, y)` with `pi(x) pi(y) = numerator` and `x y = N`.
    fn invert(&self, numerator: u64) -> PyResult<(u64, u64)> {
        let e = EnergyValue::new(numerator, self.inner.j);
        spectrum::invert_energy(&e, self.inner.n, &self.oracle).py()
    }
}

type SeriesRow = (u64, u64, f64, f64, f64);

/// The quadratic `u(kappa)` fit with its constant `C`.
#[pyclass(name = "FitModel", module = "qfactor_py", frozen)]
struct PyFitModel {
    inner: sc::FitModel,
    ctx: spectrum::SpectralContext,
    oracle: Arc<PiOracle>,
}

#[pymethods]
impl PyFitModel {
    #[getter]
    fn alpha1(&self) -> f64 {
        self.inner.alpha1
    }
    #[getter]
    fn alpha2(&self) -> f64 {
        self.inner.alpha2
    }
    #[getter]
    fn c(&self) -> f64 {
        self.inner.c_const
    }
    #[getter]
    fn x0(&self) -> u64 {
        self.inner.x0
    }
    #[getter]
    fn anchors(&self) -> (u64, u64) {
        (self.inner.p1, self.inner.p2)
    }
    #[getter]
    fn mode(&self) -> &'static str {
        match self.inner.kappa_mode {
            KappaMode::Empirical => "empirical",
            KappaMode::Asymptotic => "asymptotic",
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "FitModel(alpha1={}, alpha2={}, C={}, mode={})",
            self.inner.alpha1,
            self.inner.alpha2,
            self.inner.c_const,
            self.mode()
        )
    }

    fn kappa_of_u(&self, u: f64) -> PyResult<f64> {
        sc::kappa_of_u(u, &self.inner).py()
    }

    fn energy(&self, x: f64) -> PyResult<f64> {
        sc::semiclassical_energy(x, &self.inner, &self.ctx).py()
    }

    #[pyo3(signature = (x, domain_factor = 10.0))]
    fn predict_pi(&self, x: f64, domain_factor: f64) -> PyResult<f64> {
        sc::predict_pi_with(x, &self.inner, &self.ctx, domain_factor).py()
    }

    /// `(x, pi_exact, pi_sim, R, Li)` rows for primes `x <= x_max`.
    #[pyo3(signature = (x_max = None, domain_factor = 10.0))]
    fn series(&self, x_max: Option<u64>, domain_factor: f64) -> PyResult<Vec<SeriesRow>> {
        let x_max = x_max.unwrap_or((self.ctx.sqrt_n() / domain_factor).floor() as u64);
        let s = sc::build_series_with(
            &self.ctx,
            &self.inner,
            &self.oracle,
            &ZetaZeros::empty(),
            x_max,
            &GramSeriesParams::default(),
            domain_factor,
        )
        .py()?;
        Ok(s.rows
            .iter()
            .map(|r| (r.x, r.pi_exact, r.pi_sim, r.r_of_x, r.li_of_x))
            .collect())
    }
}

#[pyfunction]
fn pi(x: u64) -> u64 {
    primes::pi_sublinear(x)
}

#[pyfunction]
fn li(x: f64) -> PyResult<f64> {
    analytic::li(x).py()
}

#[pyfunction]
fn riemann_r(x: f64) -> PyResult<f64> {
    analytic::riemann_r(x, &GramSeriesParams::default()).py()
}

/// `R(x^rho)` on the branch `L = rho ln x`.
#[pyfunction]
fn riemann_r_pow(x: f64, rho: Complex64) -> PyResult<Complex64> {
    analytic::riemann_r_pow(x, rho, &GramSeriesParams::default()).py()
}

/// `f(x)` over the first `zeros` bundled zeta zeros.
#[pyfunction]
#[pyo3(signature = (x, zeros = 30))]
fn fluctuation_f(x: f64, zeros: usize) -> PyResult<f64> {
    analytic::fluctuation_f(
        x,
        &ZetaZeros::bundled().first(zeros),
        &GramSeriesParams::default(),
    )
    .py()
}

#[pyfunction]
#[pyo3(signature = (x, y, j, zeros = 30))]
fn epsilon_fl(x: u64, y: u64, j: u64, zeros: usize) -> PyResult<f64> {
    analytic::epsilon_fl(
        x,
        y,
        j,
        &ZetaZeros::bundled().first(zeros),
        &GramSeriesParams::default(),
    )
    .py()
}

#[pyfunction]
fn log_gamma(z: Complex64) -> PyResult<Complex64> {
    specfun::log_gamma(z).py()
}

#[pyfunction]
#[pyo3(signature = (a, b, z, tol = 1e-16, max_terms = 20000, switch_radius = 30.0))]
fn kummer_m(
    a: Complex64,
    b: Complex64,
    z: Complex64,
    tol: f64,
    max_terms: usize,
    switch_radius: f64,
) -> PyResult<Complex64> {
    specfun::kummer_m(a, b, z, &hyper(tol, max_terms, switch_radius)?).py()
}

#[pyfunction]
#[pyo3(signature = (a, b, z, tol = 1e-16, max_terms = 20000, switch_radius = 30.0))]
fn tricomi_u(
    a: Complex64,
    b: Complex64,
    z: Complex64,
    tol: f64,
    max_terms: usize,
    switch_radius: f64,
) -> PyResult<Complex64> {
    specfun::tricomi_u(a, b, z, &hyper(tol, max_terms, switch_radius)?).py()
}

/// `delta_0(E)` in `(-pi/2, pi/2)`.
#[pyfunction]
fn phase_delta0(energy: f64) -> PyResult<f64> {
    spectrum::phase_delta0(energy, &HypergeomParams::default()).py()
}

#[pymodule]
fn qfactor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPiOracle>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PySpectralContext>()?;
    m.add_class::<PyFitModel>()?;
    m.add_function(wrap_pyfunction!(pi, m)?)?;
    m.add_function(wrap_pyfunction!(li, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_r, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_r_pow, m)?)?;
    m.add_function(wrap_pyfunction!(fluctuation_f, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_fl, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(kummer_m, m)?)?;
    m.add_function(wrap_pyfunction!(tricomi_u, m)?)?;
    m.add_function(wrap_pyfunction!(phase_delta0, m)?)?;
    Ok(())
}
