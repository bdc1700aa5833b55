//! Factorization ensembles and the spectrum of an inverted-oscillator
//! factoring simulator.
//!
//! The crate is organised bottom-up:
//!
//! - [`primes`]: sieve-backed prime table and exact prime counting.
//! - [`ensemble`]: the ensemble `F(j)` of prime pairs `(x, y)` with
//!   `pi(sqrt(xy)) = j`, its cardinality estimate and per-factor statistics.
//! - [`analytic`]: `Li(x)`, Riemann's `R(x)`, zeta on the real axis, zeta
//!   zero ingestion and the zero-driven fluctuation term.
//! - [`specfun`]: complex log-gamma, Kummer `M`, Tricomi `U`, Coulomb phase.
//! - [`spectrum`]: the arithmetic energy `E`, canonical variables, boundary
//!   data, the exact quantum condition and its root scan.
//! - [`semiclassical`]: the `E = C gamma^-kappa` spectrum, the `u(kappa)`
//!   fit and the `pi(x|N)` prediction.
//! - [`cli`]: the command implementations behind the `qfactor` binary.

pub mod analytic;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod primes;
pub mod semiclassical;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};
