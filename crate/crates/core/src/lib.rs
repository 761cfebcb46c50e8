//! Numerical toolkit for randomness extraction and decoupling bounds.
//!
//! The crate evaluates sandwiched Rényi conditional entropies, builds
//! strongly 2-universal hash families over GF(2^n) and Haar randomizing
//! channel ensembles, verifies the one-shot hashing/decoupling inequality
//! they satisfy, and tabulates the closed-form error exponent for
//! entropy-accumulation rate sweeps.
//!
//! Layout:
//! - [`qops`] — dense complex linear algebra (tensor, partial trace,
//!   Hermitian powers, Schatten norms, Haar sampling, seeded RNG streams)
//! - [`entropy`] — sandwiched Rényi conditional entropies, fixed-σ and
//!   optimized, plus classical closed forms
//! - [`hashfam`] — GF(2^n) affine hash families, exhaustive 2-universality
//!   verification, induced classical-quantum channels
//! - [`decouple`] — Haar-unitary randomizing ensembles and the perfectly
//!   randomizing reference channel
//! - [`verify`] — both sides of the main bound, sweep reports (CSV/JSON),
//!   and the trace-norm contraction property tester
//! - [`eat`] — error-exponent closed form, grid-search oracle, rate sweeps
//!
//! Sampling loops run under `rayon` when the default `parallel` feature is
//! enabled; disabling it gives a sequential build with bit-identical output.

pub mod decouple;
pub mod eat;
pub mod entropy;
mod error;
pub mod exec;
pub mod hashfam;
pub mod qops;
pub mod verify;

pub use error::{Error, Result};
