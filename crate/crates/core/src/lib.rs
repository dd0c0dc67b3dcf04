//! Multiscale sparse Fourier recovery for noisy high-dimensional signals.
//!
//! A signal with `s` energetic frequencies in `[-N/2, N/2)^d` is partially
//! unwrapped into a lower-dimensional domain, sampled along projection lines
//! with prime length `p`, and recovered entry by entry from phase shifts of
//! geometrically growing size. Already-found modes are peeled off the samples
//! of later iterations.
//!
//! The pieces, bottom up:
//!
//! - [`spectrum`]: modes, spectra, balanced residues, the signal text format.
//! - [`unwrap`]: the block unwrapping map and its exact integer inverse.
//! - [`sampler`]: noisy projection-line samples with residual subtraction.
//! - [`dft`]: prime selection, Bluestein DFT, top-bin ranking.
//! - [`estimator`]: schedules, collision tests, multiscale entry refinement.
//! - [`recovery`]: the outer peeling loop.
//! - [`oracle`]: brute-force references for tests.
//! - [`bench`]: signal generation, trials, sweeps and CSV output.

pub mod bench;
pub mod dft;
mod error;
pub mod estimator;
pub mod oracle;
pub mod recovery;
pub mod sampler;
pub mod spectrum;
pub mod unwrap;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use recovery::{recover, RecoveryConfig, RecoveryResult};
pub use sampler::{NoiseKind, NoiseModel};
pub use spectrum::{FourierMode, SparseSpectrum};
pub use unwrap::UnwrapMap;
