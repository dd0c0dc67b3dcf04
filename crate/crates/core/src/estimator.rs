//! Multiscale estimation of frequency entries from phase shifts.
//!
//! For a candidate bin `m` of the unshifted DFT, the ratio of the shifted to
//! the unshifted bin is close to `exp(2 pi i eps v')` for the entry `v'` being
//! estimated. A small first shift `eps_0` pins `v'` coarsely without
//! ambiguity. Each later shift `eps_a = beta^a eps_0` only has to resolve the
//! remaining error, which it does to a finer absolute precision. After
//! `M + 1` levels the error is below one half and rounding is exact.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::dft::next_prime_at_least;
use crate::{Error, Result};

/// Collision-test threshold used when the formula gives zero (noiseless runs).
pub const TAU_FLOOR: f64 = 1e-9;

/// Magnitudes below this are treated as empty bins.
const EMPTY_BIN: f64 = 1e-300;

/// Argument in the branch `[-pi, pi)`.
pub fn arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a >= PI {
        a - TAU
    } else {
        a
    }
}

/// Representative of `x` modulo 1 in `[-1/2, 1/2)`.
pub fn wrap_half(x: f64) -> f64 {
    let r = x - x.round();
    // round() sends +-0.5 away from zero, leaving +0.5 on one side
    if r >= 0.5 {
        r - 1.0
    } else if r < -0.5 {
        r + 1.0
    } else {
        r
    }
}

/// Distance from `z` to the nearest point of the lattice `spacing * Z`.
pub fn lee_norm(z: f64, spacing: f64) -> f64 {
    let r = z / spacing;
    (r - r.round()).abs() * spacing
}

/// Run parameters for one outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoverySchedule {
    pub p: usize,
    /// Collision threshold from the formula; zero when sigma is zero.
    pub tau: f64,
    /// Index of the last level; there are `m + 1` levels.
    pub m: usize,
    pub eps0: f64,
    pub beta: f64,
    pub delta: f64,
    pub shifts: Vec<f64>,
    sigma_term: f64,
}

impl RecoverySchedule {
    /// Threshold actually applied by the collision test.
    pub fn effective_tau(&self) -> f64 {
        self.tau.max(TAU_FLOOR)
    }

    /// Same schedule with a different sample length; `tau` follows `p`.
    pub fn with_prime(&self, p: usize) -> Self {
        Self { p, tau: self.sigma_term / (p as f64).sqrt(), ..self.clone() }
    }
}

/// `floor(log_beta x) + 1` for `x >= 1`, computed by repeated multiplication
/// so exact powers are not lost to rounding in `ln`.
fn levels_for(x: f64, beta: f64) -> usize {
    let mut k = 0usize;
    let mut power = beta;
    while power <= x {
        k += 1;
        power *= beta;
    }
    k + 1
}

pub fn make_schedule(
    s_star: usize,
    sigma: f64,
    a_min: f64,
    c1: f64,
    c_sigma: f64,
    beta: f64,
    eff_bandwidth: u64,
) -> Result<RecoverySchedule> {
    if s_star == 0 {
        return Err(Error::InvalidParameter("remaining sparsity must be positive".into()));
    }
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must exceed 1")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be finite and >= 0")));
    }
    if !(a_min > 0.0 && a_min.is_finite()) {
        return Err(Error::InvalidParameter(format!("a_min = {a_min} must be positive")));
    }
    if !(c1 > 0.0 && c_sigma >= 0.0) {
        return Err(Error::InvalidParameter("c1 must be positive and c_sigma non-negative".into()));
    }
    if eff_bandwidth == 0 {
        return Err(Error::InvalidParameter("bandwidth must be positive".into()));
    }

    let noise_floor = (beta * (beta + 1.0) * a_min * c_sigma * sigma / PI).powi(2);
    let p = next_prime_at_least((c1 * s_star as f64).max(noise_floor)) as usize;
    let sigma_term = c_sigma * sigma / a_min;
    let tau = sigma_term / (p as f64).sqrt();

    let eff = eff_bandwidth as f64;
    let eps0 = 1.0 / (2.0 * eff);
    let delta = ((1.0 - eps0 * eff) / 2.0).min(1.0 / (2.0 * beta + 2.0));
    let beta_bound = (1.0 - 2.0 * delta) / (2.0 * delta);
    if beta > beta_bound * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} exceeds (1 - 2 delta) / (2 delta) = {beta_bound}"
        )));
    }
    let m = levels_for(eff, beta);
    let shifts = (0..=m).map(|a| beta.powi(a as i32) * eps0).collect();
    Ok(RecoverySchedule { p, tau, m, eps0, beta, delta, shifts, sigma_term })
}

/// Passes iff `| |shifted| / |unshifted| - 1 | <= tau`. Empty unshifted bins
/// fail.
pub fn collision_test(unshifted: Complex64, shifted: Complex64, tau: f64) -> bool {
    let denom = unshifted.norm();
    if denom < EMPTY_BIN {
        return false;
    }
    (shifted.norm() / denom - 1.0).abs() <= tau
}

/// `Arg(shifted / unshifted) / (2 pi)`, in `[-1/2, 1/2)`.
pub fn phase_cycles(shifted: Complex64, unshifted: Complex64) -> Result<f64> {
    if unshifted.norm() < EMPTY_BIN {
        return Err(Error::ZeroDenominator);
    }
    Ok(arg(shifted / unshifted) / TAU)
}

/// Coarse estimate from the smallest shift.
pub fn initial_entry(shifted: Complex64, unshifted: Complex64, eps0: f64) -> Result<f64> {
    Ok(phase_cycles(shifted, unshifted)? / eps0)
}

/// One correction step: `w + ((b - eps w) mod [-1/2, 1/2)) / eps`.
pub fn refine_entry(w_prev: f64, b: f64, eps: f64) -> f64 {
    w_prev + wrap_half(b - eps * w_prev) / eps
}

/// Closed form of the whole ladder: `sum_a c_a / eps_a` with `c_0 = b_0` and
/// `c_a = (b_a - eps_a lambda_{a-1}) mod [-1/2, 1/2)`, where `lambda_a` is the
/// partial sum up to level `a`.
pub fn reconstruct_entry(shifts: &[f64], phases: &[f64]) -> Result<f64> {
    if shifts.len() != phases.len() {
        return Err(Error::DimensionMismatch { expected: shifts.len(), got: phases.len() });
    }
    if shifts.is_empty() {
        return Err(Error::InvalidParameter("empty shift ladder".into()));
    }
    if shifts.windows(2).any(|w| w[0] >= w[1]) || shifts[0] <= 0.0 {
        return Err(Error::InvalidParameter("shifts must be positive and strictly increasing".into()));
    }
    let mut lambda = 0.0;
    for (level, (&eps, &b)) in shifts.iter().zip(phases).enumerate() {
        let c = if level == 0 { b } else { wrap_half(b - eps * lambda) };
        lambda += c / eps;
    }
    Ok(lambda)
}

/// Nearest integer, ties away from zero.
pub fn finalize_entry(w: f64) -> i64 {
    w.round() as i64
}

/// Accept iff the candidate failed at most `eta * (m + 1)` levels.
pub fn accept_candidate(vote: usize, m: usize, eta: f64) -> bool {
    vote as f64 <= eta * (m + 1) as f64
}

pub fn estimate_coefficient(unshifted: Complex64, p: usize) -> Complex64 {
    unshifted / p as f64
}

/// Working state of one candidate bin across the levels of an iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateState {
    pub bin: usize,
    pub entry_estimates: Vec<f64>,
    pub vote: usize,
    pub coeff: Complex64,
}

impl CandidateState {
    pub fn new(bin: usize, unshifted: Complex64, p: usize, reduced_dim: usize) -> Self {
        Self {
            bin,
            entry_estimates: vec![0.0; reduced_dim],
            vote: 0,
            coeff: estimate_coefficient(unshifted, p),
        }
    }

    /// Feeds level `level` with shift `eps`. `shifted` holds this candidate's
    /// bin from the shifted DFT of every axis. The vote increases by one if
    /// any axis fails the collision test.
    pub fn observe(&mut self, level: usize, eps: f64, unshifted: Complex64, shifted: &[Complex64], tau: f64) {
        debug_assert_eq!(shifted.len(), self.entry_estimates.len());
        if shifted.iter().any(|&f| !collision_test(unshifted, f, tau)) {
            self.vote += 1;
        }
        for (w, &f) in self.entry_estimates.iter_mut().zip(shifted) {
            // empty bin: leave the estimate, the vote already counts the failure
            let Ok(b) = phase_cycles(f, unshifted) else { continue };
            *w = if level == 0 { b / eps } else { refine_entry(*w, b, eps) };
        }
    }

    pub fn finalized(&self) -> Vec<i64> {
        self.entry_estimates.iter().map(|&w| finalize_entry(w)).collect()
    }
}
