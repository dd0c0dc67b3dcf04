//! The outer peeling loop.
//!
//! Each outer iteration projects onto one reduced axis, ranks the largest
//! bins of the residual-subtracted unshifted DFT, refines every candidate's
//! entries over the shift ladder, and keeps the candidates whose collision
//! tests mostly passed. Found modes are subtracted from all later samples.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft::{next_prime_at_least, top_bins, PrimeDft};
use crate::estimator::{accept_candidate, make_schedule, CandidateState, RecoverySchedule};
use crate::sampler::{NoiseKind, NoiseModel, SamplePlan, Sampler};
use crate::spectrum::{in_band, FourierMode, SparseSpectrum};
use crate::unwrap::UnwrapMap;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    pub n: u64,
    pub d: usize,
    pub d1: usize,
    /// Number of modes to recover.
    pub s: usize,
    /// Noise level the schedule is sized for.
    pub sigma: f64,
    pub a_min: f64,
    pub c1: f64,
    pub c_sigma: f64,
    pub eta: f64,
    pub beta: f64,
    /// Seed of the run's noise; see [`RecoveryConfig::noise_model`].
    pub seed: u64,
    /// Defaults to `10 * d / d1` when unset.
    pub max_outer_iterations: Option<usize>,
}

impl RecoveryConfig {
    pub fn new(n: u64, d: usize, d1: usize, s: usize) -> Self {
        Self {
            n,
            d,
            d1,
            s,
            sigma: 0.0,
            a_min: 1.0,
            c1: 2.0,
            c_sigma: 6.0,
            eta: 0.25,
            beta: 2.5,
            seed: 0,
            max_outer_iterations: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Noise matching the configured level and seed.
    pub fn noise_model(&self, kind: NoiseKind) -> Result<NoiseModel> {
        NoiseModel::new(self.sigma, self.seed, kind)
    }

    pub fn max_outer(&self) -> usize {
        self.max_outer_iterations.unwrap_or(10 * (self.d / self.d1.max(1)).max(1))
    }

    pub fn validate(&self) -> Result<UnwrapMap> {
        if self.s == 0 {
            return Err(Error::InvalidParameter("sparsity s must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta = {} must lie in [0, 1)", self.eta)));
        }
        let map = UnwrapMap::new(self.n, self.d, self.d1)?;
        // checks the remaining schedule parameters
        make_schedule(self.s, self.sigma, self.a_min, self.c1, self.c_sigma, self.beta, map.eff_bandwidth())?;
        Ok(map)
    }
}

/// What one outer iteration did.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub p: usize,
    pub m: usize,
    pub axis: usize,
    pub candidates: usize,
    pub accepted: usize,
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    /// Recovered modes in the original `d`-dimensional domain.
    pub modes: SparseSpectrum,
    /// For each mode, the index into `iterations` where it was accepted.
    pub accepted_at: Vec<usize>,
    pub samples_used: u64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub iterations: Vec<IterationRecord>,
}

impl RecoveryResult {
    /// Sample length of the iteration that accepted mode `index`.
    pub fn mode_prime(&self, index: usize) -> usize {
        self.iterations[self.accepted_at[index]].p
    }
}

/// Signal evaluations of a finished run.
pub fn count_samples(result: &RecoveryResult) -> u64 {
    result.samples_used
}

/// Signal evaluations of one outer iteration: one unshifted line plus `d'`
/// shifted lines per level.
pub fn samples_per_iteration(p: usize, reduced_dim: usize, m: usize) -> u64 {
    p as u64 * (1 + reduced_dim as u64 * (m as u64 + 1))
}

/// Wall-clock split of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub total: Duration,
    /// Time spent producing samples.
    pub sampling: Duration,
}

impl Timings {
    /// Total time excluding sample evaluation.
    pub fn runtime(&self) -> Duration {
        self.total.saturating_sub(self.sampling)
    }
}

pub fn recover(config: &RecoveryConfig, truth: &SparseSpectrum, noise: &NoiseModel) -> Result<RecoveryResult> {
    recover_timed(config, truth, noise).map(|(r, _)| r)
}

pub fn recover_timed(
    config: &RecoveryConfig,
    truth: &SparseSpectrum,
    noise: &NoiseModel,
) -> Result<(RecoveryResult, Timings)> {
    let start = Instant::now();
    let map = config.validate()?;
    let sampler = Sampler::new(truth, &map, *noise)?;
    let reduced_dim = map.reduced_dim();
    let eff = map.eff_bandwidth();

    let mut found: Vec<FourierMode> = Vec::with_capacity(config.s);
    let mut found_set: HashSet<Vec<i64>> = HashSet::with_capacity(config.s);
    let mut accepted_at = Vec::with_capacity(config.s);
    let mut iterations = Vec::new();
    let mut samples_used = 0u64;
    let mut sampling = Duration::ZERO;
    let mut stalled = 0usize;

    let mut i = 0usize;
    while found.len() < config.s && i < config.max_outer() {
        let s_star = config.s - found.len();
        let mut schedule =
            make_schedule(s_star, config.sigma, config.a_min, config.c1, config.c_sigma, config.beta, eff)?;
        if stalled > 0 {
            // nothing was accepted last time: move to another prime
            let mut p = schedule.p;
            for _ in 0..stalled {
                p = next_prime_at_least(p as f64 + 1.0) as usize;
            }
            schedule = schedule.with_prime(p);
        }
        let axis = i % reduced_dim;

        let step = run_iteration(&sampler, &schedule, axis, i as u64, config, &found, &mut sampling)?;

        let mut accepted = 0;
        for (w, coeff) in step.accepted {
            if !in_band_all(&w, eff) || map.rewrap_freq(&w).is_err() || found_set.contains(&w) {
                continue;
            }
            found_set.insert(w.clone());
            found.push(FourierMode::new(w, coeff));
            accepted_at.push(i);
            accepted += 1;
        }
        stalled = if accepted == 0 { stalled + 1 } else { 0 };

        let samples = samples_per_iteration(schedule.p, reduced_dim, schedule.m);
        samples_used += samples;
        iterations.push(IterationRecord {
            p: schedule.p,
            m: schedule.m,
            axis,
            candidates: step.candidates,
            accepted,
            samples,
        });
        i += 1;
    }

    let modes = found
        .iter()
        .map(|m| Ok(FourierMode::new(map.rewrap_freq(&m.freq)?, m.coeff)))
        .collect::<Result<Vec<_>>>()?;
    let modes = SparseSpectrum::new(config.n, config.d, modes)?;
    let converged = modes.len() == config.s;
    let result =
        RecoveryResult { modes, accepted_at, samples_used, outer_iterations: i, converged, iterations };
    Ok((result, Timings { total: start.elapsed(), sampling }))
}

fn in_band_all(w: &[i64], eff: u64) -> bool {
    w.iter().all(|&x| in_band(x, eff))
}

struct IterationOutcome {
    candidates: usize,
    /// Accepted `(w', a)` pairs in ranking order, one per distinct `w'`.
    accepted: Vec<(Vec<i64>, Complex64)>,
}

fn run_iteration(
    sampler: &Sampler,
    schedule: &RecoverySchedule,
    axis: usize,
    iteration: u64,
    config: &RecoveryConfig,
    residual: &[FourierMode],
    sampling: &mut Duration,
) -> Result<IterationOutcome> {
    let p = schedule.p;
    let reduced_dim = sampler.reduced_dim();
    let tau = schedule.effective_tau();
    let dft = PrimeDft::new(p);
    let stream_base = iteration << 32;

    let t = Instant::now();
    let unshifted = sampler.gather(&SamplePlan::unshifted(p, axis), stream_base, residual)?;
    *sampling += t.elapsed();
    let s_star = config.s.saturating_sub(residual.len());
    let ranking = top_bins(dft.forward(unshifted.values()), s_star.min(p));
    let f0 = &ranking.spectrum;

    let mut candidates: Vec<CandidateState> =
        ranking.order.iter().map(|&m| CandidateState::new(m, f0[m], p, reduced_dim)).collect();

    for (level, &eps) in schedule.shifts.iter().enumerate() {
        let t = Instant::now();
        let lines = (0..reduced_dim)
            .into_par_iter()
            .map(|k| {
                let stream = stream_base + 1 + (level * reduced_dim + k) as u64;
                sampler.gather(&SamplePlan::shifted(p, axis, k, eps), stream, residual)
            })
            .collect::<Result<Vec<_>>>()?;
        *sampling += t.elapsed();
        let spectra: Vec<Vec<Complex64>> = lines.par_iter().map(|v| dft.forward(v.values())).collect();

        candidates.par_iter_mut().for_each(|cand| {
            let shifted: Vec<Complex64> = spectra.iter().map(|f| f[cand.bin]).collect();
            cand.observe(level, eps, f0[cand.bin], &shifted, tau);
        });
    }

    // Same w' from two candidates: the larger coefficient wins.
    let mut accepted: Vec<(Vec<i64>, Complex64)> = Vec::new();
    let mut slot: HashMap<Vec<i64>, usize> = HashMap::new();
    for cand in candidates.iter().filter(|c| accept_candidate(c.vote, schedule.m, config.eta)) {
        let w = cand.finalized();
        match slot.get(&w) {
            Some(&idx) => {
                if cand.coeff.norm() > accepted[idx].1.norm() {
                    accepted[idx].1 = cand.coeff;
                }
            }
            None => {
                slot.insert(w.clone(), accepted.len());
                accepted.push((w, cand.coeff));
            }
        }
    }
    Ok(IterationOutcome { candidates: candidates.len(), accepted })
}
