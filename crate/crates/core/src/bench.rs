//! Benchmark harness: random test signals, single trials and parameter
//! sweeps written as CSV.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::oracle::compare;
use crate::recovery::{recover_timed, RecoveryConfig, RecoveryResult};
use crate::sampler::NoiseKind;
use crate::spectrum::{FourierMode, SparseSpectrum};
use crate::{Error, Result};

/// Column order of sweep CSV files.
pub const CSV_HEADER: [&str; 11] =
    ["variable", "value", "trial", "seed", "l1_error", "exact_rate", "samples", "runtime_ms", "sample_ms", "p", "M"];

/// `s` modes with coefficients uniform on the unit circle and distinct
/// frequencies drawn uniformly from `[-N/2, N/2)^d`.
pub fn generate_signal(n: u64, d: usize, s: usize, seed: u64) -> Result<SparseSpectrum> {
    if n < 2 || n % 2 != 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("need even N >= 2 and d >= 1, got N = {n}, d = {d}")));
    }
    let cube = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if s as u128 > cube {
        return Err(Error::InvalidParameter(format!("cannot place {s} distinct modes in a cube of {cube} points")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = (n / 2) as i64;

    let freqs: Vec<Vec<i64>> = if cube <= 1 << 20 && (s as u128) * 2 > cube {
        index::sample(&mut rng, cube as usize, s)
            .into_iter()
            .map(|mut idx| {
                let mut w = vec![0i64; d];
                for slot in w.iter_mut().rev() {
                    *slot = (idx % n as usize) as i64 - half;
                    idx /= n as usize;
                }
                w
            })
            .collect()
    } else {
        let mut seen = HashSet::with_capacity(s);
        let mut out = Vec::with_capacity(s);
        while out.len() < s {
            let w: Vec<i64> = (0..d).map(|_| rng.random_range(-half..half)).collect();
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        out
    };
    let modes = freqs
        .into_iter()
        .map(|w| FourierMode::new(w, Complex64::from_polar(1.0, rng.random_range(0.0..TAU))))
        .collect();
    SparseSpectrum::new(n, d, modes)
}

/// Seed of the noise for a trial whose signal uses `seed`.
pub fn noise_seed(seed: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub seed: u64,
    pub converged: bool,
    pub l1_error: f64,
    pub exact_rate: f64,
    pub samples: u64,
    pub runtime_ms: f64,
    pub sample_ms: f64,
    /// Sample length and level count of the first outer iteration.
    pub p: usize,
    pub m: usize,
    pub outer_iterations: usize,
}

/// Recovers a fresh random signal generated from `seed`; `config.s` sets the
/// number of modes and `config.seed` is replaced by the derived noise seed.
pub fn run_trial(config: &RecoveryConfig, kind: NoiseKind, seed: u64) -> Result<(TrialOutcome, RecoveryResult, SparseSpectrum)> {
    let truth = generate_signal(config.n, config.d, config.s, seed)?;
    let config = config.clone().with_seed(noise_seed(seed));
    let noise = config.noise_model(kind)?;
    let (result, timings) = recover_timed(&config, &truth, &noise)?;
    let report = compare(&truth, &result.modes);
    let first = result.iterations.first();
    let outcome = TrialOutcome {
        seed,
        converged: result.converged,
        l1_error: report.l1_coeff_error,
        exact_rate: report.exact_freq_rate,
        samples: result.samples_used,
        runtime_ms: timings.runtime().as_secs_f64() * 1e3,
        sample_ms: timings.sampling.as_secs_f64() * 1e3,
        p: first.map_or(0, |it| it.p),
        m: first.map_or(0, |it| it.m),
        outer_iterations: result.outer_iterations,
    };
    Ok((outcome, result, truth))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariable {
    Sigma,
    Sparsity,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Sigma => "sigma",
            SweepVariable::Sparsity => "sparsity",
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(SweepVariable::Sigma),
            "sparsity" | "s" => Ok(SweepVariable::Sparsity),
            other => Err(Error::InvalidParameter(format!("unknown sweep variable `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Everything not swept; `sigma` or `s` is overwritten per value.
    pub fixed: RecoveryConfig,
    pub trials: usize,
    pub noise_kind: NoiseKind,
    /// Trial `t` uses signal seed `base_seed + t` for every value.
    pub base_seed: u64,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("a sweep needs at least one trial".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("a sweep needs at least one value".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("sweep value {v} must be positive")));
        }
        if self.variable == SweepVariable::Sparsity && self.values.iter().any(|v| v.fract() != 0.0) {
            return Err(Error::InvalidParameter("sparsity values must be integers".into()));
        }
        Ok(())
    }

    fn config_for(&self, value: f64) -> RecoveryConfig {
        let mut cfg = self.fixed.clone();
        match self.variable {
            SweepVariable::Sigma => cfg.sigma = value,
            SweepVariable::Sparsity => cfg.s = value as usize,
        }
        cfg
    }
}

/// One CSV row: a trial, or the per-value mean when `trial` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    pub l1_error: f64,
    pub exact_rate: f64,
    pub samples: f64,
    pub runtime_ms: f64,
    pub sample_ms: f64,
    pub p: f64,
    pub m: f64,
}

impl SweepRow {
    fn from_trial(variable: SweepVariable, value: f64, trial: usize, o: &TrialOutcome) -> Self {
        Self {
            variable,
            value,
            trial: Some(trial),
            seed: Some(o.seed),
            l1_error: o.l1_error,
            exact_rate: o.exact_rate,
            samples: o.samples as f64,
            runtime_ms: o.runtime_ms,
            sample_ms: o.sample_ms,
            p: o.p as f64,
            m: o.m as f64,
        }
    }

    fn mean(rows: &[SweepRow]) -> Self {
        let n = rows.len() as f64;
        let avg = |f: fn(&SweepRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        Self {
            variable: rows[0].variable,
            value: rows[0].value,
            trial: None,
            seed: None,
            l1_error: avg(|r| r.l1_error),
            exact_rate: avg(|r| r.exact_rate),
            samples: avg(|r| r.samples),
            runtime_ms: avg(|r| r.runtime_ms),
            sample_ms: avg(|r| r.sample_ms),
            p: avg(|r| r.p),
            m: avg(|r| r.m),
        }
    }

    fn record(&self) -> Vec<String> {
        let value = match self.variable {
            SweepVariable::Sparsity => format!("{}", self.value as u64),
            SweepVariable::Sigma => format!("{}", self.value),
        };
        vec![
            self.variable.as_str().to_string(),
            value,
            self.trial.map_or_else(|| "mean".to_string(), |t| t.to_string()),
            self.seed.map_or_else(String::new, |s| s.to_string()),
            self.l1_error.to_string(),
            self.exact_rate.to_string(),
            self.samples.to_string(),
            format!("{:.3}", self.runtime_ms),
            format!("{:.3}", self.sample_ms),
            self.p.to_string(),
            self.m.to_string(),
        ]
    }
}

/// Runs every `(value, trial)` pair. Trials run in parallel; rows come back
/// grouped by value in input order, each group followed by its mean row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let jobs: Vec<(f64, usize)> =
        spec.values.iter().flat_map(|&v| (0..spec.trials).map(move |t| (v, t))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(value, trial)| {
            let seed = spec.base_seed.wrapping_add(trial as u64);
            run_trial(&spec.config_for(value), spec.noise_kind, seed)
                .map(|(o, _, _)| SweepRow::from_trial(spec.variable, value, trial, &o))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(outcomes.len() + spec.values.len());
    for group in outcomes.chunks(spec.trials) {
        rows.extend_from_slice(group);
        rows.push(SweepRow::mean(group));
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(())
}

/// Doubling ladder `start, 2 start, ...` up to and including `end`.
pub fn doubling(start: f64, end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut v = start;
    while v <= end * (1.0 + 1e-9) {
        out.push(v);
        v *= 2.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_signals() {
        let a = generate_signal(20, 100, 32, 7).unwrap();
        let b = generate_signal(20, 100, 32, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_signal(20, 100, 32, 8).unwrap());
        assert_eq!(a.len(), 32);
        assert!(a.modes().iter().all(|m| (m.coeff.norm() - 1.0).abs() < 1e-12));
        let freqs: HashSet<_> = a.modes().iter().map(|m| m.freq.clone()).collect();
        assert_eq!(freqs.len(), 32);

        // dense draw fills the whole cube
        let full = generate_signal(4, 2, 16, 1).unwrap();
        assert_eq!(full.len(), 16);
        assert!(generate_signal(4, 2, 17, 1).is_err());
        assert!(generate_signal(5, 2, 1, 1).is_err());
    }

    #[test]
    fn doubling_ladders() {
        let sig = doubling(0.001, 0.512);
        assert_eq!(sig.len(), 10);
        assert!((sig[9] - 0.512).abs() < 1e-12);
        assert_eq!(doubling(1.0, 1024.0).len(), 11);
    }

    fn small_spec(variable: SweepVariable, values: Vec<f64>, sigma: f64) -> SweepSpec {
        SweepSpec {
            variable,
            values,
            fixed: RecoveryConfig::new(20, 10, 5, 8).with_sigma(sigma),
            trials: 3,
            noise_kind: NoiseKind::ComplexCircular,
            base_seed: 100,
        }
    }

    #[test]
    fn sweep_rows_and_means() {
        let spec = small_spec(SweepVariable::Sigma, vec![0.01, 0.1], 0.0);
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2 * (3 + 1));
        for group in rows.chunks(4) {
            let trials = &group[..3];
            let mean = &group[3];
            assert_eq!(mean.trial, None);
            let l1 = trials.iter().map(|r| r.l1_error).sum::<f64>() / 3.0;
            let samples = trials.iter().map(|r| r.samples).sum::<f64>() / 3.0;
            assert!((mean.l1_error - l1).abs() <= 1e-12 * (1.0 + l1));
            assert!((mean.samples - samples).abs() <= 1e-12 * samples);
            assert_eq!(trials.iter().map(|r| r.seed.unwrap()).collect::<Vec<_>>(), vec![100, 101, 102]);
        }
    }

    #[test]
    fn csv_is_reproducible_apart_from_timing() {
        let spec = small_spec(SweepVariable::Sparsity, vec![2.0, 4.0], 0.05);
        let render = || {
            let mut buf = Vec::new();
            write_csv(&run_sweep(&spec).unwrap(), &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let strip = |text: String| -> Vec<String> {
            text.lines()
                .map(|l| {
                    let f: Vec<&str> = l.split(',').collect();
                    [&f[..7], &f[9..]].concat().join(",")
                })
                .collect()
        };
        let a = render();
        assert!(a.starts_with("variable,value,trial,seed,l1_error,exact_rate,samples,runtime_ms,sample_ms,p,M\n"));
        assert!(a.contains("\nsparsity,4,mean,,"));
        assert_eq!(strip(a), strip(render()));
    }

    #[test]
    fn noiseless_sweep_is_exact() {
        let spec = small_spec(SweepVariable::Sparsity, vec![1.0, 4.0, 16.0], 0.0);
        for row in run_sweep(&spec).unwrap() {
            assert!(row.l1_error <= 1e-9, "{row:?}");
            assert_eq!(row.exact_rate, 1.0);
        }
    }

    #[test]
    fn sweep_validation() {
        let mut spec = small_spec(SweepVariable::Sigma, vec![], 0.0);
        assert!(run_sweep(&spec).is_err());
        spec.values = vec![0.1];
        spec.trials = 0;
        assert!(run_sweep(&spec).is_err());
        let spec = small_spec(SweepVariable::Sparsity, vec![2.5], 0.0);
        assert!(run_sweep(&spec).is_err());
    }
}
