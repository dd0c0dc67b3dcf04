//! Noisy samples of `h = f o g` along projection lines, with the modes
//! recovered so far subtracted.
//!
//! The ground truth is unwrapped once into the reduced domain, so a sample at
//! `t` is `sum_j a_j exp(2 pi i v'_j . t)`. On a line `t_l = (l/p) e_axis +
//! eps e_shift` each mode contributes `a_j exp(2 pi i eps v'_{j,shift})` times
//! the `p`-th root of unity indexed by `v'_{j,axis} l mod p`, which is exact in
//! integers.
//!
//! Noise is keyed by `(seed, stream, position)`. The caller picks a fresh
//! stream for every gather so that repeated points draw independent noise,
//! while a fixed run stays reproducible.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dft::is_prime;
use crate::spectrum::{frac_product, ComplexSampleVector, FourierMode, SparseSpectrum};
use crate::unwrap::UnwrapMap;
use crate::{Error, Result};

/// Words of the ChaCha stream reserved for each sample position.
const WORDS_PER_POSITION: u128 = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Independent real and imaginary parts, each with variance `sigma^2 / 2`.
    #[default]
    ComplexCircular,
    /// Real part with variance `sigma^2`, zero imaginary part.
    RealOnly,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::ComplexCircular => "complex",
            NoiseKind::RealOnly => "real",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" | "complex-circular" => Ok(NoiseKind::ComplexCircular),
            "real" | "real-only" => Ok(NoiseKind::RealOnly),
            other => Err(Error::InvalidParameter(format!("unknown noise kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
    pub kind: NoiseKind,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64, kind: NoiseKind) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sigma {sigma} must be finite and >= 0")));
        }
        Ok(Self { sigma, seed, kind })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0, seed: 0, kind: NoiseKind::ComplexCircular }
    }

    fn stream(&self, stream: u64) -> NoiseStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        NoiseStream { model: *self, rng }
    }
}

struct NoiseStream {
    model: NoiseModel,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    fn at(&mut self, position: u64) -> Complex64 {
        let sigma = self.model.sigma;
        if sigma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.rng.set_word_pos(position as u128 * WORDS_PER_POSITION);
        let x: f64 = self.rng.sample(StandardNormal);
        match self.model.kind {
            NoiseKind::RealOnly => Complex64::new(sigma * x, 0.0),
            NoiseKind::ComplexCircular => {
                let y: f64 = self.rng.sample(StandardNormal);
                Complex64::new(x, y) * (sigma * std::f64::consts::FRAC_1_SQRT_2)
            }
        }
    }
}

/// The noise value at `position` of `stream`. Deterministic in all inputs.
pub fn draw_noise(noise: &NoiseModel, stream: u64, position: u64) -> Complex64 {
    noise.stream(stream).at(position)
}

/// One projection line: `p` points `(l/p) e_axis`, optionally shifted by
/// `shift_size * e_shift_axis`. Axes are zero-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePlan {
    pub p: usize,
    pub axis: usize,
    pub shift: Option<(usize, f64)>,
}

impl SamplePlan {
    pub fn unshifted(p: usize, axis: usize) -> Self {
        Self { p, axis, shift: None }
    }

    pub fn shifted(p: usize, axis: usize, shift_axis: usize, shift_size: f64) -> Self {
        Self { p, axis, shift: Some((shift_axis, shift_size)) }
    }

    fn validate(&self, reduced_dim: usize) -> Result<()> {
        if !is_prime(self.p as u64) {
            return Err(Error::InvalidParameter(format!("sample length {} is not prime", self.p)));
        }
        if self.axis >= reduced_dim {
            return Err(Error::DimensionMismatch { expected: reduced_dim, got: self.axis + 1 });
        }
        if let Some((k, eps)) = self.shift {
            if k >= reduced_dim {
                return Err(Error::DimensionMismatch { expected: reduced_dim, got: k + 1 });
            }
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!("shift size {eps} must be positive")));
            }
        }
        Ok(())
    }

    /// The reduced-domain point with index `l`.
    pub fn point(&self, l: usize, reduced_dim: usize) -> Vec<f64> {
        let mut t = vec![0.0; reduced_dim];
        t[self.axis] = l as f64 / self.p as f64;
        if let Some((k, eps)) = self.shift {
            t[k] += eps;
        }
        t
    }
}

/// Samples the ground-truth signal through the unwrapping map.
#[derive(Clone, Debug)]
pub struct Sampler {
    reduced_dim: usize,
    truth: Vec<FourierMode>,
    noise: NoiseModel,
}

impl Sampler {
    pub fn new(truth: &SparseSpectrum, map: &UnwrapMap, noise: NoiseModel) -> Result<Self> {
        if truth.dim() != map.dim() {
            return Err(Error::DimensionMismatch { expected: map.dim(), got: truth.dim() });
        }
        if truth.bandwidth() != map.bandwidth() {
            return Err(Error::InvalidParameter(format!(
                "signal bandwidth {} differs from the map's {}",
                truth.bandwidth(),
                map.bandwidth()
            )));
        }
        let truth = truth
            .modes()
            .iter()
            .map(|m| Ok(FourierMode::new(map.unwrap_freq(&m.freq)?, m.coeff)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { reduced_dim: map.reduced_dim(), truth, noise })
    }

    pub fn reduced_dim(&self) -> usize {
        self.reduced_dim
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Samples `h(t_l) + n_l - q(t_l)` for `l` in `0..p`, where `q` sums the
    /// `residual` modes (reduced-domain frequencies).
    pub fn gather(
        &self,
        plan: &SamplePlan,
        stream: u64,
        residual: &[FourierMode],
    ) -> Result<ComplexSampleVector> {
        plan.validate(self.reduced_dim)?;
        if let Some(m) = residual.iter().find(|m| m.freq.len() != self.reduced_dim) {
            return Err(Error::DimensionMismatch { expected: self.reduced_dim, got: m.freq.len() });
        }
        let p = plan.p;
        let p_i = p as i64;

        // Fold every mode into the coefficient of its residue on this line.
        let mut by_residue = vec![Complex64::new(0.0, 0.0); p];
        let mut add = |mode: &FourierMode, sign: f64| {
            let r = mode.freq[plan.axis].rem_euclid(p_i) as usize;
            let phasor = match plan.shift {
                Some((k, eps)) => Complex64::from_polar(1.0, TAU * frac_product(mode.freq[k], eps)),
                None => Complex64::new(1.0, 0.0),
            };
            by_residue[r] += mode.coeff * phasor * sign;
        };
        self.truth.iter().for_each(|m| add(m, 1.0));
        residual.iter().for_each(|m| add(m, -1.0));

        let roots: Vec<Complex64> =
            (0..p).map(|r| Complex64::from_polar(1.0, TAU * r as f64 / p as f64)).collect();
        let occupied: Vec<(usize, Complex64)> = by_residue
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();

        let mut noise = self.noise.stream(stream);
        let mut index: Vec<usize> = vec![0; occupied.len()];
        let values = (0..p)
            .map(|l| {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((r, c), idx) in occupied.iter().zip(index.iter_mut()) {
                    acc += c * roots[*idx];
                    *idx += r;
                    if *idx >= p {
                        *idx -= p;
                    }
                }
                acc + noise.at(l as u64)
            })
            .collect();
        Ok(ComplexSampleVector::new(values))
    }
}

/// One-shot form of [`Sampler::gather`].
pub fn gather_samples(
    truth: &SparseSpectrum,
    map: &UnwrapMap,
    plan: &SamplePlan,
    noise: &NoiseModel,
    stream: u64,
    residual: &[FourierMode],
) -> Result<ComplexSampleVector> {
    Sampler::new(truth, map, *noise)?.gather(plan, stream, residual)
}
