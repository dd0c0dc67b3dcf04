//! Prime lengths, prime-length DFTs and magnitude ranking of DFT bins.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::spectrum::ComplexSampleVector;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut i = 5u64;
    while i.saturating_mul(i) <= n {
        if n % i == 0 || n % (i + 2) == 0 {
            return false;
        }
        i += 6;
    }
    true
}

/// Smallest prime `>= ceil(x)`. Values below 2 give 2.
pub fn next_prime_at_least(x: f64) -> u64 {
    let mut n = if x.is_nan() || x <= 2.0 { 2 } else { x.ceil() as u64 };
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// Forward DFT of a fixed length via the chirp-z identity
/// `2 m l = m^2 + l^2 - (m - l)^2`, computed as a power-of-two circular
/// convolution.
pub struct PrimeDft {
    len: usize,
    /// exp(-i pi n^2 / len), n in 0..len
    chirp: Vec<Complex64>,
    /// FFT of the conjugate chirp laid out for circular convolution
    kernel: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl PrimeDft {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "DFT length must be positive");
        let conv_len = (2 * len - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(conv_len);
        let inverse = planner.plan_fft_inverse(conv_len);

        // n^2 mod 2 len keeps the chirp argument small and exact
        let modulus = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|n| {
                let q = (n as u128 * n as u128) % modulus;
                Complex64::from_polar(1.0, -PI * q as f64 / len as f64)
            })
            .collect();

        let mut kernel = vec![Complex64::new(0.0, 0.0); conv_len];
        kernel[0] = chirp[0].conj();
        for n in 1..len {
            kernel[n] = chirp[n].conj();
            kernel[conv_len - n] = chirp[n].conj();
        }
        forward.process(&mut kernel);
        let scale = 1.0 / conv_len as f64;
        for k in &mut kernel {
            *k *= scale;
        }

        Self { len, chirp, kernel, forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `F[m] = sum_l v[l] exp(-2 pi i m l / len)`.
    pub fn forward(&self, input: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.len, "input length must match the plan");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.kernel.len()];
        for ((b, &x), &c) in buf.iter_mut().zip(input).zip(&self.chirp) {
            *b = x * c;
        }
        self.forward.process(&mut buf);
        for (b, &k) in buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        buf.truncate(self.len);
        for (b, &c) in buf.iter_mut().zip(&self.chirp) {
            *b *= c;
        }
        buf
    }
}

/// One-shot forward DFT; plans a fresh transform for the input length.
pub fn dft_forward(v: &ComplexSampleVector) -> Vec<Complex64> {
    if v.is_empty() {
        return Vec::new();
    }
    PrimeDft::new(v.len()).forward(v.values())
}

/// Bins in descending order of magnitude, ties broken by the lower index.
#[derive(Clone, Debug, PartialEq)]
pub struct BinRanking {
    pub order: Vec<usize>,
    pub spectrum: Vec<Complex64>,
}

pub fn top_bins(spectrum: Vec<Complex64>, count: usize) -> BinRanking {
    let count = count.min(spectrum.len());
    let mut order: Vec<usize> = (0..spectrum.len()).collect();
    order.sort_by(|&a, &b| {
        spectrum[b].norm_sqr().total_cmp(&spectrum[a].norm_sqr()).then(a.cmp(&b))
    });
    order.truncate(count);
    BinRanking { order, spectrum }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::direct_dft;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trial_division_next_prime(x: f64) -> u64 {
        let mut n = x.ceil().max(2.0) as u64;
        loop {
            if (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0) {
                return n;
            }
            n += 1;
        }
    }

    fn random_vector(rng: &mut ChaCha8Rng, p: usize) -> Vec<Complex64> {
        (0..p).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn next_prime_examples() {
        assert_eq!(next_prime_at_least(2.0), 2);
        assert_eq!(next_prime_at_least(512.0), 521);
        assert_eq!(next_prime_at_least(73.2), 79);
        assert_eq!(next_prime_at_least(0.0), 2);
        for x in [3.0, 7.5, 8.0, 100.0, 1000.0, 7919.0, 65536.5] {
            assert_eq!(next_prime_at_least(x), trial_division_next_prime(x), "x = {x}");
        }
    }

    #[test]
    fn dft_examples() {
        let ones = ComplexSampleVector::new(vec![Complex64::new(1.0, 0.0); 5]);
        let f = dft_forward(&ones);
        assert!((f[0] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
        assert!(f[1..].iter().all(|x| x.norm() < 1e-12));

        let tone: Vec<Complex64> = (0..5)
            .map(|l| Complex64::from_polar(1.0, 2.0 * PI * 3.0 * l as f64 / 5.0))
            .collect();
        let f = dft_forward(&ComplexSampleVector::new(tone));
        for (m, x) in f.iter().enumerate() {
            let expect = if m == 3 { 5.0 } else { 0.0 };
            assert!((x - Complex64::new(expect, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [1usize, 2, 3, 5, 13, 521, 1031] {
            let v = ComplexSampleVector::new(random_vector(&mut rng, p));
            let fast = dft_forward(&v);
            let slow = direct_dft(&v);
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-9 * p as f64, "p = {p}, err = {err}");
        }
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [7usize, 131, 521] {
            let v = random_vector(&mut rng, p);
            let f = PrimeDft::new(p).forward(&v);
            let time: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            let freq: f64 = f.iter().map(|x| x.norm_sqr()).sum();
            assert!((freq - p as f64 * time).abs() <= 1e-9 * freq);
        }
    }

    #[test]
    fn aliasing_sums_by_residue() {
        // Brute force over every occupied residue class at small p.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [5usize, 7, 11, 13] {
            let freqs: Vec<i64> = (0..6).map(|_| rng.random_range(-500..500)).collect();
            let coeffs = random_vector(&mut rng, freqs.len());
            let samples: Vec<Complex64> = (0..p)
                .map(|l| {
                    freqs
                        .iter()
                        .zip(&coeffs)
                        .map(|(&w, &a)| {
                            let r = (w * l as i64).rem_euclid(p as i64);
                            a * Complex64::from_polar(1.0, 2.0 * PI * r as f64 / p as f64)
                        })
                        .sum()
                })
                .collect();
            let f = PrimeDft::new(p).forward(&samples);
            for m in 0..p {
                let expect: Complex64 = freqs
                    .iter()
                    .zip(&coeffs)
                    .filter(|(&w, _)| w.rem_euclid(p as i64) as usize == m)
                    .map(|(_, &a)| a * p as f64)
                    .sum();
                assert!((f[m] - expect).norm() < 1e-9, "p = {p}, m = {m}");
            }
        }
    }

    #[test]
    fn top_bins_examples() {
        let r = top_bins(vec![Complex64::new(5.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)], 1);
        assert_eq!(r.order, vec![0]);

        let mut f = vec![Complex64::new(0.1, 0.0); 10];
        f[2] = Complex64::new(3.0, 0.0);
        f[7] = Complex64::new(0.0, -3.0);
        assert_eq!(top_bins(f, 2).order, vec![2, 7]);

        // two noiseless modes at p = 11 land in bins 41 mod 11 and -83 mod 11
        let p = 11usize;
        let samples: Vec<Complex64> = (0..p)
            .map(|l| {
                let a = Complex64::from_polar(1.0, 2.0 * PI * (41 * l as i64).rem_euclid(11) as f64 / 11.0);
                let b = Complex64::from_polar(0.8, 2.0 * PI * (-83 * l as i64).rem_euclid(11) as f64 / 11.0);
                a + b
            })
            .collect();
        let r = top_bins(PrimeDft::new(p).forward(&samples), 2);
        assert_eq!(r.order, vec![8, 5]);
        assert!(r.order.len() <= p);
    }

    #[test]
    fn top_bins_is_sorted_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_vector(&mut rng, 31);
        let r = top_bins(f, 31);
        let mut sorted = r.order.clone();
        sorted.sort();
        assert_eq!(sorted, (0..31).collect::<Vec<_>>());
        assert!(r.order.windows(2).all(|w| r.spectrum[w[0]].norm() >= r.spectrum[w[1]].norm()));
    }
}
