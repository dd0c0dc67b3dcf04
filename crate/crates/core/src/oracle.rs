//! Brute-force references: literal DFT summation, dense spectra of tiny
//! signals, and mode-set comparison.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::spectrum::{centered_mod, evaluate_spectrum, ComplexSampleVector, FourierMode, SparseSpectrum};
use crate::{Error, Result};

/// Largest grid [`dense_spectrum`] accepts.
pub const DENSE_GRID_LIMIT: u128 = 1_000_000;

/// `F[m] = sum_l v[l] exp(-2 pi i m l / p)` by O(p^2) summation.
pub fn direct_dft(v: &ComplexSampleVector) -> Vec<Complex64> {
    let p = v.len();
    (0..p)
        .map(|m| {
            v.values()
                .iter()
                .enumerate()
                .map(|(l, &x)| {
                    let r = (m * l) % p;
                    x * Complex64::from_polar(1.0, -TAU * r as f64 / p as f64)
                })
                .sum()
        })
        .collect()
}

/// Fourier coefficients on the full `N^d` cube, indexed by balanced
/// frequency vectors.
#[derive(Clone, Debug)]
pub struct DenseGrid {
    bandwidth: u64,
    dim: usize,
    values: Vec<Complex64>,
}

impl DenseGrid {
    fn index(&self, freq: &[i64]) -> usize {
        let n = self.bandwidth as i64;
        freq.iter().fold(0usize, |acc, &w| acc * self.bandwidth as usize + w.rem_euclid(n) as usize)
    }

    pub fn get(&self, freq: &[i64]) -> Complex64 {
        assert_eq!(freq.len(), self.dim);
        self.values[self.index(freq)]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Every grid point with magnitude above `threshold`, as a spectrum.
    pub fn support(&self, threshold: f64) -> SparseSpectrum {
        let n = self.bandwidth as usize;
        let modes = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > threshold)
            .map(|(mut idx, &a)| {
                let mut freq = vec![0i64; self.dim];
                for slot in freq.iter_mut().rev() {
                    *slot = centered_mod((idx % n) as i64, self.bandwidth);
                    idx /= n;
                }
                FourierMode::new(freq, a)
            })
            .collect();
        SparseSpectrum::new(self.bandwidth, self.dim, modes).expect("grid frequencies are distinct and in band")
    }
}

/// Samples `truth` on the full grid `x = k / N` and applies a separable
/// direct DFT along every axis.
pub fn dense_spectrum(truth: &SparseSpectrum, bandwidth: u64, dim: usize) -> Result<DenseGrid> {
    if truth.bandwidth() != bandwidth || truth.dim() != dim {
        return Err(Error::InvalidParameter("grid shape differs from the signal".into()));
    }
    if dim > 3 {
        return Err(Error::InvalidParameter(format!("dense oracle supports d <= 3, got {dim}")));
    }
    let size = (bandwidth as u128).pow(dim as u32);
    if size > DENSE_GRID_LIMIT {
        return Err(Error::OracleTooLarge(size));
    }
    let n = bandwidth as usize;
    let size = size as usize;

    let mut grid: Vec<Complex64> = (0..size)
        .map(|mut idx| {
            let mut x = vec![0.0; dim];
            for slot in x.iter_mut().rev() {
                *slot = (idx % n) as f64 / n as f64;
                idx /= n;
            }
            evaluate_spectrum(truth, &x).expect("dimension checked above")
        })
        .collect();

    let roots: Vec<Complex64> = (0..n).map(|r| Complex64::from_polar(1.0, -TAU * r as f64 / n as f64)).collect();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        for start in (0..size).filter(|i| (i / stride) % n == 0) {
            for (m, out) in line.iter_mut().enumerate() {
                *out = (0..n).map(|l| grid[start + l * stride] * roots[(m * l) % n]).sum();
            }
            for (m, &v) in line.iter().enumerate() {
                grid[start + m * stride] = v;
            }
        }
    }
    let scale = 1.0 / size as f64;
    grid.iter_mut().for_each(|v| *v *= scale);
    Ok(DenseGrid { bandwidth, dim, values: grid })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    /// matched / |truth|
    pub exact_freq_rate: f64,
    pub l1_coeff_error: f64,
    pub matched: usize,
    pub missed: usize,
    pub spurious: usize,
}

/// Matches modes by exact frequency equality. The l1 error sums coefficient
/// differences over matches plus the magnitude of every unmatched mode on
/// either side.
pub fn compare(truth: &SparseSpectrum, found: &SparseSpectrum) -> ComparisonReport {
    let found_by_freq: HashMap<&[i64], Complex64> =
        found.modes().iter().map(|m| (m.freq.as_slice(), m.coeff)).collect();
    let mut matched = 0;
    let mut l1 = 0.0;
    for mode in truth.modes() {
        match found_by_freq.get(mode.freq.as_slice()) {
            Some(&a) => {
                matched += 1;
                l1 += (mode.coeff - a).norm();
            }
            None => l1 += mode.coeff.norm(),
        }
    }
    let truth_freqs: std::collections::HashSet<&[i64]> = truth.modes().iter().map(|m| m.freq.as_slice()).collect();
    let mut spurious = 0;
    for mode in found.modes() {
        if !truth_freqs.contains(mode.freq.as_slice()) {
            spurious += 1;
            l1 += mode.coeff.norm();
        }
    }
    let exact_freq_rate = if truth.is_empty() { 1.0 } else { matched as f64 / truth.len() as f64 };
    ComparisonReport { exact_freq_rate, l1_coeff_error: l1, matched, missed: truth.len() - matched, spurious }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn direct_dft_examples() {
        let f = direct_dft(&ComplexSampleVector::new(vec![c(1.0, 0.0); 5]));
        assert!((f[0] - c(5.0, 0.0)).norm() < 1e-12);
        assert!(f[1..].iter().all(|x| x.norm() < 1e-12));

        let mut impulse = vec![c(0.0, 0.0); 7];
        impulse[3] = c(2.0, 0.0);
        let f = direct_dft(&ComplexSampleVector::new(impulse));
        assert!(f.iter().all(|x| (x.norm() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn dense_single_mode() {
        let truth = SparseSpectrum::new(8, 2, vec![FourierMode::new(vec![1, 2], c(1.0, 0.0))]).unwrap();
        let grid = dense_spectrum(&truth, 8, 2).unwrap();
        assert!((grid.get(&[1, 2]) - c(1.0, 0.0)).norm() < 1e-9);
        let others = grid.values().iter().filter(|v| v.norm() > 1e-9).count();
        assert_eq!(others, 1);
        let support = grid.support(1e-6);
        assert_eq!(support.modes()[0].freq, vec![1, 2]);
    }

    #[test]
    fn dense_empty_and_3d() {
        let empty = SparseSpectrum::empty(8, 2).unwrap();
        let grid = dense_spectrum(&empty, 8, 2).unwrap();
        assert!(grid.values().iter().all(|v| v.norm() == 0.0));

        let modes = vec![
            FourierMode::new(vec![-3, 0, 2], c(0.5, -0.5)),
            FourierMode::new(vec![1, -2, -2], c(0.0, 1.0)),
        ];
        let truth = SparseSpectrum::new(6, 3, modes.clone()).unwrap();
        let support = dense_spectrum(&truth, 6, 3).unwrap().support(1e-6);
        assert_eq!(support.len(), 2);
        for m in &modes {
            assert!((support.get(&m.freq).unwrap().coeff - m.coeff).norm() < 1e-9);
        }
    }

    #[test]
    fn dense_guards() {
        let big = SparseSpectrum::empty(1002, 2).unwrap();
        assert!(matches!(dense_spectrum(&big, 1002, 2), Err(Error::OracleTooLarge(_))));
        let four = SparseSpectrum::empty(4, 4).unwrap();
        assert!(dense_spectrum(&four, 4, 4).is_err());
    }

    fn spectrum(modes: &[(Vec<i64>, Complex64)]) -> SparseSpectrum {
        SparseSpectrum::new(20, 2, modes.iter().map(|(w, a)| FourierMode::new(w.clone(), *a)).collect()).unwrap()
    }

    #[test]
    fn compare_examples() {
        let modes = vec![
            (vec![0, 1], c(1.0, 0.0)),
            (vec![2, 3], c(0.0, 1.0)),
            (vec![-4, 5], c(-1.0, 0.0)),
            (vec![6, -7], c(0.6, 0.8)),
        ];
        let truth = spectrum(&modes);
        let same = compare(&truth, &truth);
        assert_eq!(same.exact_freq_rate, 1.0);
        assert!(same.l1_coeff_error <= 1e-12);

        let missing = compare(&truth, &spectrum(&modes[..3]));
        assert_eq!(missing.exact_freq_rate, 0.75);
        assert_eq!(missing.missed, 1);
        assert!((missing.l1_coeff_error - 1.0).abs() < 1e-12);

        let eps = 1e-3;
        let perturbed: Vec<_> = modes.iter().map(|(w, a)| (w.clone(), a + c(eps, 0.0))).collect();
        let r = compare(&truth, &spectrum(&perturbed));
        assert!((r.l1_coeff_error - 4.0 * eps).abs() < 1e-12);

        let extra = compare(&spectrum(&modes[..2]), &spectrum(&modes));
        assert_eq!(extra.spurious, 2);
        assert!((extra.l1_coeff_error - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compare_symmetric_when_fully_matched() {
        let a = spectrum(&[(vec![1, 1], c(1.0, 0.0)), (vec![2, 2], c(0.0, 1.0))]);
        let b = spectrum(&[(vec![1, 1], c(0.9, 0.1)), (vec![2, 2], c(0.2, 1.0))]);
        assert!((compare(&a, &b).l1_coeff_error - compare(&b, &a).l1_coeff_error).abs() < 1e-15);
    }
}
