//! Sparse multidimensional spectra and the integer helpers shared by the
//! other modules.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::{Error, Result};

/// Balanced representative of `v` modulo `n`.
///
/// The result lies in `[-ceil(n/2), n - ceil(n/2))`, which is `[-n/2, n/2)`
/// for even `n`.
pub fn centered_mod(v: i64, n: u64) -> i64 {
    assert!(n >= 1, "modulus must be positive");
    let n = n as i128;
    let half = (n + 1) / 2;
    ((v as i128 + half).rem_euclid(n) - half) as i64
}

/// Whether `w` lies in the balanced band of width `n` (see [`centered_mod`]).
pub fn in_band(w: i64, n: u64) -> bool {
    let n = n as i128;
    let half = (n + 1) / 2;
    let w = w as i128;
    -half <= w && w < n - half
}

/// One frequency vector together with its coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMode {
    pub freq: Vec<i64>,
    pub coeff: Complex64,
}

impl FourierMode {
    pub fn new(freq: Vec<i64>, coeff: Complex64) -> Self {
        Self { freq, coeff }
    }
}

/// An `s`-sparse spectrum on the integer cube of width `bandwidth` in `dim`
/// dimensions. Frequencies are distinct, in band, and coefficients finite.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    modes: Vec<FourierMode>,
    bandwidth: u64,
    dim: usize,
}

impl SparseSpectrum {
    pub fn new(bandwidth: u64, dim: usize, modes: Vec<FourierMode>) -> Result<Self> {
        if bandwidth == 0 {
            return Err(Error::InvalidParameter("bandwidth must be positive".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(modes.len());
        for mode in &modes {
            if mode.freq.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: mode.freq.len() });
            }
            if let Some(&value) = mode.freq.iter().find(|&&w| !in_band(w, bandwidth)) {
                return Err(Error::FrequencyOutOfRange { value, bandwidth });
            }
            if !(mode.coeff.re.is_finite() && mode.coeff.im.is_finite()) {
                return Err(Error::NonFiniteCoefficient(mode.freq.clone()));
            }
            if !seen.insert(mode.freq.as_slice()) {
                return Err(Error::DuplicateFrequency(mode.freq.clone()));
            }
        }
        Ok(Self { modes, bandwidth, dim })
    }

    pub fn empty(bandwidth: u64, dim: usize) -> Result<Self> {
        Self::new(bandwidth, dim, Vec::new())
    }

    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    pub fn into_modes(self) -> Vec<FourierMode> {
        self.modes
    }

    pub fn bandwidth(&self) -> u64 {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Errors if the spectrum holds more than `budget` modes.
    pub fn check_sparsity(&self, budget: usize) -> Result<()> {
        if self.modes.len() > budget {
            return Err(Error::InvalidParameter(format!(
                "{} modes exceed the sparsity budget {budget}",
                self.modes.len()
            )));
        }
        Ok(())
    }

    pub fn get(&self, freq: &[i64]) -> Option<&FourierMode> {
        self.modes.iter().find(|m| m.freq == freq)
    }

    /// Reads the signal-spec text format: a header `N d s` followed by `s`
    /// lines `re im w_1 ... w_d`.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));

        let (line_no, header) = match lines.next() {
            Some((n, l)) => (n, l?),
            None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
        };
        let header: Vec<&str> = header.split_whitespace().collect();
        if header.len() != 3 {
            return Err(Error::Parse { line: line_no, msg: "header must be `N d s`".into() });
        }
        let bandwidth: u64 = parse_field(header[0], line_no)?;
        let dim: usize = parse_field(header[1], line_no)?;
        let count: usize = parse_field(header[2], line_no)?;

        let mut modes = Vec::with_capacity(count);
        for (line_no, line) in lines.by_ref().take(count) {
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 2 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} fields, found {}", dim + 2, fields.len()),
                });
            }
            let re: f64 = parse_field(fields[0], line_no)?;
            let im: f64 = parse_field(fields[1], line_no)?;
            let freq = fields[2..]
                .iter()
                .map(|f| parse_field::<i64>(f, line_no))
                .collect::<Result<Vec<_>>>()?;
            modes.push(FourierMode::new(freq, Complex64::new(re, im)));
        }
        if modes.len() != count {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("header declares {count} modes, found {}", modes.len()),
            });
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(Error::Parse { line: line_no, msg: "trailing content".into() });
        }
        Self::new(bandwidth, dim, modes)
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {}", self.bandwidth, self.dim, self.modes.len())?;
        for mode in &self.modes {
            write!(out, "{} {}", mode.coeff.re, mode.coeff.im)?;
            for w in &mode.freq {
                write!(out, " {w}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Samples taken along one projection line; the length is the prime `p` of
/// the iteration that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSampleVector {
    values: Vec<Complex64>,
}

impl ComplexSampleVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

impl std::ops::Index<usize> for ComplexSampleVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.values[i]
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("cannot parse `{field}`") })
}

/// Fractional part of `w * x` in `[-1/2, 1/2)`, computed without forming a
/// large product when `w` is big.
#[inline]
pub(crate) fn frac_product(w: i64, x: f64) -> f64 {
    let y = w as f64 * x;
    y - y.round()
}

/// phase = exp(2 pi i t)
#[inline]
pub(crate) fn cis_cycles(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * t)
}

/// Evaluates `sum_j a_j exp(2 pi i w_j . x)`.
pub fn evaluate_spectrum(spec: &SparseSpectrum, x: &[f64]) -> Result<Complex64> {
    if x.len() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: x.len() });
    }
    Ok(spec
        .modes
        .iter()
        .map(|mode| {
            let cycles: f64 = mode.freq.iter().zip(x).map(|(&w, &xi)| frac_product(w, xi)).sum();
            mode.coeff * cis_cycles(cycles)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn centered_mod_examples() {
        assert_eq!(centered_mod(0, 20), 0);
        assert_eq!(centered_mod(41, 20), 1);
        assert_eq!(centered_mod(-210, 400), 190);
        assert_eq!(centered_mod(10, 20), -10);
        assert_eq!(centered_mod(-10, 20), -10);
        // odd modulus: [-11, 10)
        assert_eq!(centered_mod(10, 21), 10 - 21);
        assert_eq!(centered_mod(9, 21), 9);
    }

    #[test]
    fn evaluate_examples() {
        let dc = SparseSpectrum::new(20, 3, vec![FourierMode::new(vec![0, 0, 0], c(1.0, 0.0))]).unwrap();
        let v = evaluate_spectrum(&dc, &[0.3, 0.1, 0.9]).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);

        let one = SparseSpectrum::new(20, 1, vec![FourierMode::new(vec![3], c(1.0, 0.0))]).unwrap();
        let v = evaluate_spectrum(&one, &[0.5]).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-12);

        let two = SparseSpectrum::new(20, 2, vec![FourierMode::new(vec![1, 2], c(2.0, 0.0))]).unwrap();
        let v = evaluate_spectrum(&two, &[0.25, 0.25]).unwrap();
        assert!((v - c(0.0, -2.0)).norm() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_wrong_dimension() {
        let s = SparseSpectrum::empty(20, 2).unwrap();
        assert!(matches!(
            evaluate_spectrum(&s, &[0.1]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn spectrum_invariants_enforced() {
        let dup = vec![
            FourierMode::new(vec![1, 2], c(1.0, 0.0)),
            FourierMode::new(vec![1, 2], c(0.5, 0.0)),
        ];
        assert!(matches!(SparseSpectrum::new(20, 2, dup), Err(Error::DuplicateFrequency(_))));

        let out = vec![FourierMode::new(vec![10, 0], c(1.0, 0.0))];
        assert!(matches!(SparseSpectrum::new(20, 2, out), Err(Error::FrequencyOutOfRange { .. })));
        let ok = vec![FourierMode::new(vec![-10, 9], c(1.0, 0.0))];
        assert!(SparseSpectrum::new(20, 2, ok).is_ok());

        let nan = vec![FourierMode::new(vec![0, 0], c(f64::NAN, 0.0))];
        assert!(matches!(SparseSpectrum::new(20, 2, nan), Err(Error::NonFiniteCoefficient(_))));

        let s = SparseSpectrum::new(20, 1, vec![FourierMode::new(vec![0], c(1.0, 0.0))]).unwrap();
        assert!(s.check_sparsity(1).is_ok());
        assert!(s.check_sparsity(0).is_err());
    }

    #[test]
    fn text_format_roundtrip_and_errors() {
        let s = SparseSpectrum::new(
            20,
            3,
            vec![
                FourierMode::new(vec![1, -10, 9], c(0.1, -0.7071067811865476)),
                FourierMode::new(vec![0, 0, 0], c(-1.0, 1e-300)),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("20 3 2\n"));
        let back = SparseSpectrum::read_text(buf.as_slice()).unwrap();
        assert_eq!(back, s);

        let short = "20 2 2\n1 0 1 2\n";
        assert!(matches!(SparseSpectrum::read_text(short.as_bytes()), Err(Error::Parse { .. })));
        let bad = "20 2 1\n1 0 1 x\n";
        assert!(matches!(SparseSpectrum::read_text(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let fields = "20 2 1\n1 0 1\n";
        assert!(matches!(SparseSpectrum::read_text(fields.as_bytes()), Err(Error::Parse { .. })));
    }

    fn spectrum_strategy(
        dim: usize,
        max_modes: usize,
    ) -> impl Strategy<Value = Vec<(Vec<i64>, (f64, f64))>> {
        prop::collection::vec(
            (prop::collection::vec(-10i64..10, dim), (-2.0f64..2.0, -2.0f64..2.0)),
            0..max_modes,
        )
    }

    fn build(raw: Vec<(Vec<i64>, (f64, f64))>, dim: usize) -> SparseSpectrum {
        let mut seen = HashSet::new();
        let modes = raw
            .into_iter()
            .filter(|(w, _)| seen.insert(w.clone()))
            .map(|(w, (re, im))| FourierMode::new(w, c(re, im)))
            .collect();
        SparseSpectrum::new(20, dim, modes).unwrap()
    }

    proptest! {
        #[test]
        fn centered_mod_is_periodic(v in -1_000_000i64..1_000_000, n in 1u64..5000, k in -1000i64..1000) {
            let r = centered_mod(v, n);
            prop_assert_eq!(centered_mod(v + k * n as i64, n), r);
            prop_assert_eq!((v - r).rem_euclid(n as i64), 0);
            prop_assert!(in_band(r, n));
        }

        #[test]
        fn evaluation_is_linear(a in spectrum_strategy(3, 6), b in spectrum_strategy(3, 6),
                                x in prop::collection::vec(0.0f64..1.0, 3)) {
            let sa = build(a, 3);
            let used: HashSet<_> = sa.modes().iter().map(|m| m.freq.clone()).collect();
            let sb = build(b.into_iter().filter(|(w, _)| !used.contains(w)).collect(), 3);
            let mut all = sa.modes().to_vec();
            all.extend(sb.modes().iter().cloned());
            let union = SparseSpectrum::new(20, 3, all).unwrap();
            let lhs = evaluate_spectrum(&union, &x).unwrap();
            let rhs = evaluate_spectrum(&sa, &x).unwrap() + evaluate_spectrum(&sb, &x).unwrap();
            let scale = 1.0 + lhs.norm().max(rhs.norm());
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
        }

        #[test]
        fn evaluation_is_periodic(a in spectrum_strategy(2, 8),
                                  x in prop::collection::vec(0.0f64..1.0, 2),
                                  shift in prop::collection::vec(-3i32..4, 2)) {
            let s = build(a, 2);
            let moved: Vec<f64> = x.iter().zip(&shift).map(|(xi, k)| xi + *k as f64).collect();
            let lhs = evaluate_spectrum(&s, &x).unwrap();
            let rhs = evaluate_spectrum(&s, &moved).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }
}
