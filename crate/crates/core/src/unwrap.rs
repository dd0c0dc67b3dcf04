//! Block partial unwrapping.
//!
//! Every run of `d1` consecutive coordinates is folded into one: the point map
//! sends `t_b` to `(t_b, N t_b, ..., N^(d1-1) t_b)` and the frequency map sends
//! a block `(w_1, ..., w_d1)` to `w_1 + N w_2 + ... + N^(d1-1) w_d1`. Both
//! sides agree on the exponent, `w . g(t) = v' . t`.

use crate::spectrum::{centered_mod, in_band};
use crate::{Error, Result};

/// `N * (1 + N + ... + N^(d1-1)) + 1`, the smallest odd width whose balanced
/// band contains every unwrapped block value.
pub fn effective_bandwidth(n: u64, d1: usize) -> Result<u64> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("bandwidth N = {n} must be even and >= 2")));
    }
    if d1 == 0 {
        return Err(Error::InvalidParameter("block size d1 must be positive".into()));
    }
    let mut geometric: u64 = 0;
    let mut power: u64 = 1;
    for i in 0..d1 {
        geometric = geometric.checked_add(power).ok_or(Error::Overflow("sizing the unwrapped band"))?;
        if i + 1 < d1 {
            power = power.checked_mul(n).ok_or(Error::Overflow("sizing the unwrapped band"))?;
        }
    }
    let eff = n
        .checked_mul(geometric)
        .and_then(|x| x.checked_add(1))
        .filter(|&x| x <= i64::MAX as u64)
        .ok_or(Error::Overflow("sizing the unwrapped band"))?;
    Ok(eff)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnwrapMap {
    bandwidth: u64,
    dim: usize,
    block: usize,
    reduced_dim: usize,
    eff_bandwidth: u64,
    /// N^i for i in 0..block
    powers: Vec<i64>,
}

impl UnwrapMap {
    pub fn new(bandwidth: u64, dim: usize, block: usize) -> Result<Self> {
        if dim == 0 || block == 0 || dim % block != 0 {
            return Err(Error::InvalidParameter(format!(
                "block size {block} must divide dimension {dim}"
            )));
        }
        let eff_bandwidth = effective_bandwidth(bandwidth, block)?;
        let mut powers = Vec::with_capacity(block);
        let mut power: i64 = 1;
        for _ in 0..block {
            powers.push(power);
            power = power.saturating_mul(bandwidth as i64);
        }
        Ok(Self { bandwidth, dim, block, reduced_dim: dim / block, eff_bandwidth, powers })
    }

    pub fn bandwidth(&self) -> u64 {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn reduced_dim(&self) -> usize {
        self.reduced_dim
    }

    pub fn eff_bandwidth(&self) -> u64 {
        self.eff_bandwidth
    }

    /// Maps a point of the reduced domain to the full domain. Entries are not
    /// reduced mod 1.
    pub fn unwrap_point(&self, t: &[f64]) -> Result<Vec<f64>> {
        if t.len() != self.reduced_dim {
            return Err(Error::DimensionMismatch { expected: self.reduced_dim, got: t.len() });
        }
        Ok(t.iter()
            .flat_map(|&tb| self.powers.iter().map(move |&pw| pw as f64 * tb))
            .collect())
    }

    pub fn unwrap_freq(&self, w: &[i64]) -> Result<Vec<i64>> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: w.len() });
        }
        if let Some(&value) = w.iter().find(|&&x| !in_band(x, self.bandwidth)) {
            return Err(Error::FrequencyOutOfRange { value, bandwidth: self.bandwidth });
        }
        w.chunks(self.block)
            .map(|block| {
                block.iter().zip(&self.powers).try_fold(0i64, |acc, (&wi, &pw)| {
                    wi.checked_mul(pw)
                        .and_then(|x| acc.checked_add(x))
                        .ok_or(Error::Overflow("unwrapping a frequency"))
                })
            })
            .collect()
    }

    /// Exact inverse of [`unwrap_freq`](Self::unwrap_freq) by balanced base-N
    /// digit extraction.
    pub fn rewrap_freq(&self, v: &[i64]) -> Result<Vec<i64>> {
        if v.len() != self.reduced_dim {
            return Err(Error::DimensionMismatch { expected: self.reduced_dim, got: v.len() });
        }
        let n = self.bandwidth as i64;
        let mut out = Vec::with_capacity(self.dim);
        for &vb in v {
            if !in_band(vb, self.eff_bandwidth) {
                return Err(Error::FrequencyOutOfRange { value: vb, bandwidth: self.eff_bandwidth });
            }
            let mut rest = vb;
            for _ in 0..self.block {
                let digit = centered_mod(rest, self.bandwidth);
                out.push(digit);
                rest = (rest - digit) / n;
            }
            if rest != 0 {
                return Err(Error::NotInImage(vb));
            }
        }
        Ok(out)
    }
}
