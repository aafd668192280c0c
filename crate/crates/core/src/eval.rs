//! Log-space evaluation of the stratum functions `Z_k(I; x)`.
//!
//! `Z_k(I; x) = -sum_{a in I} e^{f_a(x)} + sum_{b not in I} e^{f_b(x)}` is never
//! formed directly. Its sign is read from the log gap
//! `LSE_{b not in I} f_b - LSE_{a in I} f_a`, which stays finite and well
//! scaled for exponents far beyond the double range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_stratum, k_subsets, FunctionFamily, SubsetMask};

/// Default on-locus tolerance, in log-gap units.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Largest exponent magnitude accepted by the naive summation oracle.
pub const DIRECT_RANGE: f64 = 700.0;

pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Err(Error::EmptyTermSet);
    }
    Ok(m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln())
}

/// Sign-equivalent representation of `Z_k(I; x)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogGap(pub f64);

impl LogGap {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn sign(self, tol: f64) -> i8 {
        sign_with_tol(self.0, tol)
    }
}

#[inline]
pub fn sign_with_tol(gap: f64, tol: f64) -> i8 {
    if gap.abs() <= tol {
        0
    } else if gap > 0.0 {
        1
    } else {
        -1
    }
}

/// `Z_0(x)` as `exp(max + log_sum)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaled {
    pub max: f64,
    pub log_sum: f64,
}

impl LogScaled {
    pub fn ln(self) -> f64 {
        self.max + self.log_sum
    }

    /// Plain value; overflows to infinity when `ln() > ~709`.
    pub fn value(self) -> f64 {
        self.ln().exp()
    }
}

/// Exponents at one point with their max-shifted weights, reused across
/// every subset evaluated at that point.
#[derive(Debug, Clone)]
pub struct PointExponents {
    exps: Vec<f64>,
    max: f64,
    weights: Vec<f64>,
}

// below this the shared-max weights have lost too much precision
const WEIGHT_FLOOR: f64 = 1e-280;

impl PointExponents {
    pub fn new(family: &FunctionFamily, x: &[f64]) -> Self {
        Self::from_exponents(family.exponents(x))
    }

    pub fn from_exponents(exps: Vec<f64>) -> Self {
        let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights = exps.iter().map(|f| (f - max).exp()).collect();
        PointExponents { exps, max, weights }
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exps
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn n_terms(&self) -> usize {
        self.exps.len()
    }

    /// `ln sum_{a in mask} e^{f_a}`; `-inf` for the empty mask.
    pub fn log_mass(&self, mask: SubsetMask) -> f64 {
        let s: f64 = mask.indices().map(|i| self.weights[i]).sum();
        if s > WEIGHT_FLOOR {
            return self.max + s.ln();
        }
        let m = mask
            .indices()
            .map(|i| self.exps[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + mask.indices().map(|i| (self.exps[i] - m).exp()).sum::<f64>().ln()
    }

    /// Log gap of `Z_k(mask)`; the caller guarantees a proper non-empty mask.
    pub fn log_gap(&self, mask: SubsetMask) -> f64 {
        let out = mask.complement(self.exps.len());
        self.log_mass(out) - self.log_mass(mask)
    }

    pub fn z0(&self) -> LogScaled {
        LogScaled {
            max: self.max,
            log_sum: self.weights.iter().sum::<f64>().ln(),
        }
    }

    pub fn sign_vector(&self, k: usize, masks: &[SubsetMask], tol: f64) -> SignVector {
        SignVector::new(k, masks.iter().map(|&m| sign_with_tol(self.log_gap(m), tol)).collect())
    }
}

/// Log gap straight from an exponent slice, each side shifted by its own
/// maximum. Used by the grid sweeps where exponents are precomputed.
pub fn log_gap_from_exponents(exps: &[f64], mask: SubsetMask) -> f64 {
    let (mut m_in, mut m_out) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, &f) in exps.iter().enumerate() {
        if mask.contains(i) {
            m_in = m_in.max(f);
        } else {
            m_out = m_out.max(f);
        }
    }
    let (mut s_in, mut s_out) = (0.0, 0.0);
    for (i, &f) in exps.iter().enumerate() {
        if mask.contains(i) {
            s_in += (f - m_in).exp();
        } else {
            s_out += (f - m_out).exp();
        }
    }
    (m_out - m_in) + (s_out.ln() - s_in.ln())
}

fn check_subset(n_terms: usize, mask: SubsetMask) -> Result<()> {
    let k = mask.k();
    let in_range = n_terms >= 32 || mask.bits() >> n_terms == 0;
    if k == 0 || k >= n_terms || !in_range {
        return Err(Error::InvalidSubset { n_terms });
    }
    Ok(())
}

pub fn zk_log_gap(family: &FunctionFamily, subset: SubsetMask, x: &[f64]) -> Result<LogGap> {
    check_subset(family.len(), subset)?;
    Ok(LogGap(PointExponents::new(family, x).log_gap(subset)))
}

/// `Z_k(I; x)` by direct summation. Only meant as a cross-check.
pub fn zk_value(family: &FunctionFamily, subset: SubsetMask, x: &[f64]) -> Result<f64> {
    check_subset(family.len(), subset)?;
    let exps = family.exponents(x);
    if let Some(&big) = exps.iter().find(|f| f.abs() > DIRECT_RANGE) {
        return Err(Error::RangeExceeded(big));
    }
    Ok(exps
        .iter()
        .enumerate()
        .map(|(i, f)| if subset.contains(i) { -f.exp() } else { f.exp() })
        .sum())
}

pub fn sign_of(family: &FunctionFamily, subset: SubsetMask, x: &[f64], tol: f64) -> Result<i8> {
    Ok(zk_log_gap(family, subset, x)?.sign(tol))
}

pub fn z0(family: &FunctionFamily, x: &[f64]) -> LogScaled {
    PointExponents::new(family, x).z0()
}

/// Signs of `Z_k(I_tau; x)` for every stratum subset, in enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector {
    pub k: usize,
    pub entries: Vec<i8>,
    pub neg_count: usize,
}

impl SignVector {
    pub fn new(k: usize, entries: Vec<i8>) -> Self {
        let neg_count = entries.iter().filter(|&&s| s < 0).count();
        SignVector { k, entries, neg_count }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_zero(&self) -> bool {
        self.entries.contains(&0)
    }

    pub fn sum(&self) -> i64 {
        self.entries.iter().map(|&s| s as i64).sum()
    }

    /// Masks whose entry is -1.
    pub fn negatives(&self, masks: &[SubsetMask]) -> Vec<SubsetMask> {
        masks
            .iter()
            .zip(&self.entries)
            .filter(|(_, &s)| s < 0)
            .map(|(&m, _)| m)
            .collect()
    }
}

pub fn sign_vector(family: &FunctionFamily, k: usize, x: &[f64], tol: f64) -> Result<SignVector> {
    check_stratum(family.len(), k)?;
    let masks = k_subsets(family.len(), k);
    Ok(PointExponents::new(family, x).sign_vector(k, &masks, tol))
}
