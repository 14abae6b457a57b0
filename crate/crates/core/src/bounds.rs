//! Sample-complexity bounds and an exhaustive pseudo-shattering checker for
//! the class `{ x -> l(x) * 1[x in R] : R an interval }`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{combined_label, VoterInterval};

/// Pseudo-dimension of interval-masked label functions.
pub const INTERVAL_PDIM: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Number of voters; also the sup-norm bound `M0` of the function class.
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub d_pd: u32,
}

impl BoundInputs {
    pub fn new(n: u64, epsilon: f64, delta: f64) -> Result<Self> {
        let b = Self { n, epsilon, delta, d_pd: INTERVAL_PDIM };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if self.d_pd == 0 {
            return Err(Error::config("pseudo-dimension must be at least 1"));
        }
        Ok(())
    }
}

/// Additive pieces of the sample-complexity bound.
///
/// `m >= leading_factor * (pdim_term + covering_constant_term + confidence_term)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    /// `32 M0^2 / eps^2`
    pub leading_factor: f64,
    /// `d ln(32 e M0 / eps)`
    pub pdim_term: f64,
    /// `ln(4 e (d + 1))`
    pub covering_constant_term: f64,
    /// `ln(1 / delta)`
    pub confidence_term: f64,
    /// `ln N1(eps/8, G, 2m) <= ln(e (d + 1)) + d ln(32 e M0 / eps)`
    pub log_covering_number: f64,
    /// Unrounded right-hand side.
    pub m_real: f64,
}

pub fn bound_terms(b: &BoundInputs) -> Result<BoundTerms> {
    b.validate()?;
    let e = std::f64::consts::E;
    let m0 = b.n as f64;
    let d = b.d_pd as f64;
    let leading_factor = 32.0 * m0 * m0 / (b.epsilon * b.epsilon);
    let pdim_term = d * (32.0 * e * m0 / b.epsilon).ln();
    let covering_constant_term = (4.0 * e * (d + 1.0)).ln();
    let confidence_term = (1.0 / b.delta).ln();
    Ok(BoundTerms {
        leading_factor,
        pdim_term,
        covering_constant_term,
        confidence_term,
        log_covering_number: (e * (d + 1.0)).ln() + pdim_term,
        m_real: leading_factor * (pdim_term + covering_constant_term + confidence_term),
    })
}

/// Smallest sample size satisfying the uniform-convergence bound.
pub fn sample_complexity(b: &BoundInputs) -> Result<u64> {
    Ok(bound_terms(b)?.m_real.ceil() as u64)
}

/// `ceil((ln(n / eps) + ln(1 / delta)) / eps^2)`, a factor `n^2` below the bound.
pub fn experiment_baseline(n: u64, epsilon: f64, delta: f64) -> Result<u64> {
    BoundInputs::new(n, epsilon, delta)?;
    let v = ((n as f64 / epsilon).ln() + (1.0 / delta).ln()) / (epsilon * epsilon);
    Ok(v.ceil() as u64)
}

/// Result of a pseudo-shattering check; patterns are bit masks with bit `j`
/// set when `l(x_j) * 1[x_j in R] > r_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShatterReport {
    pub shattered: bool,
    pub achievable_patterns: BTreeSet<u32>,
}

/// Enumerates every interval-induced membership pattern on `points` (the
/// empty set and each contiguous index run) and reports which threshold
/// patterns they produce.
pub fn check_pseudo_shatter(voters: &[VoterInterval], points: &[f64], thresholds: &[f64]) -> Result<ShatterReport> {
    let d = points.len();
    if !(1..=3).contains(&d) {
        return Err(Error::domain(format!("between 1 and 3 points are supported, got {d}")));
    }
    if thresholds.len() != d {
        return Err(Error::domain(format!("{d} points but {} thresholds", thresholds.len())));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("points must be strictly increasing"));
    }
    if voters.is_empty() {
        return Err(Error::config("at least one voter is required"));
    }
    let labels: Vec<f64> = points.iter().map(|&x| combined_label(voters, x) as f64).collect();
    let outcome = |inside: &dyn Fn(usize) -> bool| -> u32 {
        (0..d).fold(0, |mask, j| {
            let g = if inside(j) { labels[j] } else { 0.0 };
            if g > thresholds[j] {
                mask | (1 << j)
            } else {
                mask
            }
        })
    };

    let mut patterns = BTreeSet::new();
    patterns.insert(outcome(&|_| false));
    for a in 0..d {
        for b in a..d {
            patterns.insert(outcome(&|j| a <= j && j <= b));
        }
    }
    Ok(ShatterReport { shattered: patterns.len() == 1 << d, achievable_patterns: patterns })
}

/// Thresholds `r_j = l(x_j) / 2`.
pub fn canonical_thresholds(voters: &[VoterInterval], points: &[f64]) -> Vec<f64> {
    points.iter().map(|&x| combined_label(voters, x) as f64 / 2.0).collect()
}
