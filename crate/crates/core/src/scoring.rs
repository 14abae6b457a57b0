//! Labelling sampled issues and finding the ERM interval.
//!
//! Labels can be computed point by point (`O(nm)`) or with a sweep over the
//! merged voter endpoints and sample positions (`O((n+m) log(n+m))`). Both
//! produce the same [`ScoredSampleArray`]. The ERM interval is the maximum
//! contiguous-sum run of the sorted labels.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{combined_label, ConsensusInterval, VoterInterval};

/// Sorted sample positions with their combined labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSampleArray {
    xs: Vec<f64>,
    labels: Vec<i64>,
}

impl ScoredSampleArray {
    /// Checks that `xs` is sorted, non-empty and parallel to `labels`.
    pub fn new(xs: Vec<f64>, labels: Vec<i64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::NoSamples);
        }
        if xs.len() != labels.len() {
            return Err(Error::domain(format!("{} positions but {} labels", xs.len(), labels.len())));
        }
        if xs.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::domain("sample positions are not sorted"));
        }
        Ok(Self { xs, labels })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn interval(&self, j: usize, k: usize, score: i64) -> ConsensusInterval {
        ConsensusInterval {
            lo: self.xs[j],
            hi: self.xs[k],
            empirical_score: score as f64,
            sample_index_lo: j,
            sample_index_hi: k,
        }
    }
}

/// Validates samples and returns them sorted, with `-0.0` folded into `0.0`.
pub fn sorted_samples(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    if let Some(bad) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::domain(format!("sample {bad} outside [0, 1]")));
    }
    let mut xs: Vec<f64> = samples.iter().map(|&x| x + 0.0).collect();
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

fn check_voters(voters: &[VoterInterval]) -> Result<()> {
    if voters.is_empty() {
        return Err(Error::config("at least one voter is required"));
    }
    Ok(())
}

pub fn score_naive(voters: &[VoterInterval], samples: &[f64]) -> Result<ScoredSampleArray> {
    check_voters(voters)?;
    let xs = sorted_samples(samples)?;
    let labels = xs.iter().map(|&x| combined_label(voters, x)).collect();
    Ok(ScoredSampleArray { xs, labels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    // Order at equal coordinates: opens, then samples, then closes, so that
    // samples on an endpoint count as inside.
    Open,
    Sample,
    Close,
}

pub fn score_sweepline(voters: &[VoterInterval], samples: &[f64]) -> Result<ScoredSampleArray> {
    check_voters(voters)?;
    let xs = sorted_samples(samples)?;
    let n = voters.len() as i64;

    let mut events: Vec<(f64, EventKind)> = Vec::with_capacity(2 * voters.len() + xs.len());
    for v in voters {
        events.push((v.lo() + 0.0, EventKind::Open));
        events.push((v.hi() + 0.0, EventKind::Close));
    }
    events.extend(xs.iter().map(|&x| (x, EventKind::Sample)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut active = 0i64;
    let mut out_xs = Vec::with_capacity(xs.len());
    let mut labels = Vec::with_capacity(xs.len());
    for (x, kind) in events {
        match kind {
            EventKind::Open => active += 1,
            EventKind::Close => active -= 1,
            EventKind::Sample => {
                out_xs.push(x);
                labels.push(2 * active - n);
            }
        }
    }
    Ok(ScoredSampleArray { xs: out_xs, labels })
}

/// Kadane's maximum-subarray scan over the sorted labels.
///
/// The best sum is replaced only on strict improvement and the running sum is
/// reset only when it drops strictly below zero, so among maximizing runs the
/// one with the smallest start index, then the smallest end index, is
/// returned. When every label is negative this is the single sample with the
/// largest label.
pub fn erm_interval(scored: &ScoredSampleArray) -> Result<ConsensusInterval> {
    let h = scored.labels();
    if h.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut best: Option<i64> = None;
    let mut current = 0i64;
    let (mut j_best, mut k_best) = (0, 0);
    let mut j_cand = 0;
    for (i, &label) in h.iter().enumerate() {
        current += label;
        if best.is_none_or(|b| current > b) {
            best = Some(current);
            j_best = j_cand;
            k_best = i;
        }
        if current < 0 {
            current = 0;
            j_cand = i + 1;
        }
    }
    let best = best.ok_or_else(|| Error::Invariant("Kadane scan produced no candidate".into()))?;
    Ok(scored.interval(j_best, k_best, best))
}

/// Exhaustive `O(m^2)` search over all index pairs `j <= k`, with the same
/// tie-break as [`erm_interval`]. Intended as a reference for small `m`.
pub fn erm_bruteforce(scored: &ScoredSampleArray) -> Result<ConsensusInterval> {
    let h = scored.labels();
    if h.is_empty() {
        return Err(Error::NoSamples);
    }
    let mut best: Option<(i64, usize, usize)> = None;
    for j in 0..h.len() {
        let mut sum = 0i64;
        for (k, &label) in h.iter().enumerate().skip(j) {
            sum += label;
            let better = match best {
                None => true,
                Some((b, _, _)) => sum.cmp(&b) == Ordering::Greater,
            };
            if better {
                best = Some((sum, j, k));
            }
        }
    }
    let (score, j, k) = best.expect("non-empty");
    Ok(scored.interval(j, k, score))
}
