//! Exact evaluation of the true objective for a known scenario.
//!
//! The combined label is a step function whose steps sit at voter endpoints.
//! Integrating it against a distribution with a closed-form CDF is a finite
//! sum over segments, and the best interval is a maximum-weight run of
//! consecutive segments.

use crate::distributions::{DistributionSpec, Prepared};
use crate::error::{Error, Result};
use crate::model::{combined_label, ConsensusInterval, VoterInterval};

/// Partition of `[0, 1]` by voter endpoints, with the (constant) combined
/// label on the interior of each segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDecomposition {
    n: usize,
    breakpoints: Vec<f64>,
    segment_labels: Vec<i64>,
}

impl SegmentDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Strictly increasing, starting at 0 and ending at 1.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segment_labels(&self) -> &[i64] {
        &self.segment_labels
    }

    pub fn num_segments(&self) -> usize {
        self.segment_labels.len()
    }

    pub fn segment(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.breakpoints[i] + self.breakpoints[i + 1])
    }

    /// Per-segment weights `label * P(segment)`.
    pub fn weights(&self, spec: &DistributionSpec) -> Result<Vec<f64>> {
        spec.validate()?;
        let p = spec.prepared();
        Ok(self
            .segment_labels
            .iter()
            .enumerate()
            .map(|(i, &label)| {
                let (a, b) = self.segment(i);
                label as f64 * (p.cdf(b) - p.cdf(a))
            })
            .collect())
    }
}

pub fn decompose(voters: &[VoterInterval]) -> Result<SegmentDecomposition> {
    if voters.is_empty() {
        return Err(Error::config("at least one voter is required"));
    }
    let mut breakpoints: Vec<f64> = Vec::with_capacity(2 * voters.len() + 2);
    breakpoints.push(0.0);
    breakpoints.push(1.0);
    for v in voters {
        breakpoints.push(v.lo() + 0.0);
        breakpoints.push(v.hi() + 0.0);
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let segment_labels = breakpoints.windows(2).map(|w| combined_label(voters, 0.5 * (w[0] + w[1]))).collect();
    Ok(SegmentDecomposition { n: voters.len(), breakpoints, segment_labels })
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
        return Err(Error::domain(format!("interval [{lo}, {hi}] not inside [0, 1]")));
    }
    if lo > hi {
        return Err(Error::domain(format!("interval [{lo}, {hi}] has lo > hi")));
    }
    Ok(())
}

fn objective_prepared(decomp: &SegmentDecomposition, p: &Prepared, lo: f64, hi: f64) -> f64 {
    let bp = &decomp.breakpoints;
    // first segment whose right end is beyond lo
    let start = bp.partition_point(|&b| b <= lo).saturating_sub(1);
    let mut phi = 0.0;
    for i in start..decomp.segment_labels.len() {
        let (a, b) = (bp[i], bp[i + 1]);
        if a >= hi {
            break;
        }
        let from = a.max(lo);
        let to = b.min(hi);
        if to > from {
            phi += decomp.segment_labels[i] as f64 * (p.cdf(to) - p.cdf(from));
        }
    }
    phi
}

/// Expected net agreement inside `[lo, hi]` under `spec`.
pub fn true_objective(decomp: &SegmentDecomposition, spec: &DistributionSpec, lo: f64, hi: f64) -> Result<f64> {
    check_bounds(lo, hi)?;
    spec.validate()?;
    Ok(objective_prepared(decomp, &spec.prepared(), lo, hi))
}

/// [`true_objective`] divided by the number of voters, so it lies in `[-1, 1]`.
pub fn normalized_objective(decomp: &SegmentDecomposition, spec: &DistributionSpec, lo: f64, hi: f64) -> Result<f64> {
    Ok(true_objective(decomp, spec, lo, hi)? / decomp.n as f64)
}

/// The interval maximizing the true objective.
///
/// The returned [`ConsensusInterval`] carries the optimal objective value in
/// `empirical_score` and the first and last segment indices of the selected
/// run in `sample_index_lo` / `sample_index_hi`.
///
/// Runs are compared by total weight; among equal-weight runs the one with
/// the fewest segments wins, then the lowest start segment. If no run has positive
/// weight the optimum is 0: the largest-mass run of zero-label segments is
/// returned when one exists, otherwise the zero-mass interval `[c, c]` at the
/// midpoint `c` of the first segment with the largest label.
pub fn true_optimum(decomp: &SegmentDecomposition, spec: &DistributionSpec) -> Result<ConsensusInterval> {
    let weights = decomp.weights(spec)?;
    let p = spec.prepared();

    let mut best: Option<(f64, usize, usize)> = None;
    for j in 0..weights.len() {
        let mut sum = 0.0;
        for (k, &w) in weights.iter().enumerate().skip(j) {
            sum += w;
            let better = best.is_none_or(|(b, bj, bk)| sum > b || (sum == b && k - j < bk - bj));
            if better {
                best = Some((sum, j, k));
            }
        }
    }
    let (best_weight, j, k) = best.ok_or_else(|| Error::Invariant("decomposition has no segments".into()))?;

    let (lo, hi, j, k) = if best_weight > 0.0 {
        (decomp.breakpoints[j], decomp.breakpoints[k + 1], j, k)
    } else if let Some((j, k)) = widest_zero_run(decomp, &p) {
        (decomp.breakpoints[j], decomp.breakpoints[k + 1], j, k)
    } else {
        let top = *decomp.segment_labels.iter().max().expect("non-empty");
        let i = decomp.segment_labels.iter().position(|&l| l == top).expect("present");
        let c = decomp.midpoint(i);
        (c, c, i, i)
    };
    let phi = objective_prepared(decomp, &p, lo, hi);
    Ok(ConsensusInterval { lo, hi, empirical_score: phi, sample_index_lo: j, sample_index_hi: k })
}

/// Maximal run of zero-label segments with the largest probability mass.
fn widest_zero_run(decomp: &SegmentDecomposition, p: &Prepared) -> Option<(usize, usize)> {
    let labels = &decomp.segment_labels;
    let mut best: Option<(f64, usize, usize)> = None;
    let mut i = 0;
    while i < labels.len() {
        if labels[i] != 0 {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < labels.len() && labels[i + 1] == 0 {
            i += 1;
        }
        let mass = p.cdf(decomp.breakpoints[i + 1]) - p.cdf(decomp.breakpoints[start]);
        if best.is_none_or(|(m, _, _)| mass > m) {
            best = Some((mass, start, i));
        }
        i += 1;
    }
    best.map(|(_, j, k)| (j, k))
}
