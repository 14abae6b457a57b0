//! Labelling strategies and the approval queries each one issues.
//!
//! * full: every voter is asked about every sample.
//! * fractional: each sample is shown to a random subset of voters.
//! * binary search: each voter is asked about a few samples and the rest of
//!   their labels are inferred from the contiguity of their approval run.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::VoterInterval;
use crate::scoring::{score_sweepline, sorted_samples, ScoredSampleArray};

/// Approval queries issued per voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryLedger {
    per_voter: Vec<u64>,
}

impl QueryLedger {
    pub fn new(n: usize) -> Self {
        Self { per_voter: vec![0; n] }
    }

    pub fn per_voter_queries(&self) -> &[u64] {
        &self.per_voter
    }

    pub fn total_queries(&self) -> u64 {
        self.per_voter.iter().sum()
    }

    pub fn summary(&self) -> LedgerSummary {
        let total = self.total_queries();
        LedgerSummary {
            total,
            mean_per_voter: if self.per_voter.is_empty() { 0.0 } else { total as f64 / self.per_voter.len() as f64 },
            max_per_voter: self.per_voter.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub total: u64,
    pub mean_per_voter: f64,
    pub max_per_voter: u64,
}

/// How voter subsets are drawn by [`label_fractional`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetMode {
    /// A fresh subset for every sample point.
    #[default]
    PerPoint,
    /// One subset shared by all sample points.
    PerTrial,
}

pub fn label_full(voters: &[VoterInterval], samples: &[f64]) -> Result<(ScoredSampleArray, QueryLedger)> {
    let scored = score_sweepline(voters, samples)?;
    let ledger = QueryLedger { per_voter: vec![scored.len() as u64; voters.len()] };
    Ok((scored, ledger))
}

/// Subset size `max(1, round(fraction * n))`.
pub fn subset_size(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config(format!("voter fraction must be in (0, 1], got {fraction}")));
    }
    Ok(((fraction * n as f64).round() as usize).clamp(1, n))
}

/// Labels each sample with the net agreement `2a - k` of a random size-`k`
/// voter subset, `a` of whom approve. Labels are on the subset scale and are
/// not rescaled by `n / k`.
pub fn label_fractional<R: Rng + ?Sized>(
    voters: &[VoterInterval],
    samples: &[f64],
    fraction: f64,
    mode: SubsetMode,
    rng: &mut R,
) -> Result<(ScoredSampleArray, QueryLedger)> {
    if voters.is_empty() {
        return Err(Error::config("at least one voter is required"));
    }
    let n = voters.len();
    let k = subset_size(n, fraction)?;
    let xs = sorted_samples(samples)?;
    let mut ledger = QueryLedger::new(n);

    let shared = match mode {
        SubsetMode::PerTrial => Some(index::sample(rng, n, k).into_vec()),
        SubsetMode::PerPoint => None,
    };
    let mut labels = Vec::with_capacity(xs.len());
    for &x in &xs {
        let fresh;
        let subset: &[usize] = match &shared {
            Some(s) => s,
            None => {
                fresh = index::sample(rng, n, k).into_vec();
                &fresh
            }
        };
        let mut approvals = 0i64;
        for &v in subset {
            ledger.per_voter[v] += 1;
            if voters[v].contains(x) {
                approvals += 1;
            }
        }
        labels.push(2 * approvals - k as i64);
    }
    Ok((ScoredSampleArray::new(xs, labels)?, ledger))
}

/// Breadth-first dyadic probe order over `m` sorted samples (0-based indices).
///
/// Fractions `1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, 1/16, ...` map to index
/// `ceil(f * m) - 1`. Repeated indices are skipped; every index in `0..m`
/// appears exactly once.
pub fn probe_order(m: usize) -> impl Iterator<Item = usize> {
    let mut seen = vec![false; m];
    let mut emitted = 0usize;
    let mut level = 1u32;
    let mut numerator = 1u128;
    std::iter::from_fn(move || {
        while emitted < m {
            let denom = 1u128 << level;
            if numerator >= denom {
                level += 1;
                numerator = 1;
                continue;
            }
            let idx = (numerator * m as u128).div_ceil(denom) as usize - 1;
            numerator += 2;
            if !seen[idx] {
                seen[idx] = true;
                emitted += 1;
                return Some(idx);
            }
        }
        None
    })
}

/// Outcome of the three-phase search for one voter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoterSearch {
    /// Inclusive index range of approved samples, if any.
    pub approved: Option<(usize, usize)>,
    pub queries: u64,
}

/// Locates one voter's approval run among `m` sorted samples.
///
/// `ask(i)` answers whether the voter approves sample `i`; it is called at
/// most once per index. Phase one probes in [`probe_order`] until an approved
/// sample `p` is found. Phases two and three bisect for the left edge in
/// `[0, p]` and the right edge in `[p, m - 1]`.
pub fn search_voter(m: usize, mut ask: impl FnMut(usize) -> bool) -> VoterSearch {
    // 0 = unknown, 1 = approved, 2 = disapproved
    let mut known = vec![0u8; m];
    let mut queries = 0u64;
    let mut query = |i: usize| -> bool {
        if known[i] == 0 {
            queries += 1;
            known[i] = if ask(i) { 1 } else { 2 };
        }
        known[i] == 1
    };

    let Some(p) = probe_order(m).find(|&i| query(i)) else {
        return VoterSearch { approved: None, queries };
    };

    let (mut lo, mut hi) = (0, p);
    while lo < hi {
        let q = lo + (hi - lo) / 2;
        if query(q) {
            hi = q;
        } else {
            lo = q + 1;
        }
    }
    let left = lo;

    let (mut lo, mut hi) = (p, m - 1);
    while lo < hi {
        let q = lo + (hi - lo).div_ceil(2);
        if query(q) {
            lo = q;
        } else {
            hi = q - 1;
        }
    }
    VoterSearch { approved: Some((left, lo)), queries }
}

/// Exact labels from per-voter binary search, assuming every voter's
/// approvals form one contiguous run of the sorted samples.
pub fn label_binary_search(voters: &[VoterInterval], samples: &[f64]) -> Result<(ScoredSampleArray, QueryLedger)> {
    if voters.is_empty() {
        return Err(Error::config("at least one voter is required"));
    }
    let xs = sorted_samples(samples)?;
    let m = xs.len();
    let mut ledger = QueryLedger::new(voters.len());
    // difference array of approval counts
    let mut delta = vec![0i64; m + 1];
    for (v, voter) in voters.iter().enumerate() {
        let search = search_voter(m, |i| voter.contains(xs[i]));
        ledger.per_voter[v] = search.queries;
        if let Some((a, b)) = search.approved {
            delta[a] += 1;
            delta[b + 1] -= 1;
        }
    }
    let n = voters.len() as i64;
    let mut count = 0i64;
    let labels = delta[..m]
        .iter()
        .map(|d| {
            count += d;
            2 * count - n
        })
        .collect();
    Ok((ScoredSampleArray::new(xs, labels)?, ledger))
}
