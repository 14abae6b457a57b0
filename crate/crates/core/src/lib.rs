//! Learning a maximal-consensus interval on the opinion space `[0, 1]`.
//!
//! Each of `n` voters approves a closed interval. An issue `x` gets the
//! combined label `l(x) = 2k - n` when `k` voters approve it, and the quality
//! of a candidate interval `I` is the expected net agreement
//! `Phi(I) = E[l(x) 1[x in I]]` under an issue distribution.
//!
//! * [`scoring`] labels sampled issues and finds the empirical maximizer.
//! * [`oracle`] evaluates `Phi` and its maximizer exactly for a known scenario.
//! * [`queries`] implements cheaper labelling strategies with query accounting.
//! * [`bounds`] holds the sample-complexity bound and a pseudo-shattering checker.
//! * [`experiment`] runs seeded sweeps and writes CSV tables.

// Validation uses `!(x > 0.0)` style comparisons so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod queries;
pub mod rng;
pub mod scoring;
pub mod synthesis;

pub use distributions::DistributionSpec;
pub use error::{Error, Result};
pub use model::{combined_label, individual_label, ConsensusInterval, LabeledSample, Scenario, VoterInterval};
pub use scoring::{erm_bruteforce, erm_interval, score_naive, score_sweepline, ScoredSampleArray};
