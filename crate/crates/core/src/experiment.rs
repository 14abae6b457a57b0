//! Seeded trial runner for the three synthetic experiments.
//!
//! Every trial draws its voters and its sample pool from sub-streams keyed by
//! `(seed, trial_id)`, so all swept values within a trial see the same voters
//! and, for sample-count sweeps, nested prefixes of the same samples. Voter
//! subsets in the fraction sweep come from a stream keyed by
//! `(seed, trial_id, sweep_index)`. Results are gathered in trial order, so
//! output does not depend on the number of workers.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::experiment_baseline;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::model::{ConsensusInterval, VoterInterval};
use crate::oracle::{decompose, true_objective, true_optimum, SegmentDecomposition};
use crate::queries::{label_binary_search, label_fractional, label_full, subset_size, LedgerSummary, SubsetMode};
use crate::rng::{substream, Purpose};
use crate::scoring::erm_interval;
use crate::synthesis::{generate_voters, VoterGenSpec};

/// Slack allowed when checking that no interval beats the exact optimum.
const OPTIMALITY_SLACK: f64 = 1e-9;

/// Number of points in the default sample-count grid.
pub const DEFAULT_GRID_POINTS: usize = 20;
/// Smallest sample count in the default grid.
pub const DEFAULT_GRID_MIN: usize = 10;
/// Samples per trial in the fraction sweep.
pub const DEFAULT_FRACTION_SAMPLES: usize = 10_000;
pub const DEFAULT_FRACTIONS: [f64; 5] = [1.0, 0.75, 0.5, 0.25, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreScale {
    Raw,
    /// Objective divided by the number of voters.
    #[default]
    Normalized,
}

impl ScoreScale {
    pub fn apply(self, phi: f64, n: usize) -> f64 {
        match self {
            ScoreScale::Raw => phi,
            ScoreScale::Normalized => phi / n as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreScale::Raw => "raw",
            ScoreScale::Normalized => "normalized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Full,
    Fractional(f64),
    BinarySearch,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::Fractional(_) => "fractional",
            Strategy::BinarySearch => "binary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    SampleCounts(Vec<usize>),
    VoterFractions(Vec<f64>),
    BinarySearchCost(Vec<usize>),
}

impl Sweep {
    pub fn param_name(&self) -> &'static str {
        match self {
            Sweep::VoterFractions(_) => "fraction",
            _ => "m",
        }
    }

    fn len(&self) -> usize {
        match self {
            Sweep::SampleCounts(v) | Sweep::BinarySearchCost(v) => v.len(),
            Sweep::VoterFractions(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub voter_spec: VoterGenSpec,
    pub distribution: DistributionSpec,
    pub sweep: Sweep,
    pub seed: u64,
    pub score_scale: ScoreScale,
    /// Samples per trial for the fraction sweep.
    pub fraction_samples: usize,
    pub subset_mode: SubsetMode,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

/// Log-spaced integer grid from `lo` to `hi` inclusive, ascending, without repeats.
pub fn log_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    if points <= 1 || lo >= hi {
        return vec![hi.max(lo)];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (a + t * (b - a)).exp().round() as usize
        })
        .collect();
    grid[0] = lo;
    grid[points - 1] = hi;
    grid.dedup();
    grid
}

/// Sample-count grid from 10 up to the experiment baseline for `(n, eps, delta)`.
pub fn default_sample_grid(n: usize, epsilon: f64, delta: f64) -> Result<Vec<usize>> {
    let top = experiment_baseline(n as u64, epsilon, delta)? as usize;
    Ok(log_grid(DEFAULT_GRID_MIN, top.max(DEFAULT_GRID_MIN), DEFAULT_GRID_POINTS))
}

impl ExperimentConfig {
    fn base(sweep: Sweep) -> Self {
        Self {
            trials: 100,
            epsilon: 0.01,
            delta: 0.01,
            voter_spec: VoterGenSpec::preset(100),
            distribution: DistributionSpec::Uniform,
            sweep,
            seed: 0,
            score_scale: ScoreScale::Normalized,
            fraction_samples: DEFAULT_FRACTION_SAMPLES,
            subset_mode: SubsetMode::PerPoint,
            workers: 0,
        }
    }

    /// Success rate against the number of samples.
    pub fn figure2() -> Self {
        let grid = default_sample_grid(100, 0.01, 0.01).expect("valid defaults");
        Self::base(Sweep::SampleCounts(grid))
    }

    /// Success rate against the fraction of voters asked about each sample.
    pub fn figure3() -> Self {
        Self::base(Sweep::VoterFractions(DEFAULT_FRACTIONS.to_vec()))
    }

    /// Per-voter query cost of binary-search labelling against the number of samples.
    pub fn figure4() -> Self {
        let grid = default_sample_grid(100, 0.01, 0.01).expect("valid defaults");
        Self::base(Sweep::BinarySearchCost(grid))
    }

    pub fn n(&self) -> usize {
        self.voter_spec.n
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        self.voter_spec.validate()?;
        self.distribution.validate()?;
        if self.sweep.len() == 0 {
            return Err(Error::config("sweep has no values"));
        }
        match &self.sweep {
            Sweep::SampleCounts(ms) | Sweep::BinarySearchCost(ms) => {
                if ms.contains(&0) {
                    return Err(Error::config("sample counts must be at least 1"));
                }
            }
            Sweep::VoterFractions(fs) => {
                for &f in fs {
                    subset_size(self.n(), f)?;
                }
                if self.fraction_samples == 0 {
                    return Err(Error::config("fraction sweep needs at least one sample"));
                }
            }
        }
        Ok(())
    }
}

/// One (trial, swept value) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: usize,
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub strategy: Strategy,
    pub n: usize,
    pub m: usize,
    pub interval: ConsensusInterval,
    /// True objective of the ERM interval.
    pub phi_hat: f64,
    /// True objective of the optimal interval.
    pub phi_opt: f64,
    pub success: bool,
    pub ledger: LedgerSummary,
}

impl TrialResult {
    pub fn gap(&self, scale: ScoreScale) -> f64 {
        scale.apply(self.phi_opt, self.n) - scale.apply(self.phi_hat, self.n)
    }

    pub fn success_at(&self, epsilon: f64, scale: ScoreScale) -> bool {
        self.gap(scale) <= epsilon
    }
}

/// Aggregate over all trials for one swept value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_param: String,
    pub value: f64,
    pub trials: usize,
    pub success_fraction: f64,
    pub mean_phi_gap: f64,
    pub mean_queries_per_voter: f64,
    pub mean_total_queries: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Sorted by `(sweep_index, trial_id)`.
    pub trials: Vec<TrialResult>,
    pub score_scale: ScoreScale,
}

impl SweepOutcome {
    /// Success fractions per swept value, recomputed from stored objectives.
    pub fn success_fractions_at(&self, epsilon: f64, scale: ScoreScale) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let hits = self.trials.iter().filter(|t| t.sweep_index == i && t.success_at(epsilon, scale)).count();
                hits as f64 / row.trials as f64
            })
            .collect()
    }

    pub fn trials_at(&self, sweep_index: usize) -> impl Iterator<Item = &TrialResult> {
        self.trials.iter().filter(move |t| t.sweep_index == sweep_index)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "sweep_param",
            "value",
            "trials",
            "success_fraction",
            "mean_phi_gap",
            "mean_queries_per_voter",
            "mean_total_queries",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.sweep_param.clone(),
                r.value.to_string(),
                r.trials.to_string(),
                r.success_fraction.to_string(),
                r.mean_phi_gap.to_string(),
                r.mean_queries_per_voter.to_string(),
                r.mean_total_queries.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_detail_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "trial_id",
            "sweep_index",
            "sweep_value",
            "strategy",
            "m",
            "lo",
            "hi",
            "empirical_score",
            "phi_hat",
            "phi_opt",
            "phi_gap",
            "success",
            "total_queries",
            "mean_queries_per_voter",
            "max_queries_per_voter",
        ])?;
        for t in &self.trials {
            w.write_record([
                t.trial_id.to_string(),
                t.sweep_index.to_string(),
                t.sweep_value.to_string(),
                t.strategy.name().to_string(),
                t.m.to_string(),
                t.interval.lo.to_string(),
                t.interval.hi.to_string(),
                t.interval.empirical_score.to_string(),
                t.phi_hat.to_string(),
                t.phi_opt.to_string(),
                t.gap(self.score_scale).to_string(),
                t.success.to_string(),
                t.ledger.total.to_string(),
                t.ledger.mean_per_voter.to_string(),
                t.ledger.max_per_voter.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-trial world shared by every swept value.
struct TrialWorld {
    voters: Vec<VoterInterval>,
    samples: Vec<f64>,
    decomp: SegmentDecomposition,
    phi_opt: f64,
}

impl TrialWorld {
    fn new(cfg: &ExperimentConfig, trial_id: usize, pool_size: usize) -> Result<Self> {
        let voters = generate_voters(&cfg.voter_spec, &mut substream(cfg.seed, Purpose::Voters, trial_id as u64, 0))?;
        let samples =
            cfg.distribution.sample(&mut substream(cfg.seed, Purpose::Samples, trial_id as u64, 0), pool_size)?;
        let decomp = decompose(&voters)?;
        let phi_opt = true_optimum(&decomp, &cfg.distribution)?.empirical_score;
        Ok(Self { voters, samples, decomp, phi_opt })
    }

    #[allow(clippy::too_many_arguments)]
    fn evaluate(
        &self,
        cfg: &ExperimentConfig,
        trial_id: usize,
        sweep_index: usize,
        sweep_value: f64,
        strategy: Strategy,
        interval: ConsensusInterval,
        ledger: LedgerSummary,
        m: usize,
    ) -> Result<TrialResult> {
        let phi_hat = true_objective(&self.decomp, &cfg.distribution, interval.lo, interval.hi)?;
        if phi_hat > self.phi_opt + OPTIMALITY_SLACK {
            return Err(Error::Invariant(format!(
                "interval [{}, {}] scores {phi_hat} above the optimum {}",
                interval.lo, interval.hi, self.phi_opt
            )));
        }
        let n = self.voters.len();
        let mut result = TrialResult {
            trial_id,
            sweep_index,
            sweep_value,
            strategy,
            n,
            m,
            interval,
            phi_hat,
            phi_opt: self.phi_opt,
            success: false,
            ledger,
        };
        result.success = result.success_at(cfg.epsilon, cfg.score_scale);
        Ok(result)
    }
}

fn run_trial(cfg: &ExperimentConfig, trial_id: usize) -> Result<Vec<TrialResult>> {
    match &cfg.sweep {
        Sweep::SampleCounts(ms) | Sweep::BinarySearchCost(ms) => {
            let binary = matches!(cfg.sweep, Sweep::BinarySearchCost(_));
            let world = TrialWorld::new(cfg, trial_id, *ms.iter().max().expect("validated"))?;
            ms.iter()
                .enumerate()
                .map(|(i, &m)| {
                    let xs = &world.samples[..m];
                    let (scored, ledger, strategy) = if binary {
                        let (s, l) = label_binary_search(&world.voters, xs)?;
                        (s, l, Strategy::BinarySearch)
                    } else {
                        let (s, l) = label_full(&world.voters, xs)?;
                        (s, l, Strategy::Full)
                    };
                    let interval = erm_interval(&scored)?;
                    world.evaluate(cfg, trial_id, i, m as f64, strategy, interval, ledger.summary(), m)
                })
                .collect()
        }
        Sweep::VoterFractions(fs) => {
            let world = TrialWorld::new(cfg, trial_id, cfg.fraction_samples)?;
            fs.iter()
                .enumerate()
                .map(|(i, &f)| {
                    let mut rng = substream(cfg.seed, Purpose::Subsets, trial_id as u64, i as u64);
                    let (scored, ledger) =
                        label_fractional(&world.voters, &world.samples, f, cfg.subset_mode, &mut rng)?;
                    let interval = erm_interval(&scored)?;
                    let m = world.samples.len();
                    world.evaluate(cfg, trial_id, i, f, Strategy::Fractional(f), interval, ledger.summary(), m)
                })
                .collect()
        }
    }
}

fn aggregate(cfg: &ExperimentConfig, mut trials: Vec<TrialResult>) -> SweepOutcome {
    trials.sort_by_key(|t| (t.sweep_index, t.trial_id));
    let param = cfg.sweep.param_name();
    let rows = (0..cfg.sweep.len())
        .map(|i| {
            let slice: Vec<&TrialResult> = trials.iter().filter(|t| t.sweep_index == i).collect();
            let count = slice.len() as f64;
            let mean = |f: &dyn Fn(&TrialResult) -> f64| slice.iter().map(|t| f(t)).sum::<f64>() / count;
            SweepRow {
                sweep_param: param.to_string(),
                value: slice[0].sweep_value,
                trials: slice.len(),
                success_fraction: slice.iter().filter(|t| t.success).count() as f64 / count,
                mean_phi_gap: mean(&|t| t.gap(cfg.score_scale)),
                mean_queries_per_voter: mean(&|t| t.ledger.mean_per_voter),
                mean_total_queries: mean(&|t| t.ledger.total as f64),
            }
        })
        .collect();
    SweepOutcome { rows, trials, score_scale: cfg.score_scale }
}

/// Runs every trial of `cfg` and aggregates one row per swept value.
pub fn run(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let per_trial: Vec<Vec<TrialResult>> =
        pool.install(|| (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<_>>())?;
    Ok(aggregate(cfg, per_trial.into_iter().flatten().collect()))
}

fn expect_sweep(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(format!("configuration does not describe a {what} sweep")))
    }
}

pub fn run_samples_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    expect_sweep(matches!(cfg.sweep, Sweep::SampleCounts(_)), "sample-count")?;
    run(cfg)
}

pub fn run_fraction_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    expect_sweep(matches!(cfg.sweep, Sweep::VoterFractions(_)), "voter-fraction")?;
    run(cfg)
}

pub fn run_binary_search_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    expect_sweep(matches!(cfg.sweep, Sweep::BinarySearchCost(_)), "binary-search")?;
    run(cfg)
}
