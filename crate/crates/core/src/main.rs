//! Command-line front end. Data goes to stdout (or `--out`), diagnostics to stderr.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 internal invariant violation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;

use interval_consensus::bounds::{
    bound_terms, canonical_thresholds, check_pseudo_shatter, experiment_baseline, sample_complexity, BoundInputs,
};
use interval_consensus::experiment::{self, default_sample_grid, ExperimentConfig, ScoreScale, Sweep};
use interval_consensus::oracle::{decompose, true_objective, true_optimum};
use interval_consensus::queries::{label_binary_search, label_fractional, label_full, SubsetMode};
use interval_consensus::rng::{self, Purpose};
use interval_consensus::synthesis::{generate_voters, VoterGenSpec};
use interval_consensus::{erm_interval, DistributionSpec, Error, Scenario, VoterInterval};

#[derive(Parser)]
#[command(name = "interval-consensus", version, about = "Maximal-consensus interval learning on [0, 1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the ERM interval for a scenario and report its true objective.
    Erm(ErmArgs),
    /// Generate a synthetic scenario as JSON.
    Synth(SynthArgs),
    /// Print the sample-complexity bound and the experiment baseline.
    Bound(BoundArgs),
    /// Count pseudo-shattered point sets over random scenarios.
    Shatter(ShatterArgs),
    /// Run a seeded experiment sweep and write a CSV table.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Uniform,
    Truncnorm,
    Truncexp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Full,
    Fractional,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Raw,
    Normalized,
}

impl From<ScaleArg> for ScoreScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Raw => ScoreScale::Raw,
            ScaleArg::Normalized => ScoreScale::Normalized,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Figure2,
    Figure3,
    Figure4,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdMode {
    Canonical,
    Random,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    dist: Option<DistKind>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

impl DistArgs {
    fn resolve(&self) -> Result<DistributionSpec, Error> {
        let kind = self.dist.unwrap_or(DistKind::Uniform);
        let misplaced = match kind {
            DistKind::Uniform => self.mu.or(self.sigma).or(self.lambda).map(|_| "--mu/--sigma/--lambda"),
            DistKind::Truncnorm => self.lambda.map(|_| "--lambda"),
            DistKind::Truncexp => self.mu.or(self.sigma).map(|_| "--mu/--sigma"),
        };
        if let Some(flag) = misplaced {
            return Err(Error::Config(format!("{flag} does not apply to the chosen --dist")));
        }
        let spec = match kind {
            DistKind::Uniform => DistributionSpec::Uniform,
            DistKind::Truncnorm => {
                DistributionSpec::TruncatedNormal { mu: self.mu.unwrap_or(0.5), sigma: self.sigma.unwrap_or(0.1) }
            }
            DistKind::Truncexp => DistributionSpec::TruncatedExponential { lambda: self.lambda.unwrap_or(4.0) },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct ErmArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// JSON array of sample positions.
    #[arg(long, conflicts_with = "sample_count")]
    samples: Option<PathBuf>,
    /// Draw this many samples from the scenario's distribution instead.
    #[arg(long)]
    sample_count: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "full")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 1.0)]
    fraction: f64,
    #[arg(long)]
    subset_per_trial: bool,
    #[arg(long, value_enum, default_value = "normalized")]
    score_scale: ScaleArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.4)]
    wmin: f64,
    #[arg(long, default_value_t = 0.6)]
    wmax: f64,
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Accepted for interface uniformity; the bound is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShatterArgs {
    /// Size of the point sets to test (1 to 3).
    #[arg(long)]
    points: usize,
    #[arg(long, default_value_t = 1000)]
    random_trials: usize,
    #[arg(long, value_enum, default_value = "canonical")]
    thresholds: ThresholdMode,
    /// Use this scenario's voters for every trial instead of synthesizing new ones.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.4)]
    wmin: f64,
    #[arg(long, default_value_t = 0.6)]
    wmax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long)]
    wmin: Option<f64>,
    #[arg(long)]
    wmax: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample counts to sweep (comma separated); a single value for the fraction sweep.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Voter fractions to sweep (comma separated).
    #[arg(long, value_delimiter = ',')]
    fraction: Vec<f64>,
    #[arg(long)]
    subset_per_trial: bool,
    #[arg(long, value_enum)]
    score_scale: Option<ScaleArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-trial rows to `<out stem>.detail.csv`.
    #[arg(long)]
    detail: bool,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn cmd_erm(args: ErmArgs) -> Result<(), Error> {
    let scenario = Scenario::from_json(&fs::read_to_string(&args.scenario)?)?;
    let seed = args.seed.unwrap_or(scenario.seed());
    let samples: Vec<f64> = match (&args.samples, args.sample_count) {
        (Some(path), _) => serde_json::from_str(&fs::read_to_string(path)?)?,
        (None, Some(m)) => scenario.distribution().sample(&mut rng::substream(seed, Purpose::Samples, 0, 0), m)?,
        (None, None) => return Err(Error::Config("either --samples or --sample-count is required".into())),
    };
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    let voters = scenario.voters();
    let (scored, ledger) = match args.strategy {
        StrategyArg::Full => label_full(voters, &samples)?,
        StrategyArg::Binary => label_binary_search(voters, &samples)?,
        StrategyArg::Fractional => {
            let mode = if args.subset_per_trial { SubsetMode::PerTrial } else { SubsetMode::PerPoint };
            let mut rng = rng::substream(seed, Purpose::Subsets, 0, 0);
            label_fractional(voters, &samples, args.fraction, mode, &mut rng)?
        }
    };
    let interval = erm_interval(&scored)?;
    let decomp = decompose(voters)?;
    let phi = true_objective(&decomp, scenario.distribution(), interval.lo, interval.hi)?;
    let opt = true_optimum(&decomp, scenario.distribution())?;
    if phi > opt.empirical_score + 1e-9 {
        return Err(Error::Invariant(format!("ERM objective {phi} exceeds the optimum {}", opt.empirical_score)));
    }
    let scale = ScoreScale::from(args.score_scale);
    let n = scenario.n();
    emit_json(
        args.out.as_deref(),
        &json!({
            "interval": [interval.lo, interval.hi],
            "empirical_score": interval.empirical_score,
            "true_phi": scale.apply(phi, n),
            "true_opt_phi": scale.apply(opt.empirical_score, n),
            "true_opt_interval": [opt.lo, opt.hi],
            "score_scale": scale.name(),
            "m": scored.len(),
            "strategy": match args.strategy {
                StrategyArg::Full => "full",
                StrategyArg::Fractional => "fractional",
                StrategyArg::Binary => "binary",
            },
            "queries": ledger.summary(),
        }),
    )
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    let spec = VoterGenSpec { n: args.n, w_min: args.wmin, w_max: args.wmax };
    let distribution = args.dist.resolve()?;
    let voters = generate_voters(&spec, &mut rng::substream(args.seed, Purpose::Scenario, 0, 0))?;
    let scenario = Scenario::new(voters, distribution, args.seed)?;
    let mut text = scenario.to_json()?;
    text.push('\n');
    emit(args.out.as_deref(), &text)
}

fn cmd_bound(args: BoundArgs) -> Result<(), Error> {
    let inputs = BoundInputs::new(args.n, args.epsilon, args.delta)?;
    let terms = bound_terms(&inputs)?;
    emit_json(
        args.out.as_deref(),
        &json!({
            "n": args.n,
            "epsilon": args.epsilon,
            "delta": args.delta,
            "d_pd": inputs.d_pd,
            "m_theorem": sample_complexity(&inputs)?,
            "m_baseline": experiment_baseline(args.n, args.epsilon, args.delta)?,
            "terms": terms,
        }),
    )
}

fn distinct_sorted_points<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let mut pts: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[0] < w[1]) {
            return pts;
        }
    }
}

fn cmd_shatter(args: ShatterArgs) -> Result<(), Error> {
    if !(1..=3).contains(&args.points) {
        return Err(Error::Config(format!("--points must be 1, 2 or 3, got {}", args.points)));
    }
    let fixed: Option<Vec<VoterInterval>> = match &args.scenario {
        Some(path) => Some(Scenario::from_json(&fs::read_to_string(path)?)?.voters().to_vec()),
        None => None,
    };
    let spec = VoterGenSpec { n: args.n, w_min: args.wmin, w_max: args.wmax };
    let mut shattered = 0usize;
    let mut pattern_counts = vec![0usize; (1 << args.points) + 1];
    for t in 0..args.random_trials {
        let mut rng = rng::substream(args.seed, Purpose::Shatter, t as u64, 0);
        let voters = match &fixed {
            Some(v) => v.clone(),
            None => generate_voters(&spec, &mut rng)?,
        };
        let points = distinct_sorted_points(&mut rng, args.points);
        let thresholds = match args.thresholds {
            ThresholdMode::Canonical => canonical_thresholds(&voters, &points),
            ThresholdMode::Random => {
                let n = voters.len() as f64;
                (0..args.points).map(|_| rng.random_range(-n..=n)).collect()
            }
        };
        let report = check_pseudo_shatter(&voters, &points, &thresholds)?;
        if report.shattered {
            shattered += 1;
        }
        pattern_counts[report.achievable_patterns.len()] += 1;
    }
    emit_json(
        args.out.as_deref(),
        &json!({
            "points": args.points,
            "trials": args.random_trials,
            "shattered": shattered,
            "max_patterns": 1usize << args.points,
            "pattern_count_histogram": pattern_counts,
        }),
    )
}

fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Error> {
    let preset = match (args.preset, args.strategy) {
        (Some(p), None) => p,
        (None, Some(StrategyArg::Full)) | (None, None) => Preset::Figure2,
        (None, Some(StrategyArg::Fractional)) => Preset::Figure3,
        (None, Some(StrategyArg::Binary)) => Preset::Figure4,
        (Some(p), Some(s)) => {
            let implied = match s {
                StrategyArg::Full => Preset::Figure2,
                StrategyArg::Fractional => Preset::Figure3,
                StrategyArg::Binary => Preset::Figure4,
            };
            if p != implied {
                return Err(Error::Config("--strategy does not match --preset".into()));
            }
            p
        }
    };
    let mut cfg = match preset {
        Preset::Figure2 => ExperimentConfig::figure2(),
        Preset::Figure3 => ExperimentConfig::figure3(),
        Preset::Figure4 => ExperimentConfig::figure4(),
    };
    if let Some(n) = args.n {
        cfg.voter_spec.n = n;
    }
    if let Some(w) = args.wmin {
        cfg.voter_spec.w_min = w;
    }
    if let Some(w) = args.wmax {
        cfg.voter_spec.w_max = w;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(e) = args.epsilon {
        cfg.epsilon = e;
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    if let Some(s) = args.score_scale {
        cfg.score_scale = s.into();
    }
    cfg.distribution = args.dist.resolve()?;
    cfg.seed = args.seed;
    cfg.workers = args.workers;
    if args.subset_per_trial {
        cfg.subset_mode = SubsetMode::PerTrial;
    }

    let grid = || -> Result<Vec<usize>, Error> {
        if args.m.is_empty() {
            default_sample_grid(cfg.voter_spec.n.max(1), cfg.epsilon, cfg.delta)
        } else {
            Ok(args.m.clone())
        }
    };
    cfg.sweep = match preset {
        Preset::Figure2 => Sweep::SampleCounts(grid()?),
        Preset::Figure4 => Sweep::BinarySearchCost(grid()?),
        Preset::Figure3 => {
            match args.m.as_slice() {
                [] => {}
                [m] => cfg.fraction_samples = *m,
                _ => return Err(Error::Config("the fraction sweep takes a single --m".into())),
            }
            if args.fraction.is_empty() {
                cfg.sweep.clone()
            } else {
                Sweep::VoterFractions(args.fraction.clone())
            }
        }
    };
    if !args.fraction.is_empty() && preset != Preset::Figure3 {
        return Err(Error::Config("--fraction only applies to the fraction sweep".into()));
    }
    Ok(cfg)
}

fn detail_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.detail.csv"))
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Error> {
    if args.detail && args.out.is_none() {
        return Err(Error::Config("--detail needs --out to place the detail file next to".into()));
    }
    let cfg = experiment_config(&args)?;
    let started = std::time::Instant::now();
    let outcome = experiment::run(&cfg)?;
    eprintln!("{} trials x {} values finished in {:.1?}", cfg.trials, outcome.rows.len(), started.elapsed());
    let mut table = Vec::new();
    outcome.write_csv(&mut table)?;
    match &args.out {
        Some(path) => {
            fs::write(path, &table)?;
            if args.detail {
                let mut detail = Vec::new();
                outcome.write_detail_csv(&mut detail)?;
                fs::write(detail_path(path), detail)?;
            }
        }
        None => io::stdout().lock().write_all(&table)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Erm(a) => cmd_erm(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Shatter(a) => cmd_shatter(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invariant(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
