//! Voter intervals, scenarios and the label arithmetic on the opinion space `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

/// A voter's closed approval interval `[lo, hi]` inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct VoterInterval {
    lo: f64,
    hi: f64,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: f64,
    hi: f64,
}

impl TryFrom<RawInterval> for VoterInterval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Self> {
        VoterInterval::new(raw.lo, raw.hi)
    }
}

impl VoterInterval {
    /// Degenerate single-point intervals (`lo == hi`) are allowed.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::domain(format!("voter interval [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// `+1` if the voter approves `x`, `-1` otherwise.
#[inline]
pub fn individual_label(voter: &VoterInterval, x: f64) -> i64 {
    if voter.contains(x) {
        1
    } else {
        -1
    }
}

/// Net agreement `2k - n` at `x`, where `k` of the `n` voters approve `x`.
pub fn combined_label(voters: &[VoterInterval], x: f64) -> i64 {
    let k = voters.iter().filter(|v| v.contains(x)).count() as i64;
    2 * k - voters.len() as i64
}

/// An issue position together with its combined label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: f64,
    pub label: i64,
}

impl LabeledSample {
    pub fn new(voters: &[VoterInterval], x: f64) -> Self {
        Self { x, label: combined_label(voters, x) }
    }
}

/// A hypothesis interval `[lo, hi]` with its empirical score.
///
/// When produced by ERM, `lo` and `hi` are the sorted samples at
/// `sample_index_lo` and `sample_index_hi` (0-based) and `empirical_score`
/// is the sum of the labels between them. Intervals produced by the exact
/// oracle carry the true objective in `empirical_score` and segment indices
/// in the index fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusInterval {
    pub lo: f64,
    pub hi: f64,
    pub empirical_score: f64,
    pub sample_index_lo: usize,
    pub sample_index_hi: usize,
}

/// The full synthetic world: voters, issue distribution and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario {
    voters: Vec<VoterInterval>,
    distribution: DistributionSpec,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    n: usize,
    voters: Vec<VoterInterval>,
    distribution: DistributionSpec,
    seed: u64,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        if raw.n != raw.voters.len() {
            return Err(Error::config(format!(
                "scenario declares n = {} but lists {} voters",
                raw.n,
                raw.voters.len()
            )));
        }
        Scenario::new(raw.voters, raw.distribution, raw.seed)
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> Self {
        RawScenario { n: s.voters.len(), voters: s.voters, distribution: s.distribution, seed: s.seed }
    }
}

impl Scenario {
    pub fn new(voters: Vec<VoterInterval>, distribution: DistributionSpec, seed: u64) -> Result<Self> {
        if voters.is_empty() {
            return Err(Error::config("a scenario needs at least one voter"));
        }
        if voters.len() > i32::MAX as usize {
            return Err(Error::config("too many voters"));
        }
        distribution.validate()?;
        Ok(Self { voters, distribution, seed })
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn voters(&self) -> &[VoterInterval] {
        &self.voters
    }

    pub fn distribution(&self) -> &DistributionSpec {
        &self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> VoterInterval {
        VoterInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn individual_label_is_closed_on_both_ends() {
        let v = iv(0.2, 0.8);
        assert_eq!(individual_label(&v, 0.5), 1);
        assert_eq!(individual_label(&v, 0.9), -1);
        assert_eq!(individual_label(&v, 0.2), 1);
        assert_eq!(individual_label(&v, 0.8), 1);
    }

    #[test]
    fn combined_label_counts_approvals() {
        let voters = [iv(0.0, 0.5), iv(0.25, 0.75), iv(0.4, 1.0)];
        // inside all three
        assert_eq!(combined_label(&voters, 0.45), 3);
        // inside none
        let apart = [iv(0.0, 0.1), iv(0.2, 0.3), iv(0.5, 0.6)];
        assert_eq!(combined_label(&apart, 0.9), -3);
        // inside exactly two
        assert_eq!(combined_label(&voters, 0.3), 1);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(VoterInterval::new(0.6, 0.4).is_err());
        assert!(VoterInterval::new(-0.1, 0.4).is_err());
        assert!(VoterInterval::new(0.1, 1.1).is_err());
        assert!(VoterInterval::new(f64::NAN, 0.5).is_err());
        assert!(VoterInterval::new(0.3, 0.3).is_ok());
    }

    #[test]
    fn scenario_json_round_trip() {
        let s = Scenario::new(
            vec![iv(0.1, 0.7), iv(0.123456789012345, 0.987654321098765)],
            DistributionSpec::TruncatedNormal { mu: 0.5, sigma: 0.1 },
            42,
        )
        .unwrap();
        let json = s.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["distribution"]["kind"], "truncnorm");
        assert_eq!(Scenario::from_json(&json).unwrap(), s);
    }

    #[test]
    fn scenario_json_rejects_inconsistent_n() {
        let json = r#"{"n": 3, "voters": [{"lo": 0.1, "hi": 0.2}], "distribution": {"kind": "uniform"}, "seed": 1}"#;
        assert!(Scenario::from_json(json).is_err());
        let bad = r#"{"n": 1, "voters": [{"lo": 0.5, "hi": 0.2}], "distribution": {"kind": "uniform"}, "seed": 1}"#;
        assert!(Scenario::from_json(bad).is_err());
    }
}
