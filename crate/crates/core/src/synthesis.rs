//! Synthetic voter populations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::VoterInterval;

/// Number of voters and the closed range their interval widths are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoterGenSpec {
    pub n: usize,
    pub w_min: f64,
    pub w_max: f64,
}

impl VoterGenSpec {
    /// The `[0.4, 0.6)` width preset.
    pub fn preset(n: usize) -> Self {
        Self { n, w_min: 0.4, w_max: 0.6 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n must be at least 1"));
        }
        if self.n > i32::MAX as usize {
            return Err(Error::config("n too large"));
        }
        if !(0.0 <= self.w_min && self.w_min <= self.w_max && self.w_max <= 1.0) {
            return Err(Error::config(format!(
                "widths must satisfy 0 <= w_min <= w_max <= 1, got [{}, {}]",
                self.w_min, self.w_max
            )));
        }
        Ok(())
    }
}

/// Interval of width `w` around `p`, shifted back inside `[0, 1]` when it
/// would stick out on either side.
pub fn place_interval(w: f64, p: f64) -> Result<VoterInterval> {
    let half = 0.5 * w;
    if p - half < 0.0 {
        VoterInterval::new(0.0, w)
    } else if p + half > 1.0 {
        VoterInterval::new(1.0 - w, 1.0)
    } else {
        VoterInterval::new(p - half, p + half)
    }
}

/// Draws `w ~ U[w_min, w_max]` then `p ~ U[0, 1]` for each voter, in that order.
pub fn generate_voters<R: Rng + ?Sized>(spec: &VoterGenSpec, rng: &mut R) -> Result<Vec<VoterInterval>> {
    spec.validate()?;
    (0..spec.n)
        .map(|_| {
            let w = rng.random_range(spec.w_min..=spec.w_max);
            let p: f64 = rng.random();
            place_interval(w, p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-15
    }

    #[test]
    fn placement_examples() {
        let v = place_interval(0.4, 0.5).unwrap();
        assert!(close(v.lo(), 0.3) && close(v.hi(), 0.7));
        let v = place_interval(0.4, 0.1).unwrap();
        assert_eq!((v.lo(), v.hi()), (0.0, 0.4));
        let v = place_interval(0.4, 0.95).unwrap();
        assert!(close(v.lo(), 0.6) && v.hi() == 1.0);
    }

    #[test]
    fn invalid_specs() {
        let mut r = rng::root(0);
        for spec in [
            VoterGenSpec { n: 0, w_min: 0.1, w_max: 0.2 },
            VoterGenSpec { n: 3, w_min: 0.5, w_max: 0.2 },
            VoterGenSpec { n: 3, w_min: -0.1, w_max: 0.2 },
            VoterGenSpec { n: 3, w_min: 0.1, w_max: 1.2 },
        ] {
            assert!(matches!(generate_voters(&spec, &mut r), Err(Error::Config(_))));
        }
    }

    #[test]
    fn width_and_containment() {
        let spec = VoterGenSpec { n: 5000, w_min: 0.05, w_max: 0.95 };
        let mut r = rng::root(11);
        let mut r2 = rng::root(11);
        let voters = generate_voters(&spec, &mut r).unwrap();
        for v in &voters {
            let w: f64 = r2.random_range(spec.w_min..=spec.w_max);
            let _: f64 = r2.random();
            assert!((v.width() - w).abs() <= 4.0 * f64::EPSILON, "{} vs {}", v.width(), w);
            assert!(0.0 <= v.lo() && v.hi() <= 1.0);
        }
    }

    #[test]
    fn centers_uniform_with_edge_atoms() {
        let spec = VoterGenSpec { n: 100_000, w_min: 0.4, w_max: 0.4 };
        let voters = generate_voters(&spec, &mut rng::root(2024)).unwrap();
        let centers: Vec<f64> = voters.iter().map(|v| 0.5 * (v.lo() + v.hi())).collect();
        let at_low = centers.iter().filter(|&&c| (c - 0.2).abs() < 1e-12).count() as f64;
        let at_high = centers.iter().filter(|&&c| (c - 0.8).abs() < 1e-12).count() as f64;
        // atoms of mass 0.2 each; 5 standard errors
        let se = (0.2 * 0.8 / 1e5_f64).sqrt() * 1e5;
        assert!((at_low - 2e4).abs() < 5.0 * se);
        assert!((at_high - 2e4).abs() < 5.0 * se);

        const BINS: usize = 10;
        let interior: Vec<f64> = centers.iter().copied().filter(|&c| c > 0.2 + 1e-12 && c < 0.8 - 1e-12).collect();
        let mut counts = [0usize; BINS];
        for c in &interior {
            let b = (((c - 0.2) / 0.6) * BINS as f64) as usize;
            counts[b.min(BINS - 1)] += 1;
        }
        let expected = interior.len() as f64 / BINS as f64;
        let chi2: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // chi-square critical value, 9 degrees of freedom, significance 0.001
        assert!(chi2 < 27.877, "chi2 = {chi2}");
    }
}
