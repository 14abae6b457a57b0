//! Issue distributions on `[0, 1]`: uniform, truncated normal and truncated
//! exponential, with exact CDFs and inverse-CDF sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_MU: f64 = 0.5;
const DEFAULT_SIGMA: f64 = 0.1;
const DEFAULT_LAMBDA: f64 = 4.0;

/// Tolerance of the truncated-normal inverse CDF, in `x`.
const INVERSE_TOL: f64 = 1e-12;

fn default_mu() -> f64 {
    DEFAULT_MU
}
fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}
fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DistributionSpec {
    #[default]
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "truncnorm")]
    TruncatedNormal {
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    #[serde(rename = "truncexp")]
    TruncatedExponential {
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

impl DistributionSpec {
    pub fn truncated_normal() -> Self {
        DistributionSpec::TruncatedNormal { mu: DEFAULT_MU, sigma: DEFAULT_SIGMA }
    }

    pub fn truncated_exponential() -> Self {
        DistributionSpec::TruncatedExponential { lambda: DEFAULT_LAMBDA }
    }

    /// Short name used in JSON and on the command line.
    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionSpec::Uniform => "uniform",
            DistributionSpec::TruncatedNormal { .. } => "truncnorm",
            DistributionSpec::TruncatedExponential { .. } => "truncexp",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Uniform => Ok(()),
            DistributionSpec::TruncatedNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::config(format!("truncnorm mu must be finite, got {mu}")));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::config(format!("truncnorm sigma must be > 0, got {sigma}")));
                }
                let p = Prepared::new(self);
                if let Prepared::Normal { mass, .. } = p {
                    if !(mass > 0.0) {
                        return Err(Error::config("truncnorm has no mass on [0, 1]"));
                    }
                }
                Ok(())
            }
            DistributionSpec::TruncatedExponential { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::config(format!("truncexp lambda must be > 0, got {lambda}")));
                }
                Ok(())
            }
        }
    }

    /// CDF on `[0, 1]`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("cdf argument {x} outside [0, 1]")));
        }
        self.validate()?;
        Ok(Prepared::new(self).cdf(x))
    }

    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!("inverse cdf argument {u} outside [0, 1]")));
        }
        self.validate()?;
        Ok(Prepared::new(self).inverse_cdf(u))
    }

    /// Probability of `[lo, hi]`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(Error::domain(format!("interval [{lo}, {hi}] has lo > hi")));
        }
        Ok((self.cdf(hi)? - self.cdf(lo)?).max(0.0))
    }

    /// `count` i.i.d. draws by inverse-CDF transform of one uniform each.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let p = Prepared::new(self);
        Ok((0..count).map(|_| p.inverse_cdf(rng.random::<f64>())).collect())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Uniform => 0.5,
            DistributionSpec::TruncatedNormal { mu, sigma } => {
                let a = -mu / sigma;
                let b = (1.0 - mu) / sigma;
                let z = std_normal_cdf(b) - std_normal_cdf(a);
                mu + sigma * (std_normal_pdf(a) - std_normal_pdf(b)) / z
            }
            DistributionSpec::TruncatedExponential { lambda } => 1.0 / lambda - (-lambda).exp() / (-(-lambda).exp_m1()),
        }
    }

    pub(crate) fn prepared(&self) -> Prepared {
        Prepared::new(self)
    }
}

/// Distribution with its normalizing constants precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Prepared {
    Uniform,
    Normal { mu: f64, sigma: f64, cdf_at_zero: f64, mass: f64 },
    Exponential { lambda: f64, mass: f64 },
}

impl Prepared {
    fn new(spec: &DistributionSpec) -> Self {
        match *spec {
            DistributionSpec::Uniform => Prepared::Uniform,
            DistributionSpec::TruncatedNormal { mu, sigma } => {
                let cdf_at_zero = std_normal_cdf(-mu / sigma);
                let mass = std_normal_cdf((1.0 - mu) / sigma) - cdf_at_zero;
                Prepared::Normal { mu, sigma, cdf_at_zero, mass }
            }
            DistributionSpec::TruncatedExponential { lambda } => {
                Prepared::Exponential { lambda, mass: -(-lambda).exp_m1() }
            }
        }
    }

    /// Caller guarantees `x` in `[0, 1]`.
    pub(crate) fn cdf(&self, x: f64) -> f64 {
        let v = match *self {
            Prepared::Uniform => x,
            Prepared::Normal { mu, sigma, cdf_at_zero, mass } => {
                (std_normal_cdf((x - mu) / sigma) - cdf_at_zero) / mass
            }
            Prepared::Exponential { lambda, mass } => -(-lambda * x).exp_m1() / mass,
        };
        v.clamp(0.0, 1.0)
    }

    fn pdf(&self, x: f64) -> f64 {
        match *self {
            Prepared::Uniform => 1.0,
            Prepared::Normal { mu, sigma, mass, .. } => std_normal_pdf((x - mu) / sigma) / (sigma * mass),
            Prepared::Exponential { lambda, mass } => lambda * (-lambda * x).exp() / mass,
        }
    }

    pub(crate) fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            Prepared::Uniform => u,
            Prepared::Exponential { lambda, mass } => (-(-u * mass).ln_1p() / lambda).clamp(0.0, 1.0),
            Prepared::Normal { .. } => self.solve_cdf(u),
        }
    }

    /// Safeguarded Newton iteration for `cdf(x) = u` on `[0, 1]`.
    fn solve_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x = 0.5;
        for _ in 0..200 {
            let f = self.cdf(x) - u;
            if f == 0.0 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= INVERSE_TOL {
                break;
            }
            let d = self.pdf(x);
            let newton = x - f / d;
            let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - x).abs() <= INVERSE_TOL * 1e-3 {
                return next;
            }
            x = next;
        }
        0.5 * (lo + hi)
    }
}
