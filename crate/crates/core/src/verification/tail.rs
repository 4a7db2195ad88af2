//! Monte Carlo tail probabilities with exact binomial upper limits.

use rayon::prelude::*;
use statrs::function::beta::beta_reg;

use crate::bounds::Threshold;
use crate::ensembles::{Ensemble, SeedSpec};
use crate::error::{Error, Result};
use crate::spectral::{self, Eigentuple};
use crate::tensor::DenseTensor3;

/// Random quantity whose tail is estimated. Upper-tail statistics count
/// `value >= threshold`; [`Statistic::LambdaMin`] and [`Statistic::DMin`]
/// count `value <= threshold`. Eigentuple comparisons are entrywise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    LambdaMax,
    LambdaMin,
    SpectralNorm,
    DMax,
    DMin,
    VecNorm,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::LambdaMax => "lambda_max",
            Statistic::LambdaMin => "lambda_min",
            Statistic::SpectralNorm => "norm",
            Statistic::DMax => "d_max",
            Statistic::DMin => "d_min",
            Statistic::VecNorm => "vec_norm",
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, Statistic::DMax | Statistic::DMin | Statistic::VecNorm)
    }

    pub fn is_lower_tail(&self) -> bool {
        matches!(self, Statistic::LambdaMin | Statistic::DMin)
    }

    pub fn evaluate(&self, x: &DenseTensor3) -> Result<StatValue> {
        Ok(match self {
            Statistic::LambdaMax => StatValue::Scalar(spectral::lambda_max(x)?),
            Statistic::LambdaMin => StatValue::Scalar(spectral::lambda_min(x)?),
            Statistic::SpectralNorm => StatValue::Scalar(spectral::spectral_norm(x)),
            Statistic::DMax => StatValue::Vector(spectral::d_max(x)?),
            Statistic::DMin => StatValue::Vector(spectral::d_min(x)?),
            Statistic::VecNorm => StatValue::Vector(spectral::vec_norm(x)),
        })
    }

    /// Whether `value` lies in the tail event at `threshold`.
    pub fn meets(&self, value: &StatValue, threshold: &Threshold) -> Result<bool> {
        let lower = self.is_lower_tail();
        match (value, threshold) {
            (StatValue::Scalar(v), Threshold::Scalar(t)) => Ok(if lower { v <= t } else { v >= t }),
            (StatValue::Vector(v), Threshold::Vector { b, .. }) => {
                if v.len() != b.len() {
                    return Err(Error::LengthMismatch {
                        expected: v.len(),
                        actual: b.len(),
                    });
                }
                Ok(if lower { v.dominated_by(b) } else { v.dominates(b) })
            }
            _ => Err(Error::invalid(format!(
                "statistic {} does not match a {} threshold",
                self.as_str(),
                if threshold.is_vector() { "vector" } else { "scalar" }
            ))),
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatValue {
    Scalar(f64),
    Vector(Eigentuple),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_upper: f64,
    pub alpha: f64,
}

impl TailEstimate {
    pub fn from_counts(hits: u64, trials: u64, alpha: f64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("a tail estimate needs at least one trial"));
        }
        if hits > trials {
            return Err(Error::invalid(format!("{hits} hits exceed {trials} trials")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("confidence parameter {alpha} must lie in (0, 1)")));
        }
        Ok(Self {
            trials,
            hits,
            p_hat: hits as f64 / trials as f64,
            ci_upper: clopper_pearson_upper(hits, trials, alpha),
            alpha,
        })
    }
}

/// One-sided exact upper confidence limit: the `u` with `Pr(Bin(n, u) <= k) = alpha`.
pub fn clopper_pearson_upper(hits: u64, trials: u64, alpha: f64) -> f64 {
    if hits >= trials {
        return 1.0;
    }
    let (a, b) = ((hits + 1) as f64, (trials - hits) as f64);
    // Pr(Bin(n, u) <= k) = 1 - I_u(k + 1, n - k), increasing in u through I
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (hits as f64 / trials as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            break;
        }
    }
    hi
}

/// Statistic values of `trials` independent draws; trial `i` uses stream `i` of `seed`.
pub fn sample_statistic(
    ensemble: &dyn Ensemble,
    statistic: Statistic,
    trials: u64,
    seed: SeedSpec,
) -> Result<Vec<StatValue>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng_for_trial(i);
            statistic.evaluate(&ensemble.draw(&mut rng)?)
        })
        .collect()
}

pub fn count_hits(values: &[StatValue], statistic: Statistic, threshold: &Threshold) -> Result<u64> {
    let mut hits = 0;
    for v in values {
        if statistic.meets(v, threshold)? {
            hits += 1;
        }
    }
    Ok(hits)
}

pub fn estimate_tail(
    ensemble: &dyn Ensemble,
    statistic: Statistic,
    threshold: &Threshold,
    trials: u64,
    alpha: f64,
    seed: SeedSpec,
) -> Result<TailEstimate> {
    Ok(estimate_tails(ensemble, statistic, std::slice::from_ref(threshold), trials, alpha, seed)?.remove(0))
}

/// Tail estimates at several thresholds from one shared set of draws.
pub fn estimate_tails(
    ensemble: &dyn Ensemble,
    statistic: Statistic,
    thresholds: &[Threshold],
    trials: u64,
    alpha: f64,
    seed: SeedSpec,
) -> Result<Vec<TailEstimate>> {
    if trials == 0 {
        return Err(Error::invalid("a tail estimate needs at least one trial"));
    }
    let values = sample_statistic(ensemble, statistic, trials, seed)?;
    thresholds
        .iter()
        .map(|t| TailEstimate::from_counts(count_hits(&values, statistic, t)?, trials, alpha))
        .collect()
}

/// Sample mean of `f` over `trials` draws.
pub fn estimate_mean(
    ensemble: &dyn Ensemble,
    f: impl Fn(&DenseTensor3) -> Result<f64> + Sync,
    trials: u64,
    seed: SeedSpec,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("a mean estimate needs at least one trial"));
    }
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| f(&ensemble.draw(&mut seed.rng_for_trial(i))?))
        .collect::<Result<_>>()?;
    Ok(values.iter().sum::<f64>() / trials as f64)
}
