//! Propagation of current fluctuations through the two scatterings: the
//! small-deviation closed forms, the current-stability limits they imply, and
//! a Monte Carlo check with the full dynamics.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::k_from_angle;
use crate::error::{Error, Result};
use crate::protocol::{run_branch, Branch, ScenarioConfig};

/// `beta = (k - 1) pi / k^(3/2)`: sensitivity of the scattering angle to a
/// relative change of `I` (or, with opposite sign, of `b`).
pub fn beta_coefficient(k: f64) -> Result<f64> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::invalid(format!("k must be >= 1, got {k}")));
    }
    Ok((k - 1.0) * PI / (k * k.sqrt()))
}

/// Path of straight segments of length `L` joining encounters with impact
/// parameter `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentedPath {
    pub length: f64,
    pub impact_parameter: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl SegmentedPath {
    /// Path whose encounters have parameters `k1` and `k2`.
    pub fn new(length: f64, impact_parameter: f64, k1: f64, k2: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!(
                "segment length must be > 0, got {length}"
            )));
        }
        if !(impact_parameter > 0.0 && impact_parameter.is_finite()) {
            return Err(Error::invalid(format!(
                "impact parameter must be > 0, got {impact_parameter}"
            )));
        }
        Ok(Self {
            length,
            impact_parameter,
            beta1: beta_coefficient(k1)?,
            beta2: beta_coefficient(k2)?,
        })
    }

    /// Quarter turn followed by a three-eighths turn.
    pub fn two_stage(length: f64, impact_parameter: f64) -> Result<Self> {
        Self::new(
            length,
            impact_parameter,
            k_from_angle(PI / 2.0),
            k_from_angle(0.75 * PI),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaTheta {
    pub total: f64,
    pub from_current: f64,
    pub from_impact: f64,
}

/// `beta (dI/I - db/b)` split into its two contributions.
pub fn delta_theta(di_rel: f64, db_rel: f64, beta: f64) -> DeltaTheta {
    let from_current = beta * di_rel;
    let from_impact = -beta * db_rel;
    DeltaTheta {
        total: from_current + from_impact,
        from_current,
        from_impact,
    }
}

/// Offset at the second encounter: `beta1 dI/I L`.
pub fn first_deviation(di_rel: f64, path: &SegmentedPath) -> f64 {
    path.beta1 * di_rel * path.length
}

/// Offset after the second encounter, keeping the dominant term:
/// `-beta1 beta2 dI/I L^2 / b`. Requires `L / b >= 100`.
pub fn second_deviation(di_rel: f64, path: &SegmentedPath) -> Result<f64> {
    let ratio = path.length / path.impact_parameter;
    if ratio < 100.0 {
        return Err(Error::invalid(format!(
            "L/b = {ratio} is below 100; the leading-order deviation is not valid"
        )));
    }
    Ok(-path.beta1 * path.beta2 * di_rel * path.length * path.length / path.impact_parameter)
}

/// Largest `|dI/I|` keeping the final offset below `target`.
pub fn current_limit(target: f64, path: &SegmentedPath) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::invalid(format!(
            "target deviation must be > 0, got {target}"
        )));
    }
    Ok(path.impact_parameter * target / (path.beta1 * path.beta2 * path.length * path.length))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub deviation: f64,
    pub current_limit: f64,
}

/// `n` log-spaced points of the tolerable `|dI/I|` against the final offset.
pub fn limit_curve(
    path: &SegmentedPath,
    deviation_range: (f64, f64),
    n: usize,
) -> Result<Vec<LimitPoint>> {
    let (lo, hi) = deviation_range;
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::invalid(
            "limit curve needs 0 < lo < hi and at least 2 points",
        ));
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let deviation = (a + (b - a) * i as f64 / (n - 1) as f64).exp();
            Ok(LimitPoint {
                deviation,
                current_limit: current_limit(deviation, path)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetDistribution {
    /// Every sample uses exactly `+relative_sigma`.
    Fixed,
    /// Uniform on `[-relative_sigma, relative_sigma]`.
    #[default]
    Uniform,
    /// Normal with standard deviation `relative_sigma`.
    Gaussian,
}

/// Static relative current offsets applied to every wire for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluctuationSpec {
    pub relative_sigma: f64,
    pub distribution: OffsetDistribution,
    pub samples: usize,
    pub seed: u64,
}

impl Default for FluctuationSpec {
    fn default() -> Self {
        Self {
            relative_sigma: 1e-6,
            distribution: OffsetDistribution::Uniform,
            samples: 64,
            seed: 0,
        }
    }
}

impl FluctuationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::invalid("samples must be >= 1"));
        }
        if !(self.relative_sigma >= 0.0 && self.relative_sigma < 1.0) {
            return Err(Error::invalid(format!(
                "relative_sigma must lie in [0, 1), got {}",
                self.relative_sigma
            )));
        }
        Ok(())
    }

    /// Offset for sample `index`; each sample draws from its own stream.
    pub fn draw(&self, index: usize) -> f64 {
        let s = self.relative_sigma;
        if s == 0.0 || self.distribution == OffsetDistribution::Fixed {
            return s;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        match self.distribution {
            OffsetDistribution::Uniform => Uniform::new_inclusive(-s, s)
                .expect("finite range")
                .sample(&mut rng),
            OffsetDistribution::Gaussian => {
                Normal::new(0.0, s).expect("finite sigma").sample(&mut rng)
            }
            OffsetDistribution::Fixed => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDeviation {
    pub index: usize,
    pub relative_offset: f64,
    /// Signed change of the terminal height (m).
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStats {
    pub fluctuation: FluctuationSpec,
    pub baseline_terminal_z: f64,
    pub mean: f64,
    pub sd: f64,
    pub mean_abs: f64,
    pub min: f64,
    pub max: f64,
    pub samples: Vec<SampleDeviation>,
}

fn terminal_z(cfg: &ScenarioConfig, i_split: f64, i_side: f64) -> Result<f64> {
    let env = cfg.environment(i_split, i_side)?;
    Ok(run_branch(cfg, &env, Branch::Right)?.end().pos.z)
}

/// Re-run the right branch with every current scaled by `1 + offset` and
/// record how far its return point on the z axis moves. Samples run in
/// parallel; results depend only on the seed.
pub fn monte_carlo_deviation(
    cfg: &ScenarioConfig,
    fluct: &FluctuationSpec,
) -> Result<MonteCarloStats> {
    cfg.validate()?;
    fluct.validate()?;
    let resolved = cfg.with_resolved_currents()?;
    let (i_split, i_side) = (
        resolved.i_split.unwrap_or(0.0),
        resolved.i_side.unwrap_or(0.0),
    );
    let baseline = terminal_z(&resolved, i_split, i_side)?;

    let samples = (0..fluct.samples)
        .into_par_iter()
        .map(|index| {
            let relative_offset = fluct.draw(index);
            let scale = 1.0 + relative_offset;
            let z = terminal_z(&resolved, i_split * scale, i_side * scale)?;
            Ok(SampleDeviation {
                index,
                relative_offset,
                deviation: z - baseline,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.deviation).sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples
            .iter()
            .map(|s| (s.deviation - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    Ok(MonteCarloStats {
        fluctuation: *fluct,
        baseline_terminal_z: baseline,
        mean,
        sd: var.sqrt(),
        mean_abs: samples.iter().map(|s| s.deviation.abs()).sum::<f64>() / n,
        min: samples
            .iter()
            .map(|s| s.deviation)
            .fold(f64::INFINITY, f64::min),
        max: samples
            .iter()
            .map(|s| s.deviation)
            .fold(f64::NEG_INFINITY, f64::max),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(
            "linear fit needs at least two paired points",
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("linear fit needs distinct x values"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
