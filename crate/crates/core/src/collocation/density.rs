//! Histogram and Gaussian-kernel density estimates of surrogate outputs.

use serde::{Deserialize, Serialize};

use super::Surrogate;
use crate::distribution::GaussianMixture;
use crate::error::{Error, Result};

const KDE_POINTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    /// Fraction of samples in the bin.
    pub mass: f64,
    /// `mass / (right - left)`.
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub n_samples: usize,
    pub mean: f64,
    pub std: f64,
    /// All samples equal up to rounding; the histogram is a single bin.
    pub degenerate: bool,
    pub bandwidth: f64,
    pub histogram: Vec<HistogramBin>,
    /// `(x, density)` pairs on an even grid.
    pub kde: Vec<(f64, f64)>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Silverman's rule `0.9 min(sigma, IQR / 1.34) n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let (_, std) = mean_std(values);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    0.9 * spread * (values.len() as f64).powf(-0.2)
}

fn kde_at(values: &[f64], h: f64, x: f64) -> f64 {
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    values
        .iter()
        .map(|v| {
            let z = (x - v) / h;
            (-0.5 * z * z).exp()
        })
        .sum::<f64>()
        * norm
}

impl DensityEstimate {
    /// One bin holding all the mass, for outputs that do not vary.
    fn single_bin(n: usize, mean: f64, std: f64, lo: f64, hi: f64) -> Self {
        let half = (0.5 * (hi - lo)).max(0.5e-9 * mean.abs().max(1.0));
        let center = 0.5 * (lo + hi);
        DensityEstimate {
            n_samples: n,
            mean,
            std,
            degenerate: true,
            bandwidth: 0.0,
            histogram: vec![HistogramBin {
                left: center - half,
                right: center + half,
                mass: 1.0,
                density: 1.0 / (2.0 * half),
            }],
            kde: Vec::new(),
        }
    }

    /// Normalized histogram plus KDE of a set of output samples.
    pub fn from_values(values: &[f64], n_bins: usize) -> Result<Self> {
        if values.is_empty() || n_bins == 0 {
            return Err(Error::InvalidConfig(
                "density estimate needs samples and at least one bin".into(),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite output sample {bad}")));
        }
        let n = values.len();
        let (mean, std) = mean_std(values);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        if hi - lo <= 1e-12 * mean.abs().max(1.0) {
            return Ok(Self::single_bin(n, mean, std, lo, hi));
        }

        let width = (hi - lo) / n_bins as f64;
        let mut counts = vec![0usize; n_bins];
        for v in values {
            let b = (((v - lo) / width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
        let histogram = counts
            .iter()
            .enumerate()
            .map(|(b, &c)| {
                let mass = c as f64 / n as f64;
                HistogramBin {
                    left: lo + b as f64 * width,
                    right: if b + 1 == n_bins {
                        hi
                    } else {
                        lo + (b + 1) as f64 * width
                    },
                    mass,
                    density: mass / width,
                }
            })
            .collect();

        let bandwidth = silverman_bandwidth(values);
        let (a, b) = (lo - 3.0 * bandwidth, hi + 3.0 * bandwidth);
        let kde = (0..KDE_POINTS)
            .map(|i| {
                let x = a + (b - a) * i as f64 / (KDE_POINTS - 1) as f64;
                (x, kde_at(values, bandwidth, x))
            })
            .collect();

        Ok(DensityEstimate {
            n_samples: n,
            mean,
            std,
            degenerate: false,
            bandwidth,
            histogram,
            kde,
        })
    }
}

impl Surrogate {
    /// Samples the mixture, evaluates the surrogate, and estimates the output density.
    pub fn density_estimate(
        &self,
        gm: &GaussianMixture,
        n_samples: usize,
        seed: u64,
        n_bins: usize,
    ) -> Result<DensityEstimate> {
        if n_samples < 1000 {
            return Err(Error::InvalidConfig(
                "density estimate needs at least 1000 samples".into(),
            ));
        }
        let outputs = self.sample_outputs(gm, n_samples, seed)?;
        // Projecting a constant c through a rule with residual r leaves
        // non-constant coefficients of size at most |c| r.
        let st = self.statistics();
        if st.std <= 10.0 * self.rule_residual * st.mean.abs() {
            let (mean, std) = mean_std(&outputs);
            let lo = outputs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = outputs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Ok(DensityEstimate::single_bin(
                outputs.len(),
                mean,
                std,
                lo,
                hi,
            ));
        }
        DensityEstimate::from_values(&outputs, n_bins)
    }

    /// Surrogate values at `n` seeded mixture draws.
    pub fn sample_outputs(&self, gm: &GaussianMixture, n: usize, seed: u64) -> Result<Vec<f64>> {
        if gm.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: gm.dim(),
            });
        }
        gm.sample(n, seed)
            .iter()
            .map(|x| self.evaluate(x))
            .collect()
    }
}

/// `int |p_a - p_b|` between the Silverman KDEs of two sample sets.
pub fn kde_l1_distance(a: &[f64], b: &[f64], grid_points: usize) -> f64 {
    let (ha, hb) = (silverman_bandwidth(a), silverman_bandwidth(b));
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min) - 4.0 * ha.max(hb);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max) + 4.0 * ha.max(hb);
    let step = (hi - lo) / (grid_points - 1) as f64;
    let diff: Vec<f64> = (0..grid_points)
        .map(|i| {
            let x = lo + step * i as f64;
            (kde_at(a, ha, x) - kde_at(b, hb, x)).abs()
        })
        .collect();
    step * (diff.iter().sum::<f64>() - 0.5 * (diff[0] + diff[grid_points - 1]))
}
