//! Analytic stand-ins for the circuit and photonic simulators.
//!
//! `ro6` is a frequency-like response of a three-stage ring oscillator whose
//! six parameters are standardized threshold-voltage shifts, two per stage:
//!
//! ```text
//! t_s   = exp(0.08 xi_{2s}) + exp(0.06 xi_{2s+1}) + 0.02 xi_{2s} xi_{2s+1},  s = 0, 1, 2
//! ro6   = 3 / (t_0 + t_1 + t_2)
//! ```
//!
//! `filter4` is the power transmission of a flat-top band-pass filter whose
//! four parameters perturb the coupling waveguide lengths. It is evaluated on
//! 41 normalized detunings `f_i = (i - 20) / 10`:
//!
//! ```text
//! shift = 0.02 (xi_1 + xi_2 + xi_3 + xi_4)
//! width = 1 + 0.02 (xi_1 - xi_4) + 0.015 (xi_2 - xi_3)
//! gain  = 0.95 - 0.01 (xi_2 + xi_3)
//! T(f)  = gain / (1 + ((f - shift) / width)^4)
//! ```

use crate::distribution::GaussianMixture;
use crate::error::{Error, Result};

pub const FILTER4_POINTS: usize = 41;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Benchmark {
    Ro6,
    Filter4,
}

impl Benchmark {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "ro6" => Ok(Benchmark::Ro6),
            "filter4" => Ok(Benchmark::Filter4),
            other => Err(Error::UnknownBenchmark(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Ro6 => "ro6",
            Benchmark::Filter4 => "filter4",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Benchmark::Ro6 => 6,
            Benchmark::Filter4 => 4,
        }
    }

    /// The default input mixture shipped with this benchmark.
    pub fn mixture(self) -> GaussianMixture {
        match self {
            Benchmark::Ro6 => ro6_mixture(),
            Benchmark::Filter4 => filter4_mixture(),
        }
    }

    /// One label per model output.
    pub fn labels(self) -> Vec<String> {
        match self {
            Benchmark::Ro6 => vec!["frequency".to_string()],
            Benchmark::Filter4 => filter4_grid().iter().map(|f| format!("f={f}")).collect(),
        }
    }

    pub fn eval(self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match self {
            Benchmark::Ro6 => vec![ro6(x)],
            Benchmark::Filter4 => filter4(x),
        })
    }
}

fn toeplitz(d: usize, scale: f64, rho: f64) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| scale * rho.powi(i.abs_diff(j) as i32))
                .collect()
        })
        .collect()
}

fn equicorrelated(d: usize, scale: f64, rho: f64) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { scale } else { scale * rho })
                .collect()
        })
        .collect()
}

/// Two correlated lobes in six threshold-voltage shifts, overall mean zero.
pub fn ro6_mixture() -> GaussianMixture {
    GaussianMixture::new(vec![
        (
            0.6,
            vec![0.5, 0.4, 0.3, 0.5, 0.4, 0.3],
            toeplitz(6, 0.5, 0.6),
        ),
        (
            0.4,
            vec![-0.75, -0.6, -0.45, -0.75, -0.6, -0.45],
            equicorrelated(6, 0.4, 0.3),
        ),
    ])
    .expect("ro6 benchmark mixture is valid")
}

/// Two mirrored lobes in four waveguide-length perturbations.
pub fn filter4_mixture() -> GaussianMixture {
    let mu = vec![0.6, -0.4, 0.5, -0.3];
    let neg = mu.iter().map(|v| -v).collect();
    GaussianMixture::new(vec![
        (0.5, mu, toeplitz(4, 0.45, 0.5)),
        (0.5, neg, equicorrelated(4, 0.35, -0.2)),
    ])
    .expect("filter4 benchmark mixture is valid")
}

pub fn ro6(x: &[f64]) -> f64 {
    let total: f64 = (0..3)
        .map(|s| {
            let (a, b) = (x[2 * s], x[2 * s + 1]);
            (0.08 * a).exp() + (0.06 * b).exp() + 0.02 * a * b
        })
        .sum();
    3.0 / total
}

pub fn filter4_grid() -> Vec<f64> {
    (0..FILTER4_POINTS)
        .map(|i| (i as f64 - 20.0) / 10.0)
        .collect()
}

pub fn filter4(x: &[f64]) -> Vec<f64> {
    let shift = 0.02 * (x[0] + x[1] + x[2] + x[3]);
    let width = 1.0 + 0.02 * (x[0] - x[3]) + 0.015 * (x[1] - x[2]);
    let gain = 0.95 - 0.01 * (x[1] + x[2]);
    filter4_grid()
        .into_iter()
        .map(|f| gain / (1.0 + ((f - shift) / width).powi(4)))
        .collect()
}
