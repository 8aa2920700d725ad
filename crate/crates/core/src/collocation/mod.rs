//! Projection of a black-box model onto the orthonormal basis.

pub mod benchmarks;
mod density;
mod model;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisFile, OrthoBasis};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

pub use benchmarks::Benchmark;
pub use density::{DensityEstimate, HistogramBin, kde_l1_distance, silverman_bandwidth};
pub use model::{ModelAdapter, ValueTable, evaluate_model};

/// Where a surrogate came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateMeta {
    pub model: String,
    pub samples: usize,
}

/// `y(xi) ~ sum_alpha c_alpha Psi_alpha(xi)` over a basis of order `p`.
#[derive(Clone, Debug)]
pub struct Surrogate {
    pub basis: OrthoBasis,
    pub coefficients: Vec<f64>,
    pub rule_residual: f64,
    pub meta: SurrogateMeta,
}

/// Mean, variance and standard deviation of a surrogate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
}

/// `c_alpha = sum_k y(xi_k) Psi_alpha(xi_k) w_k` for every `|alpha| <= p`.
pub fn project(
    rule: &QuadratureRule,
    basis: &OrthoBasis,
    values: &[f64],
    model: &str,
) -> Result<Surrogate> {
    if values.len() != rule.len() {
        return Err(Error::Format(format!(
            "{} values for {} quadrature nodes",
            values.len(),
            rule.len()
        )));
    }
    if rule.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: rule.dim(),
        });
    }
    if let Some(node) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            node,
            value: values[node],
        });
    }
    let mut coefficients = vec![0.0; basis.len()];
    for ((x, &w), &y) in rule.nodes.iter().zip(&rule.weights).zip(values) {
        let psi = basis.eval(x)?;
        for (c, p) in coefficients.iter_mut().zip(&psi) {
            *c += y * p * w;
        }
    }
    Ok(Surrogate {
        basis: basis.clone(),
        coefficients,
        rule_residual: rule.residual_norm,
        meta: SurrogateMeta {
            model: model.to_string(),
            samples: rule.len(),
        },
    })
}

impl Surrogate {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let psi = self.basis.eval(x)?;
        Ok(psi.iter().zip(&self.coefficients).map(|(p, c)| p * c).sum())
    }

    /// Mean is the constant coefficient; variance sums the rest squared.
    pub fn statistics(&self) -> Statistics {
        let mean = self.coefficients[0];
        let variance: f64 = self.coefficients[1..].iter().map(|c| c * c).sum();
        Statistics {
            mean,
            variance,
            std: variance.sqrt(),
        }
    }
}

/// Surrogates of a multi-output model sharing one basis and rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateFile {
    pub basis: BasisFile,
    pub labels: Vec<String>,
    pub coefficients: Vec<Vec<f64>>,
    pub rule_residual: f64,
    pub meta: SurrogateMeta,
}

impl SurrogateFile {
    pub fn from_surrogates(labels: Vec<String>, surrogates: &[Surrogate]) -> Result<Self> {
        let first = surrogates
            .first()
            .ok_or_else(|| Error::Format("no surrogate outputs".into()))?;
        if labels.len() != surrogates.len() {
            return Err(Error::Format("one label per output is required".into()));
        }
        Ok(SurrogateFile {
            basis: BasisFile::from(&first.basis),
            labels,
            coefficients: surrogates.iter().map(|s| s.coefficients.clone()).collect(),
            rule_residual: first.rule_residual,
            meta: first.meta.clone(),
        })
    }

    pub fn into_surrogates(self) -> Result<Vec<(String, Surrogate)>> {
        let basis = OrthoBasis::try_from(self.basis)?;
        if self.labels.len() != self.coefficients.len() {
            return Err(Error::Format(
                "labels and coefficient rows differ in count".into(),
            ));
        }
        self.labels
            .into_iter()
            .zip(self.coefficients)
            .map(|(label, coefficients)| {
                if coefficients.len() != basis.len() {
                    return Err(Error::Format(format!(
                        "output {label}: {} coefficients for {} basis functions",
                        coefficients.len(),
                        basis.len()
                    )));
                }
                Ok((
                    label,
                    Surrogate {
                        basis: basis.clone(),
                        coefficients,
                        rule_residual: self.rule_residual,
                        meta: self.meta.clone(),
                    },
                ))
            })
            .collect()
    }
}
