//! Gaussian-mixture model of the correlated input parameters.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::{IndexSet, MultiIndex};

const WEIGHT_SUM_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// One Gaussian component with its cached Cholesky factor.
#[derive(Clone, Debug)]
pub struct Component {
    weight: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_det: f64,
}

impl Component {
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower Cholesky factor `L` with `cov = L L^T`.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    fn log_pdf(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        let diff = DVector::from_iterator(d, x.iter().zip(self.mean.iter()).map(|(a, m)| a - m));
        let z = self
            .chol
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        -0.5 * (d as f64 * (2.0 * PI).ln() + self.log_det + z.norm_squared())
    }
}

/// Joint density `sum_k pi_k N(mu_k, Sigma_k)` of `d` correlated parameters.
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<Component>,
}

impl GaussianMixture {
    /// Validates and builds a mixture from `(weight, mean, covariance)` triples.
    pub fn new(components: Vec<(f64, Vec<f64>, Vec<Vec<f64>>)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidMixture("mixture has no components".into()))?;
        let dim = first.1.len();
        if dim == 0 {
            return Err(Error::InvalidMixture("dimension must be positive".into()));
        }

        let mut total = 0.0;
        let mut built = Vec::with_capacity(components.len());
        for (k, (weight, mean, cov)) in components.into_iter().enumerate() {
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(Error::InvalidMixture(format!(
                    "component {k}: weight {weight} must be finite and nonnegative"
                )));
            }
            if mean.len() != dim {
                return Err(Error::InvalidMixture(format!(
                    "component {k}: mean has length {}, expected {dim}",
                    mean.len()
                )));
            }
            if mean.iter().any(|m| !m.is_finite()) {
                return Err(Error::InvalidMixture(format!(
                    "component {k}: mean is not finite"
                )));
            }
            if cov.len() != dim || cov.iter().any(|row| row.len() != dim) {
                return Err(Error::InvalidMixture(format!(
                    "component {k}: covariance must be {dim}x{dim}"
                )));
            }
            let cov = DMatrix::from_fn(dim, dim, |i, j| cov[i][j]);
            if cov.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMixture(format!(
                    "component {k}: covariance is not finite"
                )));
            }
            let asym = (0..dim)
                .flat_map(|i| (0..dim).map(move |j| (i, j)))
                .map(|(i, j)| (cov[(i, j)] - cov[(j, i)]).abs())
                .fold(0.0, f64::max);
            if asym > SYMMETRY_TOL {
                return Err(Error::InvalidMixture(format!(
                    "component {k}: covariance is not symmetric (asymmetry {asym:e})"
                )));
            }
            let chol = Cholesky::<f64, Dyn>::new(cov.clone()).ok_or_else(|| {
                Error::InvalidMixture(format!(
                    "component {k}: covariance is not positive definite"
                ))
            })?;
            let l = chol.l();
            let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
            total += weight;
            built.push(Component {
                weight,
                mean: DVector::from_vec(mean),
                cov,
                chol: l,
                log_det,
            });
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMixture(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(GaussianMixture {
            dim,
            components: built,
        })
    }

    /// Single Gaussian `N(mean, cov)`.
    pub fn gaussian(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vec![(1.0, mean, cov)])
    }

    /// Standard normal in `dim` independent variables.
    pub fn standard_normal(dim: usize) -> Self {
        let cov = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::gaussian(vec![0.0; dim], cov).expect("identity covariance is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Overall mean `sum_k pi_k mu_k`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for c in &self.components {
            for (mi, ci) in m.iter_mut().zip(c.mean.iter()) {
                *mi += c.weight * ci;
            }
        }
        m
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    /// Draws `n` points: pick a component by its weight, then `mu + L z`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<f64>> {
        let mut cumulative = Vec::with_capacity(self.components.len());
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight;
            cumulative.push(acc);
        }
        let last_live = self
            .components
            .iter()
            .rposition(|c| c.weight > 0.0)
            .unwrap_or(0);

        let d = self.dim;
        let mut z = vec![0.0; d];
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let k = cumulative.iter().position(|&c| u < c).unwrap_or(last_live);
                let comp = &self.components[k];
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                (0..d)
                    .map(|i| comp.mean[i] + (0..=i).map(|j| comp.chol[(i, j)] * z[j]).sum::<f64>())
                    .collect()
            })
            .collect()
    }

    /// Mixture density at `x`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .filter(|c| c.weight > 0.0)
            .map(|c| c.weight * c.log_pdf(x).exp())
            .sum())
    }

    /// Exact raw moments `E[xi^gamma]` for all `|gamma| <= max_order`.
    ///
    /// Each Gaussian component follows
    /// `m(g + e_i) = mu_i m(g) + sum_j Sigma_ij g_j m(g - e_j)` with `m(0) = 1`.
    pub fn raw_moments(&self, max_order: u32) -> Result<MomentTable> {
        let index = IndexSet::new(self.dim, max_order);
        let n = index.len();
        let mut values = vec![0.0; n];
        let mut comp_m = vec![0.0; n];

        // Predecessor positions are independent of the component.
        let steps: Vec<Option<RecursionStep>> = index
            .indices()
            .iter()
            .map(|gamma| {
                let i = gamma.exponents().iter().position(|&e| e > 0)?;
                let g = gamma.decrement(i).expect("exponent is positive");
                let g_pos = index.position(&g).expect("lower order index present");
                let lower = (0..self.dim)
                    .filter_map(|j| {
                        let gj = g.exponents()[j];
                        let h = g.decrement(j)?;
                        Some((
                            j,
                            index.position(&h).expect("lower order index present"),
                            gj as f64,
                        ))
                    })
                    .collect();
                Some(RecursionStep { i, g_pos, lower })
            })
            .collect();

        for comp in &self.components {
            comp_m[0] = 1.0;
            for (pos, step) in steps.iter().enumerate().skip(1) {
                let step = step.as_ref().expect("nonzero index has a step");
                let mut v = comp.mean[step.i] * comp_m[step.g_pos];
                for &(j, h_pos, gj) in &step.lower {
                    v += comp.cov[(step.i, j)] * gj * comp_m[h_pos];
                }
                comp_m[pos] = v;
            }
            for (v, m) in values.iter_mut().zip(&comp_m) {
                *v += comp.weight * m;
            }
        }
        values[0] = 1.0;
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::MomentOverflow {
                gamma: index.get(bad).exponents().to_vec(),
            });
        }
        Ok(MomentTable { index, values })
    }
}

/// `gamma = g + e_i`; `lower` lists `(j, position of g - e_j, g_j)`.
struct RecursionStep {
    i: usize,
    g_pos: usize,
    lower: Vec<(usize, usize, f64)>,
}

/// Dense table of raw moments `E[xi^gamma]`, `|gamma| <= max_order`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    index: IndexSet,
    values: Vec<f64>,
}

impl MomentTable {
    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn max_order(&self) -> u32 {
        self.index.order()
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `E[xi^gamma]`, or `None` when `|gamma|` exceeds the table order.
    pub fn get(&self, gamma: &MultiIndex) -> Option<f64> {
        self.index.position(gamma).map(|p| self.values[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.index.indices().iter().zip(self.values.iter().copied())
    }
}

/// On-disk mixture description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureFile {
    pub dim: usize,
    pub components: Vec<ComponentFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl TryFrom<MixtureFile> for GaussianMixture {
    type Error = Error;

    fn try_from(file: MixtureFile) -> Result<Self> {
        let gm = GaussianMixture::new(
            file.components
                .into_iter()
                .map(|c| (c.weight, c.mean, c.cov))
                .collect(),
        )?;
        if gm.dim() != file.dim {
            return Err(Error::InvalidMixture(format!(
                "declared dim {} but components have dimension {}",
                file.dim,
                gm.dim()
            )));
        }
        Ok(gm)
    }
}

impl From<&GaussianMixture> for MixtureFile {
    fn from(gm: &GaussianMixture) -> Self {
        let d = gm.dim();
        MixtureFile {
            dim: d,
            components: gm
                .components()
                .iter()
                .map(|c| ComponentFile {
                    weight: c.weight,
                    mean: c.mean.iter().copied().collect(),
                    cov: (0..d)
                        .map(|i| (0..d).map(|j| c.cov[(i, j)]).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}
