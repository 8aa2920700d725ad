//! Optimization-based quadrature for correlated measures.
//!
//! A rule with nodes `xi_k` and weights `w_k >= 0` is sought such that
//! `sum_k Psi_j(xi_k) w_k = delta_1j` for every basis function up to order
//! `2p`, i.e. `Phi(xi) w = e_1`. The nonlinear least-squares problem is solved
//! block-wise: NNLS for the weights, a damped Gauss-Newton step for the nodes.

mod gauss_newton;
mod init;
mod nnls;
mod solver;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::OrthoBasis;
use crate::error::{Error, Result};

pub use gauss_newton::{GnStep, gauss_newton_step, stacked_jacobian};
pub use init::{cluster_complete_linkage, init_nodes};
pub use nnls::{KKT_TOL, NnlsSolution, nnls};
pub use solver::{AdaptiveOutcome, Phase, PhaseRecord, adaptive_rule, bcd_solve};

/// Tunables for the block coordinate descent and the adaptive node search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub residual_tol: f64,
    pub max_outer_iters: usize,
    /// Monte Carlo candidates for clustering; `None` means `10 * N_2p`.
    pub candidate_count: Option<usize>,
    pub seed: u64,
    pub increase_factor: f64,
    pub gn_damping: f64,
    pub line_search_shrink: f64,
    pub max_gn_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-8,
            max_outer_iters: 200,
            candidate_count: None,
            seed: 0,
            increase_factor: 1.5,
            gn_damping: 1e-6,
            line_search_shrink: 0.5,
            max_gn_backtracks: 20,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidConfig("residual_tol must be positive".into()));
        }
        if !(self.increase_factor > 1.0) {
            return Err(Error::InvalidConfig("increase_factor must exceed 1".into()));
        }
        if !(self.gn_damping > 0.0) {
            return Err(Error::InvalidConfig("gn_damping must be positive".into()));
        }
        if !(self.line_search_shrink > 0.0 && self.line_search_shrink < 1.0) {
            return Err(Error::InvalidConfig(
                "line_search_shrink must lie in (0, 1)".into(),
            ));
        }
        if self.candidate_count == Some(0) {
            return Err(Error::InvalidConfig(
                "candidate_count must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn candidates_for(&self, n_exact: usize) -> usize {
        self.candidate_count.unwrap_or(10 * n_exact)
    }
}

/// Nodes and nonnegative weights with the exactness residual they achieve.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `||Phi(xi) w - e_1||_2`.
    pub residual_norm: f64,
    /// Total order `2p` of the exactness conditions.
    pub basis_order: u32,
    pub converged: bool,
    pub seed: u64,
    /// Residual after each weight solve.
    pub history: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, Vec::len)
    }

    /// `sum_k f(xi_k) w_k`.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(x) * w)
            .sum()
    }
}

/// `Phi[j][k] = Psi_j(xi_k)`, an `N x M` matrix.
pub fn assemble_phi(basis: &OrthoBasis, nodes: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let mut phi = DMatrix::zeros(basis.len(), nodes.len());
    for (k, x) in nodes.iter().enumerate() {
        let col = basis.eval(x)?;
        phi.set_column(k, &DVector::from_vec(col));
    }
    Ok(phi)
}

/// `r = Phi w - e_1` and its Euclidean norm.
pub fn residual(phi: &DMatrix<f64>, weights: &[f64]) -> (DVector<f64>, f64) {
    assert_eq!(phi.ncols(), weights.len(), "one weight per node");
    let w = DVector::from_column_slice(weights);
    let mut r = phi * w;
    r[0] -= 1.0;
    let norm = r.norm();
    (r, norm)
}

/// Nonnegative weights minimizing `||Phi w - e_1||`.
pub fn solve_weights(phi: &DMatrix<f64>, warm: Option<&[f64]>) -> NnlsSolution {
    let mut e1 = DVector::zeros(phi.nrows());
    e1[0] = 1.0;
    nnls(phi, &e1, warm)
}

/// Residual of a rule recomputed from its nodes and weights.
pub fn rule_residual(basis: &OrthoBasis, nodes: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    Ok(residual(&assemble_phi(basis, nodes)?, weights).1)
}

/// On-disk rule description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub dim: usize,
    pub order_2p: u32,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub seed: u64,
}

impl From<&QuadratureRule> for RuleFile {
    fn from(r: &QuadratureRule) -> Self {
        RuleFile {
            dim: r.dim(),
            order_2p: r.basis_order,
            nodes: r.nodes.clone(),
            weights: r.weights.clone(),
            residual_norm: r.residual_norm,
            converged: r.converged,
            seed: r.seed,
        }
    }
}

impl TryFrom<RuleFile> for QuadratureRule {
    type Error = Error;

    fn try_from(f: RuleFile) -> Result<Self> {
        if f.nodes.len() != f.weights.len() {
            return Err(Error::Format(format!(
                "{} nodes but {} weights",
                f.nodes.len(),
                f.weights.len()
            )));
        }
        if let Some(bad) = f.nodes.iter().position(|x| x.len() != f.dim) {
            return Err(Error::Format(format!(
                "node {bad} does not have dimension {}",
                f.dim
            )));
        }
        if f.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Format("weights must be nonnegative".into()));
        }
        Ok(QuadratureRule {
            nodes: f.nodes,
            weights: f.weights,
            residual_norm: f.residual_norm,
            basis_order: f.order_2p,
            converged: f.converged,
            seed: f.seed,
            history: Vec::new(),
        })
    }
}
