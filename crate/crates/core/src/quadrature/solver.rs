//! Block coordinate descent and the adaptive node-count search.

use super::{
    QuadratureRule, SolverConfig, assemble_phi, gauss_newton_step, init_nodes, residual,
    solve_weights,
};
use crate::basis::OrthoBasis;
use crate::distribution::GaussianMixture;
use crate::error::{Error, Result};

/// Damping beyond which the node block is considered stuck.
const MAX_DAMPING: f64 = 1e12;

/// Alternates weight solves and node updates from `init_nodes`.
///
/// `init_weights` warm-starts the first weight solve; the residual history
/// is non-increasing because a fresh weight solve is only accepted when it
/// does not do worse than the previous weights on the new nodes.
pub fn bcd_solve(
    basis: &OrthoBasis,
    init_nodes: &[Vec<f64>],
    init_weights: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<QuadratureRule> {
    cfg.validate()?;
    if init_nodes.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one initial node is required".into(),
        ));
    }
    let mut nodes = init_nodes.to_vec();
    let mut weights: Option<Vec<f64>> = init_weights.map(<[f64]>::to_vec);
    let mut damping = cfg.gn_damping;
    let mut history = Vec::new();
    let mut converged = false;
    let mut best_norm = f64::INFINITY;

    for _ in 0..=cfg.max_outer_iters {
        let phi = assemble_phi(basis, &nodes)?;
        let fresh: Vec<f64> = solve_weights(&phi, weights.as_deref())
            .x
            .iter()
            .copied()
            .collect();
        let (mut r, mut norm) = residual(&phi, &fresh);
        let mut w = fresh;
        if let Some(prev) = &weights {
            let (r_prev, norm_prev) = residual(&phi, prev);
            if norm_prev <= norm {
                w = prev.clone();
                r = r_prev;
                norm = norm_prev;
            }
        }
        weights = Some(w.clone());
        best_norm = norm;
        history.push(norm);
        if norm <= cfg.residual_tol {
            converged = true;
            break;
        }
        if history.len() > cfg.max_outer_iters {
            break;
        }
        let step = gauss_newton_step(basis, &nodes, &w, &r, &mut damping, cfg)?;
        if step.accepted {
            nodes = step.nodes;
        } else if damping > MAX_DAMPING {
            break;
        }
    }

    Ok(QuadratureRule {
        nodes,
        weights: weights.expect("at least one weight solve ran"),
        residual_norm: best_norm,
        basis_order: basis.order(),
        converged,
        seed: cfg.seed,
        history,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Increase,
    Decrease,
}

/// One solve of the adaptive search.
#[derive(Clone, Debug)]
pub struct PhaseRecord {
    pub phase: Phase,
    pub nodes: usize,
    pub residual_norm: f64,
    pub converged: bool,
    /// Whether the decrease phase kept this rule.
    pub accepted: bool,
    pub min_weight: f64,
}

#[derive(Clone, Debug)]
pub struct AdaptiveOutcome {
    /// Smallest converged rule.
    pub rule: QuadratureRule,
    pub trace: Vec<PhaseRecord>,
    /// Every rule the decrease phase accepted, the increase-phase result first.
    pub accepted: Vec<QuadratureRule>,
}

fn record(phase: Phase, rule: &QuadratureRule, accepted: bool) -> PhaseRecord {
    PhaseRecord {
        phase,
        nodes: rule.len(),
        residual_norm: rule.residual_norm,
        converged: rule.converged,
        accepted,
        min_weight: rule.weights.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Grows the node count until the rule converges, then prunes the
/// minimum-weight node while the re-solved rule still converges.
pub fn adaptive_rule(
    basis: &OrthoBasis,
    gm: &GaussianMixture,
    cfg: &SolverConfig,
) -> Result<AdaptiveOutcome> {
    cfg.validate()?;
    if gm.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: gm.dim(),
        });
    }
    let n_exact = basis.len();
    let d = basis.dim();
    let limit = 10 * n_exact;
    let mut m = n_exact.div_ceil(d + 1).max(1);
    let mut trace = Vec::new();

    let mut current = loop {
        let init = init_nodes(gm, m, n_exact, cfg)?;
        let rule = bcd_solve(basis, &init, None, cfg)?;
        trace.push(record(Phase::Increase, &rule, rule.converged));
        if rule.converged {
            break rule;
        }
        let next = ((m as f64) * cfg.increase_factor).ceil() as usize;
        let next = next.max(m + 1);
        if next > limit {
            return Err(Error::IncreaseAborted {
                nodes: next,
                limit,
                residual: rule.residual_norm,
            });
        }
        m = next;
    };

    let mut accepted = vec![current.clone()];
    while current.len() > 1 {
        let drop = current.weights.iter().enumerate().fold(0, |best, (k, &w)| {
            if w < current.weights[best] { k } else { best }
        });
        let mut nodes = current.nodes.clone();
        let mut weights = current.weights.clone();
        nodes.remove(drop);
        weights.remove(drop);
        let trial = bcd_solve(basis, &nodes, Some(&weights), cfg)?;
        trace.push(record(Phase::Decrease, &trial, trial.converged));
        if !trial.converged {
            break;
        }
        accepted.push(trial.clone());
        current = trial;
    }

    Ok(AdaptiveOutcome {
        rule: current,
        trace,
        accepted,
    })
}
