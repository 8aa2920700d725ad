//! Damped Gauss-Newton update of the nodes with the weights held fixed.

use nalgebra::{DMatrix, DVector};

use super::{SolverConfig, assemble_phi, residual};
use crate::basis::OrthoBasis;
use crate::error::Result;

/// Outcome of one node update.
#[derive(Clone, Debug)]
pub struct GnStep {
    pub nodes: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub accepted: bool,
    /// Step fraction that was accepted (0 when rejected).
    pub step_fraction: f64,
}

/// `J = [G_1 ... G_M]` with `G_k = w_k dPsi/dxi (xi_k)`, shape `N x (M d)`.
pub fn stacked_jacobian(
    basis: &OrthoBasis,
    nodes: &[Vec<f64>],
    weights: &[f64],
) -> Result<DMatrix<f64>> {
    let n = basis.len();
    let d = basis.dim();
    let mut jac = DMatrix::zeros(n, nodes.len() * d);
    for (k, (x, &w)) in nodes.iter().zip(weights).enumerate() {
        if w == 0.0 {
            continue;
        }
        let g = basis.eval_jacobian(x)?;
        for (j, row) in g.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                jac[(j, k * d + i)] = w * v;
            }
        }
    }
    Ok(jac)
}

/// Minimizer of `||J s + r||^2 + lambda ||s||^2`.
fn damped_step(jac: &DMatrix<f64>, r: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let (rows, cols) = jac.shape();
    if cols > rows {
        // s = -J^T (J J^T + lambda I)^{-1} r
        let mut gram = jac * jac.transpose();
        for i in 0..rows {
            gram[(i, i)] += lambda;
        }
        let y = gram.cholesky()?.solve(r);
        Some(-jac.tr_mul(&y))
    } else {
        let mut gram = jac.tr_mul(jac);
        for i in 0..cols {
            gram[(i, i)] += lambda;
        }
        let rhs = -jac.tr_mul(r);
        Some(gram.cholesky()?.solve(&rhs))
    }
}

/// One Levenberg-damped Gauss-Newton step on the nodes with backtracking.
///
/// The step is shrunk until the residual does not increase. On failure the
/// nodes come back unchanged and `damping` is multiplied by 10; a full step
/// divides it by 10.
pub fn gauss_newton_step(
    basis: &OrthoBasis,
    nodes: &[Vec<f64>],
    weights: &[f64],
    r: &DVector<f64>,
    damping: &mut f64,
    cfg: &SolverConfig,
) -> Result<GnStep> {
    let r_norm = r.norm();
    let rejected = |damping: &mut f64| {
        *damping *= 10.0;
        GnStep {
            nodes: nodes.to_vec(),
            residual_norm: r_norm,
            accepted: false,
            step_fraction: 0.0,
        }
    };
    if r_norm == 0.0 {
        return Ok(GnStep {
            nodes: nodes.to_vec(),
            residual_norm: 0.0,
            accepted: true,
            step_fraction: 0.0,
        });
    }

    let d = basis.dim();
    let jac = stacked_jacobian(basis, nodes, weights)?;
    let Some(step) = damped_step(&jac, r, *damping) else {
        return Ok(rejected(damping));
    };
    if step.iter().any(|s| !s.is_finite()) {
        return Ok(rejected(damping));
    }

    let mut t = 1.0;
    for _ in 0..=cfg.max_gn_backtracks {
        let trial: Vec<Vec<f64>> = nodes
            .iter()
            .enumerate()
            .map(|(k, x)| {
                x.iter()
                    .enumerate()
                    .map(|(i, xi)| xi + t * step[k * d + i])
                    .collect()
            })
            .collect();
        let (_, norm) = residual(&assemble_phi(basis, &trial)?, weights);
        if norm <= r_norm {
            if t == 1.0 {
                *damping = (*damping / 10.0).max(f64::MIN_POSITIVE);
            }
            return Ok(GnStep {
                nodes: trial,
                residual_norm: norm,
                accepted: true,
                step_fraction: t,
            });
        }
        t *= cfg.line_search_shrink;
    }
    Ok(rejected(damping))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::GaussianMixture;
    use crate::quadrature::solve_weights;

    fn hermite() -> OrthoBasis {
        let gm = GaussianMixture::standard_normal(1);
        OrthoBasis::gram_schmidt(&gm.raw_moments(4).unwrap(), 2).unwrap()
    }

    #[test]
    fn zero_residual_is_a_fixed_point() {
        let b = hermite();
        let nodes = vec![vec![-1.0], vec![1.0]];
        let r = DVector::zeros(3);
        let mut lambda = 1e-6;
        let step = gauss_newton_step(
            &b,
            &nodes,
            &[0.5, 0.5],
            &r,
            &mut lambda,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(step.nodes, nodes);
    }

    #[test]
    fn zero_weight_node_does_not_move() {
        let b = hermite();
        let nodes = vec![vec![-0.8], vec![1.2], vec![3.0]];
        let w = [0.5, 0.4, 0.0];
        let jac = stacked_jacobian(&b, &nodes, &w).unwrap();
        assert!(jac.column(2).iter().all(|&v| v == 0.0));
        let (r, _) = residual(&assemble_phi(&b, &nodes).unwrap(), &w);
        let mut lambda = 1e-6;
        let step =
            gauss_newton_step(&b, &nodes, &w, &r, &mut lambda, &SolverConfig::default()).unwrap();
        assert_eq!(step.nodes[2], vec![3.0]);
    }

    #[test]
    fn residual_never_increases() {
        let b = hermite();
        let nodes = vec![vec![-2.5], vec![0.1], vec![0.4]];
        let phi = assemble_phi(&b, &nodes).unwrap();
        let w: Vec<f64> = solve_weights(&phi, None).x.iter().copied().collect();
        let (r, norm) = residual(&phi, &w);
        let mut lambda = 1e-6;
        let step =
            gauss_newton_step(&b, &nodes, &w, &r, &mut lambda, &SolverConfig::default()).unwrap();
        assert!(step.residual_norm <= norm);
    }
}
