//! Lawson-Hanson active-set solver for `min ||A x - b||` subject to `x >= 0`.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Absolute KKT tolerance on `A^T (b - A x)` for zero coordinates.
pub const KKT_TOL: f64 = 1e-11;

/// Solves the NNLS problem, optionally warm-started from a feasible point.
///
/// Coordinates where `warm` is positive seed the passive set.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, warm: Option<&[f64]>) -> NnlsSolution {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    if let Some(w) = warm {
        assert_eq!(w.len(), n, "warm start length");
        for (i, &wi) in w.iter().enumerate() {
            if wi > 0.0 {
                x[i] = wi;
                passive[i] = true;
            }
        }
    }

    let max_iter = 3 * n + 10;
    let mut iterations = 0;
    let mut first = warm.is_some() && passive.iter().any(|&p| p);
    loop {
        if !first {
            let grad = a.tr_mul(&(b - a * &x));
            let candidate = (0..n).filter(|&i| !passive[i]).map(|i| (i, grad[i])).fold(
                None,
                |best: Option<(usize, f64)>, (i, g)| match best {
                    Some((_, bg)) if bg >= g => best,
                    _ => Some((i, g)),
                },
            );
            match candidate {
                Some((t, g)) if g > KKT_TOL => passive[t] = true,
                _ => {
                    return NnlsSolution {
                        x,
                        converged: true,
                        iterations,
                    };
                }
            }
        }
        first = false;

        iterations += 1;
        if iterations > max_iter {
            return NnlsSolution {
                x,
                converged: false,
                iterations,
            };
        }

        // Inner loop: keep the passive least-squares solution feasible.
        loop {
            let cols: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let z = passive_lstsq(a, b, &cols);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (&c, &v) in cols.iter().zip(z.iter()) {
                    x[c] = v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&c, &v) in cols.iter().zip(z.iter()) {
                if v <= 0.0 {
                    alpha = alpha.min(x[c] / (x[c] - v));
                }
            }
            let mut next = DVector::zeros(n);
            for (&c, &v) in cols.iter().zip(z.iter()) {
                next[c] = x[c] + alpha * (v - x[c]);
            }
            x = next;
            for &c in &cols {
                if x[c] <= f64::EPSILON * 16.0 * x.amax() {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
}

/// Least-squares solution restricted to `cols`, via SVD with a relative cutoff.
fn passive_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    if cols.is_empty() {
        return DVector::zeros(0);
    }
    let sub = a.select_columns(cols);
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, smax * 1e-13)
        .expect("SVD was computed with both factors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kkt_holds(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> bool {
        let grad = a.tr_mul(&(a * x - b));
        let scale = a.tr_mul(b).amax().max(1.0);
        x.iter().zip(grad.iter()).all(|(&xi, &gi)| {
            xi >= 0.0
                && if xi == 0.0 {
                    gi >= -1e-10
                } else {
                    gi.abs() <= 1e-10 * scale
                }
        })
    }

    #[test]
    fn scalar_problem() {
        let a = DMatrix::from_element(1, 1, 1.0);
        let b = DVector::from_element(1, 1.0);
        let s = nnls(&a, &b, None);
        assert!(s.converged);
        assert!((s.x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let s = nnls(&a, &b, None);
        assert!((s.x[0] - 0.5).abs() < 1e-14 && (s.x[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn nonnegative_unconstrained_solution_is_returned() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, 0.3, 1.0, 0.5, 0.5]);
        let truth = DVector::from_vec(vec![0.7, 1.3]);
        let b = &a * &truth;
        let s = nnls(&a, &b, None);
        assert!((s.x - truth).amax() < 1e-10);
    }

    #[test]
    fn active_constraint() {
        // Unconstrained optimum has x_1 < 0.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        let s = nnls(&a, &b, None);
        assert_eq!(s.x[0], 0.0);
        assert!((s.x[1] - 2.0).abs() < 1e-15);
        assert!(kkt_holds(&a, &b, &s.x));
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let a = DMatrix::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let b = DVector::from_fn(6, |i, _| i as f64 - 2.0);
        let cold = nnls(&a, &b, None);
        let warm = nnls(&a, &b, Some(&[1.0, 0.0, 2.0, 0.5]));
        let rc = (&a * &cold.x - &b).norm();
        let rw = (&a * &warm.x - &b).norm();
        assert!((rc - rw).abs() < 1e-12);
        assert!(kkt_holds(&a, &b, &warm.x));
    }

    proptest! {
        #[test]
        fn kkt_conditions_hold(
            rows in 2usize..8,
            cols in 1usize..6,
            seed in proptest::collection::vec(-1.0f64..1.0, 64),
        ) {
            let a = DMatrix::from_fn(rows, cols, |i, j| seed[(i * cols + j) % 64]);
            let b = DVector::from_fn(rows, |i, _| seed[(63 - i) % 64]);
            let s = nnls(&a, &b, None);
            prop_assert!(s.converged);
            prop_assert!(kkt_holds(&a, &b, &s.x));
        }
    }
}
