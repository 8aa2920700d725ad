//! Orthonormal polynomial basis for a correlated measure.
//!
//! Each basis function is stored by its monomial coefficients, so `Psi_j`
//! is row `j` of a lower-triangular matrix applied to the graded-lex
//! monomials. Inner products `E[f g]` are exact sums of raw moments.

use serde::{Deserialize, Serialize};

use crate::distribution::MomentTable;
use crate::error::{Error, Result};
use crate::multi_index::{IndexSet, MultiIndex};

/// Relative floor on `E[hat Psi_j^2] / E[p_j^2]` before the basis is called degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Largest accepted `max |E[Psi_i Psi_j] - delta_ij|`.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Orthonormal basis `{Psi_j}` of total order at most `order`.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    index: IndexSet,
    /// Row `j` holds `C[j, 0..=j]`.
    coeffs: Vec<Vec<f64>>,
    gram_residual: f64,
}

/// Moment Gram matrix `G[a][b] = E[p_a p_b]` over an index set.
fn moment_gram(moments: &MomentTable, index: &IndexSet) -> Vec<Vec<f64>> {
    let idx = index.indices();
    idx.iter()
        .map(|a| {
            idx.iter()
                .map(|b| moments.get(&a.add(b)).expect("moment order checked"))
                .collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `G v` for `v` supported on `0..v.len()`.
fn gram_apply(gram: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    gram.iter().map(|row| dot(&row[..v.len()], v)).collect()
}

/// `max |C G C^T - I|` for a triangular coefficient set.
fn orthonormality_residual(gram: &[Vec<f64>], coeffs: &[Vec<f64>]) -> f64 {
    let gc: Vec<Vec<f64>> = coeffs.iter().map(|c| gram_apply(gram, c)).collect();
    let mut worst: f64 = 0.0;
    for (i, ci) in coeffs.iter().enumerate() {
        for (j, gcj) in gc.iter().enumerate().take(i + 1) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(ci, &gcj[..ci.len()]) - target).abs());
        }
    }
    worst
}

impl OrthoBasis {
    /// Orthonormalizes the graded-lex monomials of order `<= order` against
    /// the moment table, by modified Gram-Schmidt with one re-orthogonalization pass.
    pub fn gram_schmidt(moments: &MomentTable, order: u32) -> Result<Self> {
        let need = 2 * order;
        if moments.max_order() < need {
            return Err(Error::MomentOrder {
                have: moments.max_order(),
                need,
            });
        }
        let index = IndexSet::new(moments.dim(), order);
        let gram = moment_gram(moments, &index);
        let n = index.len();

        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut g_coeffs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = vec![0.0; j + 1];
            v[j] = 1.0;
            for _pass in 0..2 {
                for (c, gc) in coeffs.iter().zip(&g_coeffs) {
                    let h = dot(&v, &gc[..=j]);
                    for (vk, ck) in v.iter_mut().zip(c) {
                        *vk -= h * ck;
                    }
                }
            }
            let gv = gram_apply(&gram, &v);
            let norm_sq = dot(&v, &gv[..=j]);
            if !(norm_sq > DEGENERACY_TOL * gram[j][j]) {
                return Err(Error::DegenerateBasis {
                    index: j,
                    exponents: index.get(j).exponents().to_vec(),
                    norm_sq,
                });
            }
            let scale = norm_sq.sqrt().recip();
            v.iter_mut().for_each(|x| *x *= scale);
            g_coeffs.push(gv.into_iter().map(|x| x * scale).collect());
            coeffs.push(v);
        }

        let gram_residual = orthonormality_residual(&gram, &coeffs);
        if !(gram_residual <= ORTHONORMALITY_TOL) {
            return Err(Error::NotOrthonormal {
                residual: gram_residual,
                tol: ORTHONORMALITY_TOL,
            });
        }
        Ok(OrthoBasis {
            index,
            coeffs,
            gram_residual,
        })
    }

    /// Rebuilds a basis from stored parts, checking shape and triangularity.
    pub fn from_parts(
        dim: usize,
        order: u32,
        indices: Vec<MultiIndex>,
        coeffs: Vec<Vec<f64>>,
        gram_residual: f64,
    ) -> Result<Self> {
        let index = IndexSet::new(dim, order);
        if indices.as_slice() != index.indices() {
            return Err(Error::Format(
                "basis indices are not the canonical graded-lex set".into(),
            ));
        }
        if coeffs.len() != index.len() {
            return Err(Error::Format(format!(
                "expected {} coefficient rows, found {}",
                index.len(),
                coeffs.len()
            )));
        }
        for (j, row) in coeffs.iter().enumerate() {
            if row.len() != j + 1 || !(row[j] > 0.0) || row.iter().any(|c| !c.is_finite()) {
                return Err(Error::Format(format!(
                    "coefficient row {j} is not lower-triangular with positive diagonal"
                )));
            }
        }
        Ok(OrthoBasis {
            index,
            coeffs,
            gram_residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn order(&self) -> u32 {
        self.index.order()
    }

    /// Number of basis functions `N_q = binom(d + q, d)`.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        self.index.indices()
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index
    }

    /// Lower-triangular rows: `Psi_j = sum_{i <= j} coeff_rows()[j][i] p_i`.
    pub fn coeff_rows(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// The leading functions of total order `<= order`.
    ///
    /// Gram-Schmidt only looks at earlier monomials, so this equals a fresh
    /// construction at the lower order.
    pub fn truncate(&self, order: u32) -> OrthoBasis {
        assert!(order <= self.order(), "cannot truncate upward");
        let index = IndexSet::new(self.dim(), order);
        let coeffs = self.coeffs[..index.len()].to_vec();
        OrthoBasis {
            index,
            coeffs,
            gram_residual: self.gram_residual,
        }
    }

    /// Recomputes `max |E[Psi_i Psi_j] - delta_ij|` against a moment table.
    pub fn orthonormality_residual(&self, moments: &MomentTable) -> Result<f64> {
        if moments.max_order() < 2 * self.order() {
            return Err(Error::MomentOrder {
                have: moments.max_order(),
                need: 2 * self.order(),
            });
        }
        Ok(orthonormality_residual(
            &moment_gram(moments, &self.index),
            &self.coeffs,
        ))
    }

    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let q = self.order() as usize;
        x.iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(q + 1);
                let mut acc = 1.0;
                for _ in 0..=q {
                    p.push(acc);
                    acc *= xi;
                }
                p
            })
            .collect()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Values of all graded-lex monomials at `x`.
    pub fn monomials(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let pw = self.powers(x);
        Ok(self
            .indices()
            .iter()
            .map(|a| {
                a.exponents()
                    .iter()
                    .zip(&pw)
                    .map(|(&e, p)| p[e as usize])
                    .product()
            })
            .collect())
    }

    /// `[Psi_1(x), ..., Psi_N(x)]`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mono = self.monomials(x)?;
        Ok(self.coeffs.iter().map(|row| dot(row, &mono)).collect())
    }

    /// Jacobian `J[j][i] = dPsi_j / dxi_i` at `x`, as `N` rows of length `d`.
    pub fn eval_jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        let d = self.dim();
        let pw = self.powers(x);
        // dmono[a][i] = alpha_i x^(alpha - e_i)
        let dmono: Vec<Vec<f64>> = self
            .indices()
            .iter()
            .map(|a| {
                let e = a.exponents();
                (0..d)
                    .map(|i| {
                        if e[i] == 0 {
                            return 0.0;
                        }
                        let mut v = e[i] as f64 * pw[i][e[i] as usize - 1];
                        for (l, (&el, p)) in e.iter().zip(&pw).enumerate() {
                            if l != i {
                                v *= p[el as usize];
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        Ok(self
            .coeffs
            .iter()
            .map(|row| {
                let mut g = vec![0.0; d];
                for (c, dm) in row.iter().zip(&dmono) {
                    for (gi, di) in g.iter_mut().zip(dm) {
                        *gi += c * di;
                    }
                }
                g
            })
            .collect())
    }

    /// Monomial coefficients of `sum_j a_j Psi_j`.
    pub fn to_monomial(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = coeffs.len().min(self.len());
        let mut out = vec![0.0; n];
        for (a, row) in coeffs.iter().zip(&self.coeffs) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += a * c;
            }
        }
        out
    }
}

/// `E[f]` for `f = sum_a m_a p_a` given in monomial coefficients.
pub fn expectation_of_monomials(
    moments: &MomentTable,
    index: &IndexSet,
    mono_coeffs: &[f64],
) -> Result<f64> {
    mono_coeffs
        .iter()
        .enumerate()
        .map(|(a, m)| {
            let gamma = index.get(a);
            moments.get(gamma).map(|v| m * v).ok_or(Error::MomentOrder {
                have: moments.max_order(),
                need: gamma.total_order(),
            })
        })
        .sum()
}

/// On-disk basis description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub dim: usize,
    pub order: u32,
    pub indices: Vec<MultiIndex>,
    pub coeff_matrix: Vec<Vec<f64>>,
    pub gram_residual: f64,
}

impl From<&OrthoBasis> for BasisFile {
    fn from(b: &OrthoBasis) -> Self {
        BasisFile {
            dim: b.dim(),
            order: b.order(),
            indices: b.indices().to_vec(),
            coeff_matrix: b.coeffs.clone(),
            gram_residual: b.gram_residual,
        }
    }
}

impl TryFrom<BasisFile> for OrthoBasis {
    type Error = Error;

    fn try_from(f: BasisFile) -> Result<Self> {
        OrthoBasis::from_parts(f.dim, f.order, f.indices, f.coeff_matrix, f.gram_residual)
    }
}
