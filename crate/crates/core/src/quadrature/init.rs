//! Initial nodes from Monte Carlo candidates grouped by complete linkage.

use kodama::{Method, linkage};

use super::SolverConfig;
use crate::distribution::GaussianMixture;
use crate::error::{Error, Result};

/// Partitions `points` into `k` complete-linkage clusters (Euclidean metric).
///
/// Returns cluster labels `0..k`, numbered by the smallest member index.
pub fn cluster_complete_linkage(points: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::TooManyClusters {
            requested: k,
            available: n,
        });
    }
    let mut condensed = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            condensed.push(d2.sqrt());
        }
    }

    // Union-find over dendrogram labels: leaves 0..n, step s creates n + s.
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    if n > 1 {
        let dendrogram = linkage(&mut condensed, n, Method::Complete);
        for (s, step) in dendrogram.steps().iter().take(n - k).enumerate() {
            let new = n + s;
            parent[step.cluster1] = new;
            parent[step.cluster2] = new;
        }
    }

    let mut labels = vec![usize::MAX; n];
    let mut root_label = std::collections::HashMap::new();
    for (i, label) in labels.iter_mut().enumerate() {
        let root = find(&mut parent, i);
        let next = root_label.len();
        *label = *root_label.entry(root).or_insert(next);
    }
    Ok(labels)
}

/// `m` initial nodes: centroids of complete-linkage clusters of seeded samples.
pub fn init_nodes(
    gm: &GaussianMixture,
    m: usize,
    n_exact: usize,
    cfg: &SolverConfig,
) -> Result<Vec<Vec<f64>>> {
    let count = cfg.candidates_for(n_exact);
    if m > count {
        return Err(Error::TooManyClusters {
            requested: m,
            available: count,
        });
    }
    let candidates = gm.sample(count, cfg.seed);
    let labels = cluster_complete_linkage(&candidates, m)?;
    let d = gm.dim();
    let mut sums = vec![vec![0.0; d]; m];
    let mut counts = vec![0usize; m];
    for (x, &l) in candidates.iter().zip(&labels) {
        counts[l] += 1;
        for (s, xi) in sums[l].iter_mut().zip(x) {
            *s += xi;
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect())
}
