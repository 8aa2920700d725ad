//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use gmcolloc_core::basis::{BasisFile, OrthoBasis};
use gmcolloc_core::collocation::{
    Benchmark, DensityEstimate, ModelAdapter, Surrogate, SurrogateFile, evaluate_model,
    kde_l1_distance, project,
};
use gmcolloc_core::distribution::{GaussianMixture, MixtureFile};
use gmcolloc_core::io::{points_csv, to_canonical_json};
use gmcolloc_core::multi_index::IndexSet;
use gmcolloc_core::pipeline::build_bases;
use gmcolloc_core::quadrature::{
    AdaptiveOutcome, QuadratureRule, RuleFile, SolverConfig, adaptive_rule, assemble_phi, residual,
    stacked_jacobian,
};

const TOL: f64 = 1e-8;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
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

/// Two correlated components with random means and covariances `A A^T + c I`.
fn random_mixture(rng: &mut ChaCha8Rng, d: usize) -> GaussianMixture {
    let mut comps = Vec::new();
    let w0: f64 = rng.random_range(0.2..0.8);
    for w in [w0, 1.0 - w0] {
        let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        let cov: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let s: f64 = (0..d).map(|k| a[i][k] * a[j][k]).sum();
                        s + if i == j { 0.2 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        comps.push((w, mean, cov));
    }
    GaussianMixture::new(comps).expect("random mixture is valid")
}

fn adaptive(gm: &GaussianMixture, p: u32, seed: u64) -> (OrthoBasis, AdaptiveOutcome) {
    let bases = build_bases(gm, p).expect("basis");
    let cfg = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    let out = adaptive_rule(&bases.exactness, gm, &cfg).expect("adaptive rule");
    (bases.surrogate, out)
}

fn gauss_hermite() -> Verdict {
    let start = Instant::now();
    let gm = GaussianMixture::standard_normal(1);
    let (_, out) = adaptive(&gm, 1, 0);
    let rule = &out.rule;
    let elapsed = start.elapsed();
    let mut order: Vec<usize> = (0..rule.len()).collect();
    order.sort_by(|&a, &b| rule.nodes[a][0].total_cmp(&rule.nodes[b][0]));
    let nodes: Vec<f64> = order.iter().map(|&k| rule.nodes[k][0]).collect();
    let weights: Vec<f64> = order.iter().map(|&k| rule.weights[k]).collect();
    let node_err = if nodes.len() == 2 {
        (nodes[0] + 1.0).abs().max((nodes[1] - 1.0).abs())
    } else {
        f64::INFINITY
    };
    let weight_err = weights.iter().map(|w| (w - 0.5).abs()).fold(0.0, f64::max);
    let pass = rule.len() == 2
        && node_err <= 1e-5
        && weight_err <= 1e-5
        && rule.residual_norm <= TOL
        && within(elapsed, 5);
    Verdict::new(
        pass,
        format!(
            "M={} nodes={nodes:?} weights={weights:?} node err {node_err:.2e} weight err \
             {weight_err:.2e} residual {:.2e} in {elapsed:.2?}",
            rule.len(),
            rule.residual_norm
        ),
    )
}

fn exactness() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_ratio: f64 = 0.0;
    let mut sizes = Vec::new();
    let mut all_ok = true;
    for d in [2usize, 4] {
        let gm = random_mixture(&mut rng, d);
        let (_, out) = adaptive(&gm, 2, 0);
        let rule = out.rule;
        all_ok &= rule.converged;
        sizes.push(format!("d={d} M={}", rule.len()));
        let moments = gm.raw_moments(4).expect("moments");
        for _ in 0..100 {
            let coeffs: Vec<f64> = (0..moments.values().len())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let exact: f64 = coeffs
                .iter()
                .zip(moments.values())
                .map(|(a, m)| a * m)
                .sum();
            let index = moments.index();
            let approx = rule.integrate(|x| {
                coeffs
                    .iter()
                    .zip(index.indices())
                    .map(|(a, g)| a * g.eval(x))
                    .sum()
            });
            let norm = coeffs.iter().map(|a| a * a).sum::<f64>().sqrt();
            let ratio = (approx - exact).abs() / (10.0 * TOL * norm);
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        all_ok && worst_ratio <= 1.0 && within(elapsed, 120),
        format!(
            "{}; worst |error| / (10 tol ||a||) = {worst_ratio:.3} over 200 polynomials in \
             {elapsed:.2?}",
            sizes.join(", ")
        ),
    )
}

fn node_count() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (bm, lo, hi) in [(Benchmark::Ro6, 30, 60), (Benchmark::Filter4, 14, 40)] {
        let start = Instant::now();
        let (_, out) = adaptive(&bm.mixture(), 2, 0);
        let elapsed = start.elapsed();
        let m = out.rule.len();
        pass &= (lo..=hi).contains(&m)
            && out.rule.converged
            && out.rule.residual_norm <= TOL
            && within(elapsed, 600);
        parts.push(format!(
            "{} d={} M={m} (range {lo}..={hi}) residual {:.2e} in {elapsed:.2?}",
            bm.name(),
            bm.dim(),
            out.rule.residual_norm
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn orthonormality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut failures = Vec::new();
    for d in 1..=6usize {
        let mut mixtures = vec![
            GaussianMixture::standard_normal(d),
            random_mixture(&mut rng, d),
        ];
        for bm in [Benchmark::Ro6, Benchmark::Filter4] {
            if bm.dim() == d {
                mixtures.push(bm.mixture());
            }
        }
        for gm in &mixtures {
            let moments = gm.raw_moments(8).expect("moments");
            for order in 1..=4 {
                count += 1;
                match OrthoBasis::gram_schmidt(&moments, order)
                    .and_then(|b| b.orthonormality_residual(&moments))
                {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => failures.push(format!("d={d} order={order}: {e}")),
                }
            }
        }
    }
    Verdict::new(
        failures.is_empty() && worst <= TOL,
        format!(
            "{count} bases, worst max|E[psi_i psi_j] - delta_ij| = {worst:.2e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(", failures: {}", failures.join("; "))
            }
        ),
    )
}

/// Sums of `x^g` and `x^(2g)` over `points` for every index in `set`.
fn monomial_sums(set: &IndexSet, points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let parent: Vec<(usize, usize)> = set
        .indices()
        .iter()
        .map(|g| match g.exponents().iter().position(|&e| e > 0) {
            Some(i) => (
                set.position(&g.decrement(i).expect("positive exponent"))
                    .expect("downward closed"),
                i,
            ),
            None => (usize::MAX, 0),
        })
        .collect();
    let n = set.len();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let mut val = vec![0.0; n];
    for x in points {
        for (j, &(p, i)) in parent.iter().enumerate() {
            val[j] = if p == usize::MAX { 1.0 } else { val[p] * x[i] };
            sum[j] += val[j];
            sum_sq[j] += val[j] * val[j];
        }
    }
    (sum, sum_sq)
}

fn moment_oracle() -> Verdict {
    const N: usize = 1_000_000;
    const CHUNKS: usize = 8;
    let mut parts = Vec::new();
    let mut pass = true;
    for (s, bm) in [Benchmark::Ro6, Benchmark::Filter4].into_iter().enumerate() {
        let gm = bm.mixture();
        let moments = gm.raw_moments(8).expect("moments");
        let set = moments.index();
        let points = gm.sample(N, 500 + s as u64);
        let partials: Vec<(Vec<f64>, Vec<f64>)> = thread::scope(|scope| {
            let handles: Vec<_> = points
                .chunks(N.div_ceil(CHUNKS))
                .map(|chunk| scope.spawn(move || monomial_sums(set, chunk)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker"))
                .collect()
        });
        let nf = N as f64;
        let mut violations = 0;
        let mut worst_z: f64 = 0.0;
        for j in 1..set.len() {
            let sum: f64 = partials.iter().map(|p| p.0[j]).sum();
            let sum_sq: f64 = partials.iter().map(|p| p.1[j]).sum();
            let mean = sum / nf;
            let var = (sum_sq / nf - mean * mean) * nf / (nf - 1.0);
            let se = (var.max(0.0) / nf).sqrt();
            let z = (moments.values()[j] - mean).abs() / se;
            worst_z = worst_z.max(z);
            if z > 3.0 {
                violations += 1;
            }
        }
        let tested = set.len() - 1;
        pass &= violations == 0;
        parts.push(format!(
            "{}: {violations}/{tested} moments beyond 3 SE (about {:.1} expected by chance), \
             worst z {worst_z:.2}",
            bm.name(),
            tested as f64 * 0.0027
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn jacobian_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(1..=4usize);
        let order = rng.random_range(2..=4u32);
        let gm = random_mixture(&mut rng, d);
        let basis = OrthoBasis::gram_schmidt(&gm.raw_moments(2 * order).expect("moments"), order)
            .expect("basis");
        let m = rng.random_range(2..=8usize);
        let nodes = gm.sample(m, rng.random());
        let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let jac = stacked_jacobian(&basis, &nodes, &weights).expect("jacobian");
        let scale = jac.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for k in 0..m {
            for i in 0..d {
                let mut plus = nodes.clone();
                let mut minus = nodes.clone();
                plus[k][i] += h;
                minus[k][i] -= h;
                let rp = residual(&assemble_phi(&basis, &plus).expect("phi"), &weights).0;
                let rm = residual(&assemble_phi(&basis, &minus).expect("phi"), &weights).0;
                for j in 0..basis.len() {
                    let fd = (rp[j] - rm[j]) / (2.0 * h);
                    worst = worst.max((fd - jac[(j, k * d + i)]).abs() / scale);
                }
            }
        }
    }
    Verdict::new(
        worst <= 1e-5,
        format!("20 configurations, worst relative error {worst:.2e}"),
    )
}

fn sample_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn surrogate_vs_mc() -> Verdict {
    const N_MC: usize = 100_000;
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for bm in [Benchmark::Ro6, Benchmark::Filter4] {
        let gm = bm.mixture();
        let (basis, out) = adaptive(&gm, 2, 0);
        let rule = out.rule;
        let values = evaluate_model(&ModelAdapter::Builtin(bm), &rule.nodes).expect("model");
        let inputs = gm.sample(N_MC, 12345);
        let truth: Vec<Vec<f64>> = inputs.iter().map(|x| bm.eval(x).expect("eval")).collect();
        let (mut mean_err, mut std_err, mut kde): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for j in 0..values.n_outputs() {
            let s = project(&rule, &basis, &values.column(j), bm.name()).expect("project");
            let st = s.statistics();
            let col: Vec<f64> = truth.iter().map(|r| r[j]).collect();
            let (m, sd) = sample_std(&col);
            mean_err = mean_err.max((st.mean - m).abs() / m.abs());
            std_err = std_err.max((st.std - sd).abs() / sd);
            let sur = s.sample_outputs(&gm, N_MC, 999).expect("surrogate samples");
            kde = kde.max(kde_l1_distance(&sur, &col, 512));
        }
        pass &= mean_err <= 0.01 && std_err <= 0.01 && kde <= 0.05;
        parts.push(format!(
            "{} ({} output{}): M={} mean err {mean_err:.2e} std err {std_err:.2e} KDE L1 \
             {kde:.4} sample ratio {:.0}x",
            bm.name(),
            values.n_outputs(),
            if values.n_outputs() == 1 {
                ""
            } else {
                "s, worst"
            },
            rule.len(),
            N_MC as f64 / rule.len() as f64
        ));
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 600);
    parts.push(format!("{elapsed:.2?}"));
    Verdict::new(pass, parts.join("; "))
}

/// Every artifact of the filter4 pipeline, serialized.
fn pipeline_bytes(seed: u64) -> Vec<(&'static str, String)> {
    let bm = Benchmark::Filter4;
    let gm = bm.mixture();
    let mixture = to_canonical_json(&MixtureFile::from(&gm)).expect("json");
    let samples = points_csv(&gm.sample(1000, seed), gm.dim(), "xi");
    let moments = to_canonical_json(&gm.raw_moments(8).expect("moments").values()).expect("json");
    let bases = build_bases(&gm, 2).expect("basis");
    let basis = to_canonical_json(&BasisFile::from(&bases.exactness)).expect("json");
    let cfg = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    let out = adaptive_rule(&bases.exactness, &gm, &cfg).expect("rule");
    let rule_json = to_canonical_json(&RuleFile::from(&out.rule)).expect("json");
    let rule: QuadratureRule = out.rule;
    let values = evaluate_model(&ModelAdapter::Builtin(bm), &rule.nodes).expect("model");
    let surrogates: Vec<Surrogate> = (0..values.n_outputs())
        .map(|j| project(&rule, &bases.surrogate, &values.column(j), bm.name()).expect("project"))
        .collect();
    let surrogate = to_canonical_json(
        &SurrogateFile::from_surrogates(values.labels.clone(), &surrogates).expect("file"),
    )
    .expect("json");
    let density: DensityEstimate = surrogates[20]
        .density_estimate(&gm, 5000, seed, 30)
        .expect("density");
    let density = to_canonical_json(&density).expect("json");
    vec![
        ("mixture", mixture),
        ("samples", samples),
        ("moments", moments),
        ("basis", basis),
        ("rule", rule_json),
        ("surrogate", surrogate),
        ("density", density),
    ]
}

fn determinism() -> Verdict {
    let a = pipeline_bytes(7);
    let b = pipeline_bytes(7);
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0)
        .collect();
    let stages: Vec<&str> = a.iter().map(|x| x.0).collect();
    Verdict::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("byte-identical: {}", stages.join(", "))
        } else {
            format!("differs: {}", differing.join(", "))
        },
    )
}

fn decrease_soundness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cases: Vec<(String, GaussianMixture, u32)> = vec![
        ("N(0,1) p=1".into(), GaussianMixture::standard_normal(1), 1),
        ("N(0,1) p=3".into(), GaussianMixture::standard_normal(1), 3),
        (
            "bimodal d=2 p=2".into(),
            GaussianMixture::new(vec![
                (0.5, vec![1.0, 0.5], toeplitz(2, 0.4, 0.5)),
                (0.5, vec![-1.0, -0.5], toeplitz(2, 0.4, -0.3)),
            ])
            .expect("mixture"),
            2,
        ),
        ("random d=3 p=2".into(), random_mixture(&mut rng, 3), 2),
        ("filter4 p=2".into(), Benchmark::Filter4.mixture(), 2),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, gm, p) in cases {
        let (_, out) = adaptive(&gm, p, 0);
        let sizes: Vec<usize> = out.accepted.iter().map(QuadratureRule::len).collect();
        let sound = out
            .accepted
            .iter()
            .all(|r| r.converged && r.residual_norm <= TOL && r.weights.iter().all(|&w| w >= 0.0));
        let decreasing = sizes.windows(2).all(|w| w[1] < w[0]);
        let minimal = sizes.iter().min() == Some(&out.rule.len());
        pass &= sound && decreasing && minimal && !sizes.is_empty();
        parts.push(format!(
            "{name}: accepted M {sizes:?} -> {}",
            out.rule.len()
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("1 Gauss-Hermite recovery", gauss_hermite),
        ("2 exactness on random polynomials", exactness),
        ("3 node-count scale", node_count),
        ("4 orthonormality", orthonormality),
        ("5 moments vs Monte Carlo", moment_oracle),
        ("6 Jacobian vs finite differences", jacobian_check),
        ("7 surrogate vs Monte Carlo", surrogate_vs_mc),
        ("8 determinism", determinism),
        ("9 decrease-phase soundness", decrease_soundness),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
