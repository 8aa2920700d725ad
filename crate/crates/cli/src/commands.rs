use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result, bail};
use serde::Serialize;

use gmcolloc_core::basis::BasisFile;
use gmcolloc_core::collocation::{
    Benchmark, DensityEstimate, ModelAdapter, Surrogate, SurrogateFile, evaluate_model, project,
};
use gmcolloc_core::distribution::{GaussianMixture, MixtureFile};
use gmcolloc_core::io::{fmt_f64, points_csv, read_json, write_json, write_text};
use gmcolloc_core::pipeline::build_bases;
use gmcolloc_core::quadrature::{QuadratureRule, RuleFile, SolverConfig, adaptive_rule};

use crate::{Common, ModelFlags, SolverFlags};

fn load_mixture(config: &str) -> Result<GaussianMixture> {
    if let Some(name) = config.strip_prefix("builtin:") {
        return Ok(Benchmark::from_name(name)?.mixture());
    }
    let file: MixtureFile = read_json(Path::new(config))?;
    GaussianMixture::try_from(file).with_context(|| format!("mixture {config}"))
}

fn prepare(common: &Common) -> Result<GaussianMixture> {
    if common.order < 1 {
        bail!("--order must be at least 1");
    }
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    load_mixture(&common.config)
}

pub fn basis(common: &Common) -> Result<()> {
    let gm = prepare(common)?;
    let bases = build_bases(&gm, common.order)?;
    write_json(
        &common.out.join("basis_p.json"),
        &BasisFile::from(&bases.surrogate),
    )?;
    write_json(
        &common.out.join("basis_2p.json"),
        &BasisFile::from(&bases.exactness),
    )?;
    eprintln!(
        "basis: d={} p={} N_p={} N_2p={} gram residual {:e}",
        gm.dim(),
        common.order,
        bases.surrogate.len(),
        bases.exactness.len(),
        bases.exactness.gram_residual()
    );
    Ok(())
}

pub fn quadrature(common: &Common, flags: &SolverFlags) -> Result<()> {
    let gm = prepare(common)?;
    let bases = build_bases(&gm, common.order)?;
    let cfg = SolverConfig {
        residual_tol: flags.tol,
        max_outer_iters: flags.max_iters,
        candidate_count: flags.candidates,
        seed: common.seed,
        increase_factor: flags.increase_factor,
        ..SolverConfig::default()
    };
    let outcome = adaptive_rule(&bases.exactness, &gm, &cfg)?;
    for r in &outcome.trace {
        eprintln!(
            "  {:?}: M={} residual {:e} converged={}",
            r.phase, r.nodes, r.residual_norm, r.converged
        );
    }
    let rule = &outcome.rule;
    write_json(&common.out.join("rule.json"), &RuleFile::from(rule))?;
    write_text(
        &common.out.join("nodes.csv"),
        &points_csv(&rule.nodes, gm.dim(), "xi"),
    )?;
    eprintln!(
        "quadrature: M={} residual {:e} (N_2p={})",
        rule.len(),
        rule.residual_norm,
        bases.exactness.len()
    );
    if !rule.converged {
        bail!("rule did not converge: residual {:e}", rule.residual_norm);
    }
    Ok(())
}

fn adapter_from(flags: &ModelFlags) -> Result<ModelAdapter> {
    if let Some(spec) = &flags.model {
        let name = spec
            .strip_prefix("builtin:")
            .with_context(|| format!("--model expects builtin:<name>, got {spec:?}"))?;
        return Ok(ModelAdapter::Builtin(Benchmark::from_name(name)?));
    }
    if let Some(values) = &flags.values {
        return Ok(ModelAdapter::BatchFile {
            nodes_out: None,
            values: values.clone(),
        });
    }
    if let Some(command) = &flags.model_cmd {
        return Ok(ModelAdapter::Subprocess {
            command: command.clone(),
        });
    }
    bail!("one of --model, --values or --model-cmd is required")
}

pub fn surrogate(common: &Common, rule_path: Option<PathBuf>, flags: &ModelFlags) -> Result<()> {
    let gm = prepare(common)?;
    let rule_path = rule_path.unwrap_or_else(|| common.out.join("rule.json"));
    let rule = QuadratureRule::try_from(read_json::<RuleFile>(&rule_path)?)?;
    if rule.dim() != gm.dim() {
        bail!("rule has dimension {}, mixture {}", rule.dim(), gm.dim());
    }
    if rule.basis_order != 2 * common.order {
        bail!(
            "rule is exact to order {}, surrogate order {} needs {}",
            rule.basis_order,
            common.order,
            2 * common.order
        );
    }
    let bases = build_bases(&gm, common.order)?;
    let adapter = adapter_from(flags)?;
    let table = evaluate_model(&adapter, &rule.nodes)?;
    let surrogates = (0..table.n_outputs())
        .map(|j| project(&rule, &bases.surrogate, &table.column(j), &adapter.name()))
        .collect::<gmcolloc_core::Result<Vec<Surrogate>>>()?;

    let file = SurrogateFile::from_surrogates(table.labels.clone(), &surrogates)?;
    write_json(&common.out.join("surrogate.json"), &file)?;

    let mut csv = String::from("output,index,exponents,total_order,coefficient,magnitude\n");
    for (label, s) in table.labels.iter().zip(&surrogates) {
        for (j, (alpha, c)) in s.basis.indices().iter().zip(&s.coefficients).enumerate() {
            let exps: Vec<String> = alpha.exponents().iter().map(u32::to_string).collect();
            let _ = writeln!(
                csv,
                "{label},{j},{},{},{},{}",
                exps.join(" "),
                alpha.total_order(),
                fmt_f64(*c),
                fmt_f64(c.abs())
            );
        }
    }
    write_text(&common.out.join("coefficients.csv"), &csv)?;
    eprintln!(
        "surrogate: {} output(s), {} coefficients each, {} model evaluations",
        surrogates.len(),
        bases.surrogate.len(),
        rule.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct OutputStats {
    label: String,
    mean: f64,
    variance: f64,
    std: f64,
    sample_mean: f64,
    sample_std: f64,
    degenerate: bool,
    bandwidth: f64,
}

#[derive(Serialize)]
struct StatsFile {
    samples: usize,
    seed: u64,
    outputs: Vec<OutputStats>,
}

pub fn stats(common: &Common, path: Option<PathBuf>, samples: usize, bins: usize) -> Result<()> {
    let gm = prepare(common)?;
    let path = path.unwrap_or_else(|| common.out.join("surrogate.json"));
    let outputs = read_json::<SurrogateFile>(&path)?.into_surrogates()?;

    let mut hist = String::from("output,left,right,mass,density\n");
    let mut kde = String::from("output,x,density\n");
    let mut rows = Vec::new();
    for (label, s) in &outputs {
        let st = s.statistics();
        let est: DensityEstimate = s.density_estimate(&gm, samples, common.seed, bins)?;
        for b in &est.histogram {
            let _ = writeln!(
                hist,
                "{label},{},{},{},{}",
                fmt_f64(b.left),
                fmt_f64(b.right),
                fmt_f64(b.mass),
                fmt_f64(b.density)
            );
        }
        for (x, p) in &est.kde {
            let _ = writeln!(kde, "{label},{},{}", fmt_f64(*x), fmt_f64(*p));
        }
        rows.push(OutputStats {
            label: label.clone(),
            mean: st.mean,
            variance: st.variance,
            std: st.std,
            sample_mean: est.mean,
            sample_std: est.std,
            degenerate: est.degenerate,
            bandwidth: est.bandwidth,
        });
    }
    write_json(
        &common.out.join("stats.json"),
        &StatsFile {
            samples,
            seed: common.seed,
            outputs: rows,
        },
    )?;
    write_text(&common.out.join("histogram.csv"), &hist)?;
    write_text(&common.out.join("kde.csv"), &kde)?;
    Ok(())
}

pub fn sample(common: &Common, n: usize) -> Result<()> {
    let gm = prepare(common)?;
    let draws = gm.sample(n, common.seed);
    write_text(
        &common.out.join("samples.csv"),
        &points_csv(&draws, gm.dim(), "xi"),
    )?;
    Ok(())
}
