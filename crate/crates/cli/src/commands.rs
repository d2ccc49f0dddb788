use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde_json::{json, Value};

use frustfree_core::entanglement::{entanglement_report, rank3_cascade_classify, LatticeConstants};
use frustfree_core::format::{matrix_to_pairs, pairs_to_matrix, vector_to_pairs};
use frustfree_core::generate::{cascade_instance, golden, golden_names, planted_complete, random_instance};
use frustfree_core::ground::{complete_kernel_dimension, ComponentBasis, GroundSpace};
use frustfree_core::linalg::{c64, TAU_RANK};
use frustfree_core::oracle::schmidt_rank_across;
use frustfree_core::reduction::{ReductionResult, TermLocation, TraceStep};
use frustfree_core::{
    expectation_ground_manifold, monte_carlo_scaling, reduce_to_complete, reverse_network_instance,
    variational_energy, Hamiltonian, LocalOp, Perturbation, RandomConfig,
};

use crate::io::{emit, load_model, load_model_file, load_observable, load_region, parse_lattice, rect_region, to_json};
use crate::verify::{self, expect as check_that};
use crate::{EntangleArgs, Format, GenerateArgs, Kind, Outcome, PercolateArgs};

const EXPECTATION_TOL: f64 = 1e-8;
const ENERGY_TOL: f64 = 1e-9;

fn labels(h: &Hamiltonian, sites: &[usize]) -> Vec<String> {
    sites.iter().map(|&v| h.label(v).to_string()).collect()
}

fn describe(h: &Hamiltonian, step: &TraceStep) -> String {
    let l = |v: usize| h.label(v).to_string();
    match step {
        TraceStep::Substitution(s) => format!("substitute ({}, {}) by a term on {}", l(s.a), l(s.b), l(s.vertex)),
        TraceStep::Deletion(d) => format!("delete {}", l(d.v)),
        TraceStep::Contraction(c) => format!("contract ({}, {})", l(c.u), l(c.v)),
        TraceStep::Induction(t) => format!("induce ({}, {}) through {}", l(t.a), l(t.c), l(t.b)),
        TraceStep::Accumulation(t) => format!("accumulate on ({}, {}) through {}", l(t.a), l(t.c), l(t.b)),
    }
}

fn location_labels(h: &Hamiltonian, loc: &TermLocation) -> Vec<String> {
    match *loc {
        TermLocation::Single { v } => labels(h, &[v]),
        TermLocation::Pair { a, b } => labels(h, &[a, b]),
    }
}

/// Verdict line and dimension, shared by `check` and `reduce`.
fn verdict(h: &Hamiltonian, result: &ReductionResult) -> Result<(String, Option<usize>), crate::Failure> {
    Ok(match result {
        ReductionResult::Reduced(r) => {
            let dim = complete_kernel_dimension(&r.complete)?;
            (format!("UNFRUSTRATED, dim ker = {dim}"), Some(dim))
        }
        ReductionResult::Frustrated(w) => {
            let cause = if rank3_cascade_classify(h)?.is_frustrated() {
                "rank-3 cascade".to_string()
            } else {
                format!("full-rank term on {}", location_labels(h, &w.location).join("-"))
            };
            (format!("FRUSTRATED ({cause})"), None)
        }
    })
}

fn verify_verdict(h: &Hamiltonian, dim: Option<usize>, cap: usize) -> Outcome {
    let Some(g) = verify::oracle(h, cap)? else {
        return Ok(());
    };
    let oracle_dim = g.frustration_free.then_some(g.kernel_dim);
    check_that(oracle_dim == dim, || {
        format!("pipeline dim ker {dim:?}, exact diagonalization {oracle_dim:?} (E0 = {:.3e})", g.energy)
    })
}

pub fn check(model: &Path, verify: Option<usize>) -> Outcome {
    let h = load_model(model)?;
    let result = reduce_to_complete(&h)?;
    let (line, dim) = verdict(&h, &result)?;
    println!("{line}");
    for (i, step) in result.trace().steps.iter().enumerate() {
        println!("  {:>3}. {}", i + 1, describe(&h, step));
    }
    if let ReductionResult::Frustrated(w) = &result {
        println!("  full-rank term on {}", location_labels(&h, &w.location).join("-"));
    }
    match verify {
        Some(cap) => verify_verdict(&h, dim, cap),
        None => Ok(()),
    }
}

pub fn reduce(model: &Path, output: Option<&Path>, verify: Option<usize>) -> Outcome {
    let h = load_model(model)?;
    let result = reduce_to_complete(&h)?;
    let (line, dim) = verdict(&h, &result)?;
    let body = match &result {
        ReductionResult::Reduced(r) => json!({
            "verdict": "unfrustrated",
            "summary": line,
            "kernel_dim": dim,
            "trace": r.trace,
            "complete": r.complete.to_model(),
            "outputs": labels(&h, r.network.outputs()),
            "free_inputs": labels(&h, r.network.free_inputs()),
            "iterations": r.diagnostics.iterations,
        }),
        ReductionResult::Frustrated(w) => json!({
            "verdict": "frustrated",
            "summary": line,
            "trace": w.trace,
            "witness": {
                "location": w.location,
                "vertices": location_labels(&h, &w.location),
                "hamiltonian": w.hamiltonian.to_model(),
            },
        }),
    };
    emit(output, &to_json(&body))?;
    match verify {
        Some(cap) => verify_verdict(&h, dim, cap),
        None => Ok(()),
    }
}

fn component_json(h: &Hamiltonian, c: &ComponentBasis) -> Value {
    match c {
        ComponentBasis::Product { basis, gauge } => json!({
            "kind": "product",
            "vertices": labels(h, &basis.spins),
            "gauges": gauge.as_ref().map(|g| g.gauges.iter().map(matrix_to_pairs).collect::<Vec<_>>()),
            "factors": basis
                .factors
                .iter()
                .map(|f| f.iter().map(vector_to_pairs).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        ComponentBasis::Dense { spins, vectors } => json!({
            "kind": "dense",
            "vertices": labels(h, spins),
            "vectors": vectors.iter().map(vector_to_pairs).collect::<Vec<_>>(),
        }),
    }
}

pub fn ground(model: &Path, output: Option<&Path>, verify: Option<usize>) -> Outcome {
    let h = load_model(model)?;
    let result = reduce_to_complete(&h)?;
    let r = result.reduced().ok_or(frustfree_core::Error::FrustratedInput)?;
    let space = GroundSpace::new(&r.complete)?;
    let body = json!({
        "kernel_dim": space.dim(),
        "components": space.components().iter().map(|c| component_json(&h, c)).collect::<Vec<_>>(),
        "trace": r.trace,
    });
    emit(output, &to_json(&body))?;
    eprintln!("dim ker = {}", space.dim());
    match verify {
        Some(cap) => verify_verdict(&h, Some(space.dim()), cap),
        None => Ok(()),
    }
}

pub fn expect(model: &Path, observable: &Path, verify: Option<usize>) -> Outcome {
    let h = load_model(model)?;
    let obs = load_observable(observable)?;
    let sites = obs
        .support
        .iter()
        .map(|l| h.index_of(l))
        .collect::<frustfree_core::Result<Vec<_>>>()?;
    let op = LocalOp::new(sites.clone(), pairs_to_matrix(&obs.matrix, 1 << sites.len())?)?;
    let result = reduce_to_complete(&h)?;
    let value = expectation_ground_manifold(&result, &op)?;
    println!("{}", to_json(&json!({ "support": obs.support, "expectation": value })));
    let Some(cap) = verify else { return Ok(()) };
    let Some(g) = verify::oracle(&h, cap)? else { return Ok(()) };
    let exact = g.expectation(&op);
    check_that((exact - value).abs() <= EXPECTATION_TOL, || {
        format!("pipeline {value:.12}, exact diagonalization {exact:.12}")
    })
}

fn table(h: &Hamiltonian, region: &BTreeSet<usize>, report: &Value) -> String {
    let sites: Vec<usize> = region.iter().copied().collect();
    let mut rows = vec![("region".to_string(), labels(h, &sites).join(" "))];
    for key in [
        "reduced_sizes",
        "boundary_spins",
        "boundary_edges",
        "schmidt_measure_bound",
        "area_law_bound",
        "heavy_component_bound",
    ] {
        rows.push((key.replace('_', " "), report[key].to_string()));
    }
    if report["log_law"].is_object() {
        rows.push(("log law".into(), report["log_law"]["value"].to_string()));
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn entangle(args: &EntangleArgs, verify: Option<usize>) -> Outcome {
    let h = load_model(&args.model)?;
    let region = match (&args.region, &args.rect, &args.shape) {
        (Some(path), _, _) => load_region(path, &h)?,
        (None, Some(rect), Some(shape)) => rect_region(rect, shape, &h)?,
        _ => return Err(anyhow!("give --region FILE or --rect LO:HI --shape DIMS").into()),
    };
    let constants = match args.k {
        Some(k) => LatticeConstants::user(args.exponent, k)?,
        None => LatticeConstants::enumerate(&h, args.exponent, args.cap)?,
    };
    let report = entanglement_report(&h, &region, Some(&constants))?;
    let mut value = serde_json::to_value(&report).context("serializing report")?;
    value["region_vertices"] = json!(labels(&h, &report.region));
    match args.format {
        Format::Json => println!("{}", to_json(&value)),
        Format::Table => println!("{}", table(&h, &region, &value)),
    }
    let Some(cap) = verify else { return Ok(()) };
    let Some(g) = verify::oracle(&h, cap)? else { return Ok(()) };
    let cut: Vec<usize> = region.iter().copied().collect();
    let worst = g
        .basis
        .iter()
        .map(|psi| schmidt_rank_across(psi, &g.spins, &cut, TAU_RANK))
        .max()
        .unwrap_or(1);
    check_that((worst as f64).log2() <= report.schmidt_measure_bound + 1e-12, || {
        format!(
            "ground vector with Schmidt rank {worst} exceeds the bound {}",
            report.schmidt_measure_bound
        )
    })
}

pub fn percolate(args: &PercolateArgs, verify: Option<usize>) -> Outcome {
    let report = monte_carlo_scaling(args.d, args.p, &args.sizes, args.trials, args.seed, args.periodic)?;
    let mut out: Box<dyn std::io::Write> = match &args.csv {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["L", "trial", "k", "A0", "bound"]).context("writing CSV")?;
        for r in &report.rows {
            w.write_record([
                r.l.to_string(),
                r.trial.to_string(),
                r.clusters.to_string(),
                r.largest.to_string(),
                r.bound.to_string(),
            ])
            .context("writing CSV")?;
        }
        w.flush().context("writing CSV")?;
    }
    let summary = to_json(&report);
    match &args.summary {
        Some(p) => std::fs::write(p, format!("{summary}\n")).with_context(|| format!("writing {}", p.display()))?,
        None => eprintln!("{summary}"),
    }
    if verify.is_none() {
        return Ok(());
    }
    let bad = report.rows.iter().find(|r| {
        let n = args.sizes.iter().find(|&&l| l == r.l).map_or(0, |&l| l.pow(args.d as u32)) as f64;
        r.bound < (n + 1.0).log2() - 1e-9 || r.bound > n + 1e-9
    });
    check_that(bad.is_none(), || format!("trial outside log2(n+1) ≤ bound ≤ n: {bad:?}"))
}

pub fn variational(h0: &Path, h1: &Path, lambda: f64, verify: Option<usize>) -> Outcome {
    let h = load_model(h0)?;
    let perturbation = Perturbation::from_model(&load_model_file(h1)?, &h)?;
    let result = variational_energy(&h, &perturbation, lambda)?;
    println!("{}", to_json(&result));
    let Some(cap) = verify else { return Ok(()) };
    let mut terms = h.local_terms();
    terms.extend(perturbation.terms().iter().map(|t| t.scaled(c64(lambda, 0.0))));
    let Some(e0) = verify::lowest_energy(&h, &terms, cap)? else {
        return Ok(());
    };
    check_that(result.energy >= e0 - ENERGY_TOL, || {
        format!("variational energy {} lies below the exact {e0}", result.energy)
    })
}

pub fn generate(args: &GenerateArgs, verify: Option<usize>) -> Outcome {
    let (h, advertised) = match args.kind {
        Kind::Planted => (planted_complete(args.n, args.seed), Some(args.n + 1)),
        Kind::Grown => {
            let g = reverse_network_instance(&parse_lattice(&args.lattice)?, args.count, args.seed);
            (g.hamiltonian, Some(g.kernel_dim))
        }
        Kind::Random => (
            random_instance(&parse_lattice(&args.lattice)?, &RandomConfig::default(), args.seed),
            None,
        ),
        Kind::Cascade => (cascade_instance(&parse_lattice(&args.lattice)?, args.count, args.seed), None),
        Kind::Golden => {
            let h = golden(&args.name).ok_or_else(|| {
                anyhow!("unknown example {:?}; known: {}", args.name, golden_names().join(", "))
            })?;
            (h, None)
        }
    };
    emit(args.output.as_deref(), &h.to_model().to_json())?;
    if let Some(d) = advertised {
        eprintln!("dim ker = {d}");
    }
    let Some(cap) = verify else { return Ok(()) };
    match advertised {
        Some(d) => verify_verdict(&h, (d > 0).then_some(d), cap),
        None => {
            let result = reduce_to_complete(&h)?;
            let (_, dim) = verdict(&h, &result)?;
            verify_verdict(&h, dim, cap)
        }
    }
}

pub fn oracle(model: &Path, cap: usize) -> Outcome {
    let h = load_model(model)?;
    let g = verify::oracle(&h, cap)?
        .ok_or_else(|| anyhow!("{} spins exceed the cap of {cap}", h.active().len()))?;
    let body = json!({
        "energy": g.energy,
        "kernel_dim": g.kernel_dim,
        "frustration_free": g.frustration_free,
        "norm": g.norm,
        "vertices": labels(&h, &g.spins),
    });
    println!("{}", to_json(&body));
    Ok(())
}
