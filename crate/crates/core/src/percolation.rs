//! Random lattices whose edges carry entangled or product constraints, and
//! the ground-space degeneracy bounds that follow from their entangled
//! clusters.
//!
//! Each edge draws one uniform number from a ChaCha8 stream; it is entangled
//! when that number is below `p`. Samples with the same seed are therefore
//! coupled across `p`.

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const MIN_TRIALS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomLatticeConfig {
    pub d: usize,
    pub l: usize,
    pub p: f64,
    pub seed: u64,
    #[serde(default)]
    pub periodic: bool,
}

impl RandomLatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.l < 2 || !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!(
                "need d ≥ 1, L ≥ 2 and 0 ≤ p ≤ 1 (got d={}, L={}, p={})",
                self.d, self.l, self.p
            )));
        }
        Ok(())
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::grid(&vec![self.l; self.d], self.periodic)
    }
}

/// Per-edge uniforms for one sample; stream `stream` of the seeded generator.
pub fn edge_uniforms(edges: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..edges).map(|_| rng.random::<f64>()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Labeling {
    pub lattice: Lattice,
    /// `entangled[e]` refers to `lattice.edges[e]`.
    pub entangled: Vec<bool>,
}

pub fn sample_lattice(cfg: &RandomLatticeConfig) -> Result<Labeling> {
    cfg.validate()?;
    let lattice = cfg.lattice();
    let entangled = edge_uniforms(lattice.edges.len(), cfg.seed, 0)
        .into_iter()
        .map(|u| u < cfg.p)
        .collect();
    Ok(Labeling { lattice, entangled })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterDecomposition {
    /// Cluster index per vertex; clusters are numbered by decreasing size.
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl ClusterDecomposition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] == cluster).collect()
    }
}

/// Groups `0..n` by representative, ordered by decreasing size and then by
/// smallest member.
pub fn groups(uf: UnionFind<usize>) -> Vec<Vec<usize>> {
    let labels = uf.into_labeling();
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (v, r) in labels.into_iter().enumerate() {
        by_root.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = by_root.into_values().collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

pub fn clusters(labeling: &Labeling) -> ClusterDecomposition {
    cluster_edges(labeling.lattice.n, &labeling.lattice.edges, &labeling.entangled)
}

fn cluster_edges(n: usize, edges: &[(usize, usize)], keep: &[bool]) -> ClusterDecomposition {
    let mut uf = UnionFind::new(n);
    for (&(a, b), &k) in edges.iter().zip(keep) {
        if k {
            uf.union(a, b);
        }
    }
    let groups = groups(uf);
    let mut labels = vec![0; n];
    for (c, members) in groups.iter().enumerate() {
        for &v in members {
            labels[v] = c;
        }
    }
    ClusterDecomposition {
        labels,
        sizes: groups.iter().map(Vec::len).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyEstimate {
    /// Upper bound on `log₂ dim ker`.
    pub log2_bound: f64,
    pub largest_fraction: f64,
    pub density: f64,
}

pub fn degeneracy_bound(dec: &ClusterDecomposition) -> DegeneracyEstimate {
    let n: usize = dec.sizes.iter().sum();
    DegeneracyEstimate {
        log2_bound: dec.sizes.iter().map(|&s| ((s + 1) as f64).log2()).sum(),
        largest_fraction: dec.sizes.first().map_or(0.0, |&s| s as f64 / n as f64),
        density: dec.count() as f64 / n as f64,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub l: usize,
    pub trial: usize,
    pub clusters: usize,
    pub largest: usize,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub l: usize,
    pub n: usize,
    /// Clusters per vertex.
    pub kappa: Estimate,
    /// Fraction of vertices in the largest cluster.
    pub theta: Estimate,
    /// `log₂ dim ker` bound per vertex.
    pub bound_per_spin: Estimate,
    pub bound: Estimate,
    /// Bound carried by all clusters but the largest, per vertex; the
    /// empirical counterpart of the linear term `κ_p C_p`.
    pub finite_clusters_per_spin: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub d: usize,
    pub p: f64,
    pub seed: u64,
    pub trials: usize,
    pub periodic: bool,
    pub sizes: Vec<SizeSummary>,
    /// Least-squares fit `E[bound] ≈ a·log₂ n + b·n`, when two or more sizes are given.
    pub fit: Option<(f64, f64)>,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

/// Stream index of trial `trial` on the `size_index`-th lattice.
fn stream_id(size_index: usize, trial: usize) -> u64 {
    ((size_index as u64) << 32) | trial as u64
}

pub fn run_trial(lattice: &Lattice, p: f64, seed: u64, stream: u64) -> ClusterDecomposition {
    let keep: Vec<bool> = edge_uniforms(lattice.edges.len(), seed, stream)
        .into_iter()
        .map(|u| u < p)
        .collect();
    cluster_edges(lattice.n, &lattice.edges, &keep)
}

pub fn monte_carlo_scaling(
    d: usize,
    p: f64,
    sizes: &[usize],
    trials: usize,
    seed: u64,
    periodic: bool,
) -> Result<ScalingReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InsufficientTrials {
            needed: MIN_TRIALS,
            got: trials,
        });
    }
    for &l in sizes {
        RandomLatticeConfig { d, l, p, seed, periodic }.validate()?;
    }
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (si, &l) in sizes.iter().enumerate() {
        let lattice = Lattice::grid(&vec![l; d], periodic);
        let n = lattice.n;
        let decs: Vec<ClusterDecomposition> = (0..trials)
            .into_par_iter()
            .map(|t| run_trial(&lattice, p, seed, stream_id(si, t)))
            .collect();
        let mut kappa = Vec::with_capacity(trials);
        let mut theta = Vec::with_capacity(trials);
        let mut bound = Vec::with_capacity(trials);
        let mut finite = Vec::with_capacity(trials);
        for (t, dec) in decs.iter().enumerate() {
            let est = degeneracy_bound(dec);
            finite.push((est.log2_bound - ((dec.sizes[0] + 1) as f64).log2()) / n as f64);
            kappa.push(est.density);
            theta.push(est.largest_fraction);
            bound.push(est.log2_bound);
            rows.push(TrialRow {
                l,
                trial: t,
                clusters: dec.count(),
                largest: dec.sizes[0],
                bound: est.log2_bound,
            });
        }
        let per_spin: Vec<f64> = bound.iter().map(|b| b / n as f64).collect();
        summaries.push(SizeSummary {
            l,
            n,
            kappa: Estimate::of(&kappa),
            theta: Estimate::of(&theta),
            bound_per_spin: Estimate::of(&per_spin),
            bound: Estimate::of(&bound),
            finite_clusters_per_spin: Estimate::of(&finite),
        });
    }
    let fit = fit_log_linear(&summaries);
    Ok(ScalingReport {
        d,
        p,
        seed,
        trials,
        periodic,
        sizes: summaries,
        fit,
        rows,
    })
}

fn fit_log_linear(sizes: &[SizeSummary]) -> Option<(f64, f64)> {
    if sizes.len() < 2 {
        return None;
    }
    let a = nalgebra::DMatrix::from_fn(sizes.len(), 2, |i, j| {
        let n = sizes[i].n as f64;
        if j == 0 {
            n.log2()
        } else {
            n
        }
    });
    let y = nalgebra::DVector::from_fn(sizes.len(), |i, _| sizes[i].bound.mean);
    let x = a.svd(true, true).solve(&y, 1e-12).ok()?;
    Some((x[0], x[1]))
}

/// Mean largest-cluster fraction for each `p` on one lattice, with samples
/// coupled across `p`.
pub fn largest_fraction_scan(lattice: &Lattice, ps: &[f64], trials: usize, seed: u64) -> Vec<(f64, f64)> {
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let u = edge_uniforms(lattice.edges.len(), seed, t as u64);
            ps.iter()
                .map(|&p| {
                    let keep: Vec<bool> = u.iter().map(|&x| x < p).collect();
                    let dec = cluster_edges(lattice.n, &lattice.edges, &keep);
                    dec.sizes[0] as f64 / lattice.n as f64
                })
                .collect()
        })
        .collect();
    ps.iter()
        .enumerate()
        .map(|(i, &p)| (p, per_trial.iter().map(|row| row[i]).sum::<f64>() / trials as f64))
        .collect()
}

/// `p` at the steepest rise of the largest-cluster fraction, from central
/// differences over the scan.
pub fn onset(scan: &[(f64, f64)]) -> Option<f64> {
    if scan.len() < 3 {
        return None;
    }
    (1..scan.len() - 1)
        .map(|i| {
            let slope = (scan[i + 1].1 - scan[i - 1].1) / (scan[i + 1].0 - scan[i - 1].0);
            (scan[i].0, slope)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, _)| p)
}
