//! Entanglement bounds for bipartitions of a frustration-free Hamiltonian.
//!
//! Reducing only the terms inside a region `A` leaves one complete homogeneous
//! Hamiltonian per component of `A`. A component left with `ñ` spins has an
//! `ñ + 1` dimensional kernel, which caps the Schmidt rank of every ground state
//! across the cut.

use std::collections::{BTreeSet, HashSet};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_naturality, Hamiltonian};
use crate::reduction::{reduce_with, Reduced, ReductionOptions, ReductionResult};

/// Largest connected subset examined when fitting lattice constants.
pub const DEFAULT_ENUMERATION_CAP: usize = 6;

/// A bipartition `(A, B)` with respect to the interaction graph of a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct Bipartition {
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
    pub boundary_edges: Vec<(usize, usize)>,
    /// Connected components of `A` under the terms of the Hamiltonian.
    pub components: Vec<Vec<usize>>,
}

impl Bipartition {
    pub fn new(h: &Hamiltonian, a: &BTreeSet<usize>) -> Result<Self> {
        let active = h.active();
        if a.is_empty() {
            return Err(Error::InvalidRegion("region is empty".into()));
        }
        if let Some(v) = a.iter().find(|v| !active.contains(v)) {
            return Err(Error::InvalidRegion(format!("vertex {v} is not an active spin")));
        }
        if a.len() == active.len() {
            return Err(Error::InvalidRegion("region covers every spin".into()));
        }
        let b = active.difference(a).copied().collect();
        let boundary_edges = h
            .edges()
            .into_iter()
            .filter(|(x, y)| a.contains(x) != a.contains(y))
            .collect();
        let components = h.restricted_to(a).components();
        Ok(Self {
            a: a.clone(),
            b,
            boundary_edges,
            components,
        })
    }

    /// Spins of `set` with a neighbour in `B`.
    pub fn boundary_spins_of(&self, set: &[usize]) -> usize {
        let set: BTreeSet<usize> = set.iter().copied().collect();
        self.boundary_edges
            .iter()
            .flat_map(|&(x, y)| [x, y])
            .filter(|v| set.contains(v))
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn boundary_spins(&self) -> usize {
        self.boundary_spins_of(&self.a.iter().copied().collect::<Vec<_>>())
    }
}

/// One component of `A` after the reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedComponent {
    /// Component of `A` before the reduction.
    pub original: Vec<usize>,
    /// Spins remaining per connected piece of the reduced component.
    pub pieces: Vec<Vec<usize>>,
    /// Boundary spins of the original component.
    pub boundary_spins: usize,
}

impl ReducedComponent {
    pub fn reduced_size(&self) -> usize {
        self.pieces.iter().map(Vec::len).sum()
    }

    /// `Σ log₂(ñ + 1)` over the pieces.
    pub fn schmidt_bound(&self) -> f64 {
        self.pieces.iter().map(|p| ((p.len() + 1) as f64).log2()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SubsystemReduction {
    pub bipartition: Bipartition,
    pub reduced: Reduced,
    pub components: Vec<ReducedComponent>,
}

impl SubsystemReduction {
    /// Sizes `ñ_j` of the complete pieces left inside `A`.
    pub fn reduced_sizes(&self) -> Vec<usize> {
        self.components
            .iter()
            .flat_map(|c| c.pieces.iter().map(Vec::len))
            .collect()
    }

    pub fn schmidt_measure_bound(&self) -> f64 {
        self.components.iter().map(ReducedComponent::schmidt_bound).sum()
    }
}

/// Reduces the terms acting inside `a` and leaves every other term in place.
pub fn reduce_subsystem(h: &Hamiltonian, a: &BTreeSet<usize>) -> Result<SubsystemReduction> {
    let bipartition = Bipartition::new(h, a)?;
    for t in h.restricted_to(a).two_spin_terms() {
        if t.rank() < 4 && !classify_naturality(&t)?.natural {
            return Err(Error::NotNatural(t.a, t.b));
        }
    }
    let opts = ReductionOptions {
        scope: Some(a.clone()),
        ..ReductionOptions::default()
    };
    let reduced = match reduce_with(h, &opts)? {
        ReductionResult::Frustrated(_) => return Err(Error::FrustratedSubsystem),
        ReductionResult::Reduced(r) => r,
    };
    let remaining: BTreeSet<usize> = reduced.complete.active().intersection(a).copied().collect();
    let inside = reduced.complete.restricted_to(&remaining).components();
    let components = bipartition
        .components
        .iter()
        .map(|original| {
            let members: BTreeSet<usize> = original.iter().copied().collect();
            ReducedComponent {
                original: original.clone(),
                pieces: inside
                    .iter()
                    .filter(|p| members.contains(&p[0]))
                    .cloned()
                    .collect(),
                boundary_spins: bipartition.boundary_spins_of(original),
            }
        })
        .collect();
    Ok(SubsystemReduction {
        bipartition,
        reduced,
        components,
    })
}

/// Upper bound in e-bits on the entanglement of any ground state across `(A, B)`.
pub fn schmidt_measure_bound(h: &Hamiltonian, a: &BTreeSet<usize>) -> Result<f64> {
    Ok(reduce_subsystem(h, a)?.schmidt_measure_bound())
}

/// Isoperimetric constants with `α ≥ K·n^c` for connected regions of `n` spins
/// with `α` boundary spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConstants {
    pub c: f64,
    pub k: f64,
    pub source: ConstantSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    /// Smallest ratio over connected regions of at most `cap` spins.
    Enumerated { cap: usize },
    User,
}

impl LatticeConstants {
    pub fn user(c: f64, k: f64) -> Result<Self> {
        if c.is_nan() || c <= 0.0 || c > 1.0 || !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidConstants(format!("need 0 < c ≤ 1 and K > 0, got c = {c}, K = {k}")));
        }
        Ok(Self {
            c,
            k,
            source: ConstantSource::User,
        })
    }

    /// `c = 1` for chains, `(d - 1)/d` for `d`-dimensional grids.
    pub fn exponent_for_dimension(d: usize) -> f64 {
        if d <= 1 {
            1.0
        } else {
            (d - 1) as f64 / d as f64
        }
    }

    /// Tightest `K` for exponent `c` over connected proper regions of the
    /// interaction graph of `h` with at most `cap` spins.
    pub fn enumerate(h: &Hamiltonian, c: f64, cap: usize) -> Result<Self> {
        let active: Vec<usize> = h.active().iter().copied().collect();
        let adjacency = |v: usize| h.neighbors(v);
        let mut best = f64::INFINITY;
        for region in connected_regions(&active, adjacency, cap) {
            if region.len() == active.len() {
                continue;
            }
            let alpha = boundary_count(h, &region);
            best = best.min(alpha as f64 / (region.len() as f64).powf(c));
        }
        if !best.is_finite() || best <= 0.0 {
            return Err(Error::InvalidConstants("no proper connected region with a boundary".into()));
        }
        Ok(Self {
            c,
            k: best,
            source: ConstantSource::Enumerated { cap },
        })
    }
}

fn boundary_count(h: &Hamiltonian, region: &BTreeSet<usize>) -> usize {
    region
        .iter()
        .filter(|&&v| h.neighbors(v).iter().any(|w| !region.contains(w)))
        .count()
}

/// Every connected vertex set of size at most `cap`.
pub fn connected_regions(
    vertices: &[usize],
    neighbors: impl Fn(usize) -> Vec<usize>,
    cap: usize,
) -> Vec<BTreeSet<usize>> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut frontier: Vec<BTreeSet<usize>> = vertices.iter().map(|&v| BTreeSet::from([v])).collect();
    let mut out = Vec::new();
    while let Some(set) = frontier.pop() {
        if !seen.insert(set.iter().copied().collect()) {
            continue;
        }
        if set.len() < cap {
            for &v in &set {
                for w in neighbors(v) {
                    if !set.contains(&w) {
                        let mut next = set.clone();
                        next.insert(w);
                        frontier.push(next);
                    }
                }
            }
        }
        out.push(set);
    }
    out
}

/// `min(Σ log₂(ñ_j + 1), α/K)`.
///
/// Fails with [`Error::InvalidConstants`] when a component of `A` violates
/// `α_j ≥ K·ñ_j^c`.
pub fn area_law_bound(h: &Hamiltonian, a: &BTreeSet<usize>, constants: &LatticeConstants) -> Result<f64> {
    let red = reduce_subsystem(h, a)?;
    area_law_from(&red, constants)
}

fn area_law_from(red: &SubsystemReduction, constants: &LatticeConstants) -> Result<f64> {
    for comp in &red.components {
        let needed = constants.k * (comp.reduced_size() as f64).powf(constants.c);
        if (comp.boundary_spins as f64) < needed * (1.0 - 1e-12) {
            return Err(Error::InvalidConstants(format!(
                "component {:?} has {} boundary spins, constants require {needed:.3}",
                comp.original, comp.boundary_spins
            )));
        }
    }
    let alpha = red.bipartition.boundary_spins() as f64;
    Ok(red.schmidt_measure_bound().min(alpha / constants.k))
}

/// Logarithmic bound for a connected region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLaw {
    /// `log₂(ñ + 1)`, summed over pieces if deletions split the region.
    pub value: f64,
    /// `log₂(α/K + 1)/c` when constants are given.
    pub boundary_form: Option<f64>,
}

pub fn log_law_bound(h: &Hamiltonian, a: &BTreeSet<usize>, constants: Option<&LatticeConstants>) -> Result<LogLaw> {
    let red = reduce_subsystem(h, a)?;
    log_law_from(&red, constants)
}

fn log_law_from(red: &SubsystemReduction, constants: Option<&LatticeConstants>) -> Result<LogLaw> {
    if red.bipartition.components.len() != 1 {
        return Err(Error::NotContiguous);
    }
    let alpha = red.bipartition.boundary_spins() as f64;
    Ok(LogLaw {
        value: red.schmidt_measure_bound(),
        boundary_form: constants.map(|k| (alpha / k.k + 1.0).log2() / k.c),
    })
}

/// Number of components of each connected piece of `A` under terms of rank ≥ 2.
pub fn heavy_components(h: &Hamiltonian, a: &BTreeSet<usize>) -> Vec<usize> {
    let inner = h.restricted_to(a);
    inner
        .components()
        .into_iter()
        .map(|comp| {
            let index = |v: usize| comp.binary_search(&v).expect("member");
            let mut uf = UnionFind::<usize>::new(comp.len());
            for t in inner.two_spin_terms() {
                if t.rank() >= 2 && comp.binary_search(&t.a).is_ok() {
                    uf.union(index(t.a), index(t.b));
                }
            }
            let mut roots = uf.into_labeling();
            roots.sort_unstable();
            roots.dedup();
            roots.len()
        })
        .collect()
}

/// `Σ log₂(β_j + 1)` where `β_j` counts heavy components in the `j`-th
/// connected piece of `A`. Needs no reduction.
pub fn heavy_component_bound(h: &Hamiltonian, a: &BTreeSet<usize>) -> f64 {
    heavy_components(h, a)
        .into_iter()
        .map(|beta| ((beta + 1) as f64).log2())
        .sum()
}

/// Outcome of the rank-3 cascade test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cascade {
    NoCascade,
    /// One rank-3 term: at most one ground state survives.
    SingleRank3 { frustrated: bool, kernel_dim: usize },
    /// Two or more rank-3 terms.
    MultipleRank3 { count: usize, frustrated: bool },
}

impl Cascade {
    pub fn is_frustrated(&self) -> bool {
        match self {
            Self::NoCascade => false,
            Self::SingleRank3 { frustrated, .. } | Self::MultipleRank3 { frustrated, .. } => *frustrated,
        }
    }
}

/// Counts rank-3 terms and confirms the outcome with a full reduction.
pub fn rank3_cascade_classify(h: &Hamiltonian) -> Result<Cascade> {
    let count = h.two_spin_terms().filter(|t| t.rank() == 3).count();
    if count == 0 {
        return Ok(Cascade::NoCascade);
    }
    let result = reduce_with(h, &ReductionOptions::default())?;
    let frustrated = result.is_frustrated();
    if count == 1 {
        let kernel_dim = match result.reduced() {
            Some(r) => crate::ground::complete_kernel_dimension(&r.complete)?,
            None => 0,
        };
        Ok(Cascade::SingleRank3 { frustrated, kernel_dim })
    } else {
        Ok(Cascade::MultipleRank3 { count, frustrated })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub region: Vec<usize>,
    pub components: Vec<ReducedComponent>,
    pub reduced_sizes: Vec<usize>,
    /// Boundary spins of each component of `A`.
    pub boundary_spins_per_component: Vec<usize>,
    pub boundary_spins: usize,
    pub boundary_edges: usize,
    pub schmidt_measure_bound: f64,
    pub area_law_bound: Option<f64>,
    pub log_law: Option<LogLaw>,
    pub heavy_component_bound: f64,
    pub constants: Option<LatticeConstants>,
}

/// Bounds for the bipartition `a | rest` of a frustration-free `h`.
pub fn entanglement_report(
    h: &Hamiltonian,
    a: &BTreeSet<usize>,
    constants: Option<&LatticeConstants>,
) -> Result<EntanglementReport> {
    if reduce_with(h, &ReductionOptions::default())?.is_frustrated() {
        return Err(Error::FrustratedInput);
    }
    let red = reduce_subsystem(h, a)?;
    let area = match constants {
        Some(k) => Some(area_law_from(&red, k)?),
        None => None,
    };
    let log_law = match log_law_from(&red, constants) {
        Ok(l) => Some(l),
        Err(Error::NotContiguous) => None,
        Err(e) => return Err(e),
    };
    Ok(EntanglementReport {
        region: a.iter().copied().collect(),
        reduced_sizes: red.reduced_sizes(),
        boundary_spins_per_component: red.components.iter().map(|c| c.boundary_spins).collect(),
        boundary_spins: red.bipartition.boundary_spins(),
        boundary_edges: red.bipartition.boundary_edges.len(),
        schmidt_measure_bound: red.schmidt_measure_bound(),
        area_law_bound: area,
        log_law,
        heavy_component_bound: heavy_component_bound(h, a),
        constants: constants.cloned(),
        components: red.components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{golden, planted_complete, reverse_network_instance};
    use crate::lattice::Lattice;
    use crate::oracle::{ground_data_of, schmidt_rank_across};

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn single_spin_region_is_left_alone() {
        let h = planted_complete(4, 1);
        let red = reduce_subsystem(&h, &set(&[2])).unwrap();
        assert_eq!(red.reduced_sizes(), vec![1]);
        assert!(red.reduced.trace.steps.is_empty());
        assert!((red.schmidt_measure_bound() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_two_pair_contracts_to_one_spin() {
        let h = golden("xx4cycle").unwrap();
        let red = reduce_subsystem(&h, &set(&[2, 3])).unwrap();
        assert_eq!(red.reduced_sizes(), vec![1]);
        assert_eq!(red.reduced.trace.steps.len(), 1);
        let hc = &red.reduced.complete;
        assert_eq!(hc.pair(1, 2).unwrap().rank(), 2);
        assert_eq!(hc.pair(0, 2).unwrap().rank(), 2);
    }

    #[test]
    fn region_validation() {
        let h = planted_complete(3, 2);
        assert!(matches!(reduce_subsystem(&h, &set(&[])), Err(Error::InvalidRegion(_))));
        assert!(matches!(reduce_subsystem(&h, &set(&[0, 1, 2])), Err(Error::InvalidRegion(_))));
        assert!(matches!(reduce_subsystem(&h, &set(&[7])), Err(Error::InvalidRegion(_))));
    }

    #[test]
    fn bounds_hold_on_grown_chains() {
        for seed in 0..6 {
            let g = reverse_network_instance(&Lattice::chain(6), seed as usize % 3, seed);
            let d = ground_data_of(&g.hamiltonian).unwrap();
            if !d.frustration_free {
                continue;
            }
            for cut in 1..6 {
                let a: BTreeSet<usize> = (0..cut).collect();
                let bound = schmidt_measure_bound(&g.hamiltonian, &a).unwrap();
                let heavy = heavy_component_bound(&g.hamiltonian, &a);
                assert!(heavy + 1e-12 >= bound);
                let region: Vec<usize> = a.iter().copied().collect();
                for v in &d.basis {
                    let r = schmidt_rank_across(v, &d.spins, &region, 1e-9);
                    assert!((r as f64).log2() <= bound + 1e-9, "seed {seed} cut {cut}");
                }
            }
        }
    }

    #[test]
    fn heavy_components_follow_the_rank_two_subgraph() {
        let h = golden("xx4cycle").unwrap();
        assert_eq!(heavy_components(&h, &set(&[0, 1, 2, 3])), vec![1]);
        let p = planted_complete(4, 3);
        assert_eq!(heavy_components(&p, &set(&[0, 1, 2])), vec![3]);
        assert!((heavy_component_bound(&p, &set(&[0, 1, 2])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn chain_constants_and_area_law() {
        let g = reverse_network_instance(&Lattice::chain(8), 0, 5);
        let k = LatticeConstants::enumerate(&g.hamiltonian, 1.0, 4).unwrap();
        // An end segment of four spins has a single boundary spin.
        assert!((k.k - 0.25).abs() < 1e-12);
        let a = set(&[2, 3, 4]);
        let area = area_law_bound(&g.hamiltonian, &a, &k).unwrap();
        assert!((area - 2.0).abs() < 1e-12);
        let log = log_law_bound(&g.hamiltonian, &a, Some(&k)).unwrap();
        assert!((log.value - 2.0).abs() < 1e-12);
        assert!(matches!(
            log_law_bound(&g.hamiltonian, &set(&[0, 2]), None),
            Err(Error::NotContiguous)
        ));
        let tight = LatticeConstants::user(1.0, 1.0).unwrap();
        assert!(matches!(area_law_bound(&g.hamiltonian, &a, &tight), Err(Error::InvalidConstants(_))));
    }

    #[test]
    fn cascade_classification() {
        let h = golden("xx4cycle").unwrap();
        assert_eq!(rank3_cascade_classify(&h).unwrap(), Cascade::NoCascade);
        let two = golden("double-rank3").unwrap();
        assert!(matches!(
            rank3_cascade_classify(&two).unwrap(),
            Cascade::MultipleRank3 { count: 2, frustrated: true }
        ));
    }

    #[test]
    fn connected_region_counts() {
        let chain = Lattice::chain(5);
        let adj = chain.neighbors();
        let regions = connected_regions(&[0, 1, 2, 3, 4], |v| adj[v].clone(), 5);
        assert_eq!(regions.len(), 15);
    }
}
