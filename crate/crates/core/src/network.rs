//! The forest of isometries recorded by a reduction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CVector, ZERO};
use crate::reduction::{ReductionTrace, SpinDeletion, TraceStep, TwoSpinContraction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkNode {
    /// One input wire `u`, two output wires `u` and `v`.
    Contraction(TwoSpinContraction),
    /// No input wire, one output wire `v` fixed to a state.
    Deletion(SpinDeletion),
}

/// Maps states on the free spins (the spins of the reduced Hamiltonian) to
/// states on every spin of the original Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeTensorNetwork {
    outputs: Vec<usize>,
    free: Vec<usize>,
    nodes: Vec<NetworkNode>,
}

impl TreeTensorNetwork {
    /// Collects contraction and deletion steps of `trace` in reduction order.
    pub fn from_trace(
        outputs: &BTreeSet<usize>,
        free: &BTreeSet<usize>,
        trace: &ReductionTrace,
    ) -> Result<Self> {
        let nodes = trace
            .steps
            .iter()
            .filter_map(|s| match s {
                TraceStep::Contraction(c) => Some(NetworkNode::Contraction(c.clone())),
                TraceStep::Deletion(d) => Some(NetworkNode::Deletion(d.clone())),
                _ => None,
            })
            .collect();
        let net = Self {
            outputs: outputs.iter().copied().collect(),
            free: free.iter().copied().collect(),
            nodes,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn identity(spins: &BTreeSet<usize>) -> Self {
        let all: Vec<usize> = spins.iter().copied().collect();
        Self {
            outputs: all.clone(),
            free: all,
            nodes: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    /// Free input spins in increasing order.
    pub fn free_inputs(&self) -> &[usize] {
        &self.free
    }

    /// Output spins in increasing order.
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Checks that every removed spin is introduced exactly once and that each
    /// contraction splits a wire that already exists, which makes the network
    /// a forest with in-degree at most one.
    pub fn validate(&self) -> Result<()> {
        let mut present: BTreeSet<usize> = self.free.iter().copied().collect();
        for node in self.nodes.iter().rev() {
            let (input, created) = match node {
                NetworkNode::Contraction(c) => (Some(c.u), c.v),
                NetworkNode::Deletion(d) => (None, d.v),
            };
            if let Some(u) = input {
                if !present.contains(&u) {
                    return Err(Error::InvalidModel(format!("contraction input {u} is not available")));
                }
            }
            if !present.insert(created) {
                return Err(Error::InvalidModel(format!("spin {created} is introduced twice")));
            }
        }
        let outputs: BTreeSet<usize> = self.outputs.iter().copied().collect();
        if present != outputs {
            return Err(Error::InvalidModel("network outputs differ from the spin set".into()));
        }
        Ok(())
    }

    /// For each node, the later node whose output wire feeds it, if any.
    pub fn parents(&self) -> Vec<Option<usize>> {
        (0..self.nodes.len())
            .map(|k| {
                let NetworkNode::Contraction(c) = &self.nodes[k] else {
                    return None;
                };
                (k + 1..self.nodes.len()).find(|&j| match &self.nodes[j] {
                    NetworkNode::Contraction(d) => d.u == c.u,
                    NetworkNode::Deletion(_) => false,
                })
            })
            .collect()
    }
}

/// Maps `phi`, given on the free spins in increasing order, to a state on all
/// output spins in increasing order (the first spin is the most significant bit).
pub fn replay_network(net: &TreeTensorNetwork, phi: &CVector) -> Result<CVector> {
    let expected = 1usize << net.free.len();
    if phi.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: phi.len(),
        });
    }
    let mut sites = net.free.clone();
    let mut state = phi.clone();
    for node in net.nodes.iter().rev() {
        let len = sites.len();
        let mut next = CVector::zeros(state.len() * 2);
        match node {
            NetworkNode::Deletion(d) => {
                for (i, &amp) in state.iter().enumerate() {
                    next[2 * i] = amp * d.state[0];
                    next[2 * i + 1] = amp * d.state[1];
                }
                sites.push(d.v);
            }
            NetworkNode::Contraction(c) => {
                let p = sites.iter().position(|&s| s == c.u).expect("validated");
                let shift = len - 1 - p;
                for (i, &amp) in state.iter().enumerate() {
                    if amp == ZERO {
                        continue;
                    }
                    let x = (i >> shift) & 1;
                    let base = i & !(1 << shift);
                    for su in 0..2 {
                        let j = base | (su << shift);
                        for sv in 0..2 {
                            next[2 * j + sv] += c.isometry[(2 * su + sv, x)] * amp;
                        }
                    }
                }
                sites.push(c.v);
            }
        }
        state = next;
    }
    Ok(permute_to_sorted(&state, &sites))
}

/// Reorders a state on `sites` so that the sites appear in increasing order.
pub fn permute_to_sorted(state: &CVector, sites: &[usize]) -> CVector {
    let len = sites.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by_key(|&p| sites[p]);
    if order.iter().enumerate().all(|(i, &p)| i == p) {
        return state.clone();
    }
    let mut out = CVector::zeros(state.len());
    for (i, &amp) in state.iter().enumerate() {
        let mut j = 0;
        for &p in &order {
            j = (j << 1) | ((i >> (len - 1 - p)) & 1);
        }
        out[j] = amp;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, StateVector};

    #[test]
    fn empty_network_is_identity() {
        let spins: BTreeSet<usize> = [0, 1].into();
        let net = TreeTensorNetwork::identity(&spins);
        let phi = CVector::from_vec(vec![c64(0.5, 0.0), c64(0.5, 0.1), c64(0.0, 0.3), c64(0.2, 0.0)]);
        assert_eq!(replay_network(&net, &phi).unwrap(), phi);
    }

    #[test]
    fn deletion_node_appends_fixed_state() {
        let outputs: BTreeSet<usize> = [0, 1].into();
        let free: BTreeSet<usize> = [1].into();
        let psi = CVector::from_vec(vec![c64(0.6, 0.0), c64(0.8, 0.0)]);
        let trace = ReductionTrace {
            steps: vec![TraceStep::Deletion(SpinDeletion { v: 0, state: psi.clone() })],
        };
        let net = TreeTensorNetwork::from_trace(&outputs, &free, &trace).unwrap();
        let phi = CVector::from_vec(vec![c64(0.0, 1.0), c64(0.0, 0.0)]);
        let out = replay_network(&net, &phi).unwrap();
        assert!((out - psi.kronecker(&phi)).norm() < 1e-15);
    }

    #[test]
    fn double_introduction_is_rejected() {
        let outputs: BTreeSet<usize> = [0, 1].into();
        let free: BTreeSet<usize> = [0, 1].into();
        let trace = ReductionTrace {
            steps: vec![TraceStep::Deletion(SpinDeletion {
                v: 1,
                state: StateVector::basis(2, 0).into_amplitudes(),
            })],
        };
        assert!(TreeTensorNetwork::from_trace(&outputs, &free, &trace).is_err());
    }

    #[test]
    fn permutation_sorts_sites() {
        // |1⟩ on site 5 and |0⟩ on site 2, stored in order [5, 2]
        let state = StateVector::basis(4, 2).into_amplitudes();
        let out = permute_to_sorted(&state, &[5, 2]);
        assert_eq!(out, StateVector::basis(4, 1).into_amplitudes());
    }
}
