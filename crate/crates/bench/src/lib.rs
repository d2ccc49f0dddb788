//! Benchmark inputs shared by the targets under `benches/`.

use frustfree_core::generate::{planted_complete, reverse_network_instance};
use frustfree_core::lattice::Lattice;
use frustfree_core::Hamiltonian;

/// Grown natural instance on an `l`-spin chain.
pub fn chain_instance(l: usize, seed: u64) -> Hamiltonian {
    reverse_network_instance(&Lattice::chain(l), 0, seed).hamiltonian
}

/// Grown natural instance on a `w × h` grid.
pub fn grid_instance(w: usize, h: usize, seed: u64) -> Hamiltonian {
    reverse_network_instance(&Lattice::grid(&[w, h], false), 0, seed).hamiltonian
}

pub fn complete_instance(n: usize, seed: u64) -> Hamiltonian {
    planted_complete(n, seed)
}
