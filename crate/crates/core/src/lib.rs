//! Frustration-free 2-local spin-1/2 Hamiltonians.
//!
//! The central operation is [`reduction::reduce_to_complete`], which either
//! certifies that a Hamiltonian is frustrated or reduces it to a complete
//! homogeneous Hamiltonian whose ground space is mapped into the ground space
//! of the input by a tree tensor network.

pub mod entanglement;
pub mod error;
pub mod format;
pub mod generate;
pub mod ground;
pub mod lattice;
pub mod linalg;
pub mod local;
pub mod model;
pub mod network;
pub mod oracle;
pub mod percolation;
pub mod reduction;
pub mod variational;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, HermitianOperator, StateVector, C64};
pub use local::LocalOp;
pub use model::{Hamiltonian, SingleSpinTerm, TwoSpinTerm};
pub use network::TreeTensorNetwork;
pub use reduction::{reduce_to_complete, ReductionResult, ReductionTrace};
pub use entanglement::{
    area_law_bound, entanglement_report, heavy_component_bound, log_law_bound, rank3_cascade_classify,
    reduce_subsystem, schmidt_measure_bound, Cascade, EntanglementReport, LatticeConstants,
};
pub use generate::{planted_complete, random_instance, reverse_network_instance, RandomConfig};
pub use ground::{expectation_ground_manifold, pull_back, solve_gauge, GroundSpace};
pub use lattice::Lattice;
pub use percolation::{degeneracy_bound, monte_carlo_scaling, RandomLatticeConfig, ScalingReport};
pub use variational::{variational_energy, Perturbation, VariationalResult};
