//! Exact-diagonalization cross-checks behind `--verify`.

use frustfree_core::local::LocalOp;
use frustfree_core::linalg::TAU_RANK;
use frustfree_core::oracle::{build_from_terms, build_full_capped, ground_data, GroundData};
use frustfree_core::Hamiltonian;

use crate::Failure;

/// Ground data of `h`, or `None` with a notice when it exceeds `cap` spins.
pub fn oracle(h: &Hamiltonian, cap: usize) -> Result<Option<GroundData>, Failure> {
    if h.active().len() > cap {
        eprintln!("verification skipped: {} spins exceed the cap of {cap}", h.active().len());
        return Ok(None);
    }
    Ok(Some(ground_data(&build_full_capped(h, cap)?, TAU_RANK)?))
}

/// Lowest eigenvalue of a sum of local terms on the active spins of `h`.
pub fn lowest_energy(h: &Hamiltonian, terms: &[LocalOp], cap: usize) -> Result<Option<f64>, Failure> {
    let spins: Vec<usize> = h.active().iter().copied().collect();
    if spins.len() > cap {
        eprintln!("verification skipped: {} spins exceed the cap of {cap}", spins.len());
        return Ok(None);
    }
    let dense = build_from_terms(spins, terms, cap)?;
    Ok(Some(ground_data(&dense, TAU_RANK)?.energy))
}

pub fn expect(ok: bool, what: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        eprintln!("verified");
        Ok(())
    } else {
        Err(Failure::Mismatch(what()))
    }
}
