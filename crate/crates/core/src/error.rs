use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("operator has non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("term is not rescaled (min eigenvalue {0:.3e})")]
    NotRescaled(f64),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("contraction needs a rank-2 or rank-3 term, found rank {0}")]
    RankMismatch(usize),
    #[error("no entangled vector available to complete the contraction basis")]
    NoEntangledBasisVector,
    #[error("no term on {0}")]
    NoSuchTerm(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("reduction exceeded its iteration cap of {0}")]
    IterationCap(usize),
    #[error("constraint on ({0}, {1}) is a product functional")]
    NotNatural(usize, usize),
    #[error("gauge residual {residual:.3e} on edge ({a}, {b})")]
    Inconsistent { a: usize, b: usize, residual: f64 },
    #[error("product-basis seeds are linearly dependent")]
    DependentSeeds,
    #[error("Gram matrix is singular (smallest eigenvalue {0:.3e})")]
    GramSingular(f64),
    #[error("Hamiltonian is frustrated")]
    FrustratedInput,
    #[error("observable acts on {0} spins, limit is {1}")]
    ObservableTooLarge(usize, usize),
    #[error("subsystem reduction found frustration")]
    FrustratedSubsystem,
    #[error("invalid lattice constants: {0}")]
    InvalidConstants(String),
    #[error("region is not connected")]
    NotContiguous,
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("need at least {needed} trials, got {got}")]
    InsufficientTrials { needed: usize, got: usize },
    #[error("unperturbed Hamiltonian is frustrated")]
    FrustratedH0,
    #[error("perturbation term acts on {0} spins, at most 2 are supported")]
    UnsupportedPerturbation(usize),
    #[error("{n} spins exceed the dense limit of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
