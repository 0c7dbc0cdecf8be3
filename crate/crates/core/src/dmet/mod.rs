//! Density matrix embedding: baths, impurity Hamiltonians, fragment energies,
//! and the chemical-potential loop.

pub mod bath;
pub mod chempot;
pub mod embedding;
pub mod energy;
pub mod solvers;

pub use bath::{build_bath, BathDecomposition, DEFAULT_EPS_OCC};
pub use chempot::{DmetOptions, DmetState, DmetSystem, Evaluation, MuStep, SolverKind};
pub use embedding::{build_embedding_hamiltonian, build_impurity_model, ImpurityModel};
pub use energy::fragment_energy;
pub use solvers::{
    expand_template, FciSolver, ImpuritySolution, ImpuritySolver, SamplerOptions, SamplerSource, SqdSolver,
};
