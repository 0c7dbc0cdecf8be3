//! Sample-based subspace diagonalization and the exact (FCI) reference solver.

pub mod davidson;
pub mod hamiltonian;
pub mod rdm;
pub mod recovery;
pub mod solver;
pub mod strings;
pub mod subspace;

pub use davidson::{davidson_lowest, DavidsonOptions, Eigenpair, LinearOperator};
pub use hamiltonian::{build_hamiltonian_action, determinant_energy, ProductSpaceAction, SlaterCondonAction};
pub use rdm::{compute_rdms, rdms_from_dets, Rdm2, Rdms};
pub use recovery::{recover_configurations, OccupancyProfile};
pub use solver::{
    fci_solve, sample_until_saturated, sqd_solve, sqd_solve_samples, CiVector, DiagnosticRow, SqdOptions, SqdResult,
};
pub use strings::{SingleTable, StringSpace};
pub use subspace::{expand_subspace, SubspaceBasis};
