//! Mean-field reference: RHF, Löwdin orthogonalization, MP2 amplitudes.

mod lowdin;
mod mp2;
mod rhf;

pub use lowdin::{localize_with, lowdin_localize, FragmentationPlan, LocalizedSystem};
pub use mp2::{mp2_amplitudes, mp2_from_mo, parse_amplitudes, read_amplitude_file, DoublesAmplitudes};
pub use rhf::{electronic_energy, fock_matrix, rhf, run_rhf, Guess, ScfOptions, ScfResult};
