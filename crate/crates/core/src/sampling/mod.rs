//! Configuration sources: the seeded ansatz statevector, samplers, and shot files.

pub mod ansatz;
pub mod bitfile;
pub mod determinant;
pub mod givens;
pub mod sampler;

pub use ansatz::{prepare_state, seed_ansatz, AnsatzParams, AnsatzState, JastrowMask};
pub use bitfile::{format_bitstrings, parse_bitstrings, read_bitstring_file};
pub use determinant::Determinant;
pub use sampler::{derive_seed, ConfigurationSampler, DistributionSampler, FixedSampler, SampleSet, SourceTag};
