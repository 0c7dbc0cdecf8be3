//! Configuration, orchestration and result files for whole-molecule runs.

pub mod config;
pub mod dims;
pub mod report;
pub mod run;

pub use config::{Fragmentation, RunConfig};
pub use dims::{format_dims, hilbert_space_dim, symmetry_space_dim, DimsRow};
pub use report::{compare_reports, format_delta, Comparison, ComparisonRow, EnergyReport, FragmentRow};
pub use run::{build_system, cmd_dims, cmd_export_fcidump, cmd_run, dims_rows, RunOutput};
