//! End-to-end driver behind the `scidiag` binary.

mod detlist;
mod report;
mod run;
mod shuffle;

pub use detlist::{format_mask, parse_det_list, read_det_list, write_det_list, DetList};
pub use report::{emit_report, format_sci, ConfigEcho, RunReport, StopReason, TimingBreakdown, REPORT_SCHEMA};
pub use run::{
    default_bit_length, dense_eig, gen_basis, run_diagonalization, with_workers, write_det_list_file, DenseConfig,
    DenseReport, GenBasisConfig, Method, ReportFormat, RunConfig,
};
pub use shuffle::{shuffle_basis, shuffle_strings, shuffle_with, SplitMix64};
