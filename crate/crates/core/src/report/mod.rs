//! Result export: per-job record files, comparison plots, the summary table
//! and a run manifest with content hashes.

mod manifest;
mod records;
mod summary;
mod svg;

pub use manifest::{sha256_hex, write_run, RunManifest, RunOutputs};
pub use records::{read_records_csv, write_records_csv, RECORDS_HEADER};
pub use summary::{format_summary_table, write_summary, SUMMARY_HEADER};
pub use svg::{
    comparison_from_records, render_comparison_svg, render_svg_string, ComparisonSpec, Series,
    PALETTE,
};
