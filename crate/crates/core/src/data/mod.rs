//! CSV ingestion, synthetic series, domain registries and result tables.

mod csv_io;
mod registry;
mod results;
mod synth;

pub use csv_io::{load_csv, write_csv};
pub use registry::{register_domains, DomainSpec, Registry, Role};
pub use results::{
    format_mae, parse_results_csv, results_csv, results_markdown, write_results, ResultRow, CSV_HEADER, MARKDOWN_HEADER,
};
pub use synth::{ar_is_stationary, generate_synthetic, GroundTruth, SynthSpec};
