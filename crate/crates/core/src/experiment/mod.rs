//! Config-driven experiment grid: prepare, partition, meta-train, evaluate.

mod config;
mod pipeline;
pub mod seeds;

pub use config::{DataSource, Differencing, ExperimentConfig, Method, DEFAULT_ES_ALPHA};
pub use pipeline::{
    cell_tasks, cells, evaluate_cell, load_data, load_source, map_cells, method_differencing, model_shape, prepare,
    prepare_series, result_rows, run_cell, run_experiment, target_tasks, train_cell, write_report, Cell, CellResult,
    DataCache, ExperimentReport, PreparedData, PreparedSeries, RawData, SeriesReport, TrainedCell,
};
