use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{DataSource, Differencing, ExperimentConfig, Method};
use super::seeds::CellSeeds;
use crate::autodiff::{LstmShape, ModelParams};
use crate::data::{generate_synthetic, load_csv, register_domains, write_results, DomainSpec, ResultRow, Role};
use crate::error::{Error, Result};
use crate::meta::{aggregate_seeds, meta_test, meta_train, DomainTransform, EpochStats, EvalRecord};
use crate::partition::{build_successive_tasks, build_tasks, exponential_smoothing, make_windows_paired, TaskSet, WindowPair};
use crate::series::{adf_test, default_max_lag, select_difference_order, AdfReport, Series};

/// Loads or generates a data source.
pub fn load_source(source: &DataSource) -> Result<Series> {
    match source {
        DataSource::Csv { path, column } => load_csv(path, &[column]).map(|s| s.with_name(source.name())),
        DataSource::Synth { name, spec } => generate_synthetic(spec, name).map(|(s, _)| s),
    }
}

/// One series after preprocessing.
#[derive(Debug, Clone)]
pub struct PreparedSeries {
    pub name: String,
    pub role: Role,
    pub transformed: Series,
    pub transform: DomainTransform,
    /// ADF on the raw series (default lag), when it could be computed.
    pub adf: Option<AdfReport>,
}

impl PreparedSeries {
    pub fn diff_order(&self) -> usize {
        self.transform.stack.diff_order
    }
}

/// Picks the differencing order, then differences and normalizes to [0, 1].
pub fn prepare_series(series: &Series, role: Role, differencing: Differencing) -> Result<PreparedSeries> {
    let d = match differencing {
        Differencing::Auto => select_difference_order(series, 2, None)?,
        Differencing::Fixed(d) => d,
    };
    let adf = adf_test(series, default_max_lag(series.len())).ok();
    let (transformed, transform) = DomainTransform::fit(series, d, true)?;
    Ok(PreparedSeries {
        name: series.name().to_string(),
        role,
        transformed,
        transform,
        adf,
    })
}

/// Preprocessed meta-training pool and target series.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub training: Vec<PreparedSeries>,
    pub target: PreparedSeries,
}

/// Raw series of an experiment, resolved through the domain registry.
#[derive(Debug, Clone)]
pub struct RawData {
    pub training: Vec<Series>,
    pub target: Series,
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<RawData> {
    let domain = |src: &DataSource, role: Role| -> Result<DomainSpec> {
        Ok(DomainSpec {
            name: src.name(),
            role,
            series: vec![load_source(src)?],
            operating_condition: src.name(),
        })
    };
    let sources = cfg.sources.iter().map(|s| domain(s, Role::Source)).collect::<Result<Vec<_>>>()?;
    let target = domain(&cfg.target, Role::Target)?;
    let registry = register_domains(sources, vec![target], cfg.integrate_conditions)?;
    let training = registry.training_series().into_iter().cloned().collect();
    let target = registry.targets().next().expect("one target registered").series[0].clone();
    Ok(RawData { training, target })
}

impl RawData {
    pub fn prepare(&self, differencing: Differencing) -> Result<PreparedData> {
        Ok(PreparedData {
            training: self
                .training
                .iter()
                .map(|s| prepare_series(s, Role::Source, differencing))
                .collect::<Result<_>>()?,
            target: prepare_series(&self.target, Role::Target, differencing)?,
        })
    }
}

/// Differencing mode a method trains with: the configured one, except for
/// `esmaml`, which smooths undifferenced data instead.
pub fn method_differencing(cfg: &ExperimentConfig, method: Method) -> Differencing {
    if method == Method::Esmaml {
        Differencing::Fixed(0)
    } else {
        cfg.differencing
    }
}

/// Windows of one prepared series. With `smoothing`, inputs come from the
/// exponentially smoothed series while targets stay unsmoothed.
fn series_windows(p: &PreparedSeries, input_len: usize, stride: usize, smoothing: Option<f64>, segment: usize) -> Result<Vec<WindowPair>> {
    let inputs = match smoothing {
        Some(alpha) => p.transformed.derived(exponential_smoothing(p.transformed.values(), alpha)?)?,
        None => p.transformed.clone(),
    };
    let mut w = make_windows_paired(&inputs, &p.transformed, input_len, stride)?;
    w.iter_mut().for_each(|x| x.segment = segment);
    Ok(w)
}

/// One `(method, N, K, input_len, seed)` run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub method: Method,
    pub n: usize,
    pub k: usize,
    pub input_len: usize,
    pub seed: u64,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}_N{}_K{}_L{}_seed{}", self.method, self.n, self.k, self.input_len, self.seed)
    }

    pub fn seeds(&self, master: u64) -> CellSeeds {
        CellSeeds::new(master, self.n, self.k, self.input_len, self.seed)
    }
}

/// Grid cells in output order: input length, N, K, method, seed.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &input_len in &cfg.input_lens {
        for &n in &cfg.n_tasks {
            for &k in &cfg.k_shots {
                for &method in &cfg.methods {
                    for &seed in &cfg.seeds {
                        out.push(Cell { method, n, k, input_len, seed });
                    }
                }
            }
        }
    }
    out
}

fn smoothing_for(cfg: &ExperimentConfig, method: Method) -> Option<f64> {
    (method == Method::Esmaml).then(|| cfg.es_alpha())
}

/// Meta-training task set of a cell.
pub fn cell_tasks(cfg: &ExperimentConfig, data: &PreparedData, cell: &Cell) -> Result<TaskSet> {
    let smoothing = smoothing_for(cfg, cell.method);
    let mut pool = Vec::new();
    for (segment, p) in data.training.iter().enumerate() {
        pool.extend(series_windows(p, cell.input_len, cfg.stride, smoothing, segment)?);
    }
    build_tasks(cell.method.strategy(), &pool, cell.k, cell.n, cell.seeds(cfg.master_seed).partition)
}

/// Target-domain tasks: successive supports for `test_tasks` sampled queries.
pub fn target_tasks(cfg: &ExperimentConfig, data: &PreparedData, cell: &Cell) -> Result<TaskSet> {
    let windows = series_windows(&data.target, cell.input_len, cfg.stride, smoothing_for(cfg, cell.method), 0)?;
    build_successive_tasks(&windows, cell.k, cfg.test_tasks, cell.seeds(cfg.master_seed).target)
}

pub fn model_shape(cfg: &ExperimentConfig, input_len: usize) -> Result<LstmShape> {
    LstmShape::new(1, cfg.hidden_size, input_len / 4)
}

#[derive(Debug, Clone)]
pub struct TrainedCell {
    pub cell: Cell,
    pub params: ModelParams,
    pub trace: Vec<EpochStats>,
    pub aborted: usize,
}

pub fn train_cell(cfg: &ExperimentConfig, data: &PreparedData, cell: &Cell) -> Result<TrainedCell> {
    let tasks = cell_tasks(cfg, data, cell)?;
    let seeds = cell.seeds(cfg.master_seed);
    let init = ModelParams::init(model_shape(cfg, cell.input_len)?, seeds.init);
    let outcome = meta_train(&init, &tasks, &cfg.meta, seeds.train)?;
    Ok(TrainedCell {
        cell: *cell,
        params: outcome.params,
        trace: outcome.trace,
        aborted: outcome.aborted.len(),
    })
}

/// Fine-tunes and scores `params`, meta-trained with support size
/// `trained_k`, on the cell's target tasks.
pub fn evaluate_cell(cfg: &ExperimentConfig, data: &PreparedData, cell: &Cell, params: &ModelParams, trained_k: usize) -> Result<Vec<EvalRecord>> {
    if trained_k != cell.k {
        return Err(Error::KMismatch {
            expected: trained_k,
            got: cell.k,
        });
    }
    let tasks = target_tasks(cfg, data, cell)?;
    meta_test(params, trained_k, &tasks, std::slice::from_ref(&data.target.transform), &cfg.meta, cell.seed)
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub trace: Vec<EpochStats>,
    pub records: Vec<EvalRecord>,
}

/// Prepared data for every differencing mode the configured methods use.
pub struct DataCache {
    raw: RawData,
    prepared: Vec<(Differencing, PreparedData)>,
}

impl DataCache {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let raw = load_data(cfg)?;
        let mut prepared: Vec<(Differencing, PreparedData)> = Vec::new();
        for &m in &cfg.methods {
            let d = method_differencing(cfg, m);
            if !prepared.iter().any(|(x, _)| *x == d) {
                prepared.push((d, raw.prepare(d)?));
            }
        }
        Ok(Self { raw, prepared })
    }

    pub fn raw(&self) -> &RawData {
        &self.raw
    }

    pub fn for_method(&self, cfg: &ExperimentConfig, method: Method) -> &PreparedData {
        let d = method_differencing(cfg, method);
        &self.prepared.iter().find(|(x, _)| *x == d).expect("prepared for every configured method").1
    }
}

pub fn run_cell(cfg: &ExperimentConfig, cache: &DataCache, cell: &Cell) -> Result<CellResult> {
    let data = cache.for_method(cfg, cell.method);
    let trained = train_cell(cfg, data, cell)?;
    let records = evaluate_cell(cfg, data, cell, &trained.params, cell.k)?;
    Ok(CellResult {
        cell: *cell,
        trace: trained.trace,
        records,
    })
}

/// Runs `f` over `items`, on `threads` workers when more than one is asked
/// for. Output order always matches input order.
pub fn map_cells<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
        return Ok(pool.install(|| items.par_iter().map(&f).collect()));
    }
    let _ = threads;
    Ok(items.iter().map(f).collect())
}

/// Everything a finished (or partly finished) grid produced.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub cells: Vec<CellResult>,
    pub failures: Vec<(Cell, String)>,
}

/// Seed-averaged rows for every `(method, N, K, input_len)` group whose
/// seeds all finished.
pub fn result_rows(cfg: &ExperimentConfig, done: &[CellResult]) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &input_len in &cfg.input_lens {
        for &n in &cfg.n_tasks {
            for &k in &cfg.k_shots {
                for &method in &cfg.methods {
                    let group: Vec<&CellResult> = done
                        .iter()
                        .filter(|c| c.cell.method == method && c.cell.n == n && c.cell.k == k && c.cell.input_len == input_len)
                        .collect();
                    if group.len() != cfg.seeds.len() {
                        continue;
                    }
                    let mut per_seed = Vec::with_capacity(group.len());
                    for c in &group {
                        per_seed.push(aggregate_seeds(&c.records)?.mean);
                    }
                    rows.push(ResultRow {
                        dataset: cfg.dataset.clone(),
                        method: method.to_string(),
                        n,
                        k,
                        input_len,
                        mae_per_seed: per_seed,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Runs the whole grid. Cells are independent, so `threads > 1` runs them
/// concurrently without changing any result.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let cache = DataCache::new(cfg)?;
    let grid = cells(cfg);
    let outcomes = map_cells(&grid, threads, |c| run_cell(cfg, &cache, c))?;
    let mut done = Vec::new();
    let mut failures = Vec::new();
    for (cell, out) in grid.iter().zip(outcomes) {
        match out {
            Ok(r) => done.push(r),
            Err(e) => failures.push((*cell, e.to_string())),
        }
    }
    let rows = result_rows(cfg, &done)?;
    Ok(ExperimentReport {
        rows,
        cells: done,
        failures,
    })
}

fn trace_csv(cfg: &ExperimentConfig, cells: &[CellResult]) -> String {
    let mut out = String::from("dataset,method,N,K,input_len,seed,epoch,mean_query_loss,tasks_used,aborted\n");
    for c in cells {
        for e in &c.trace {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                cfg.dataset, c.cell.method, c.cell.n, c.cell.k, c.cell.input_len, c.cell.seed, e.epoch, e.mean_query_loss, e.tasks_used, e.aborted
            );
        }
    }
    out
}

fn records_csv(cfg: &ExperimentConfig, cells: &[CellResult]) -> String {
    let mut out = String::from("dataset,method,N,K,input_len,seed,task_id,mae_original_units,mae_transformed\n");
    for c in cells {
        for r in &c.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                cfg.dataset, c.cell.method, c.cell.n, c.cell.k, c.cell.input_len, r.seed, r.task_id, r.mae_original_units, r.mae_transformed
            );
        }
    }
    out
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// Writes `results.csv`, `results.md`, `loss_traces.csv` and
/// `eval_records.csv` into `dir`, plus an `INCOMPLETE` file listing failed
/// cells when there are any. Returns an error if any cell failed.
pub fn write_report(cfg: &ExperimentConfig, report: &ExperimentReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let marker = dir.join("INCOMPLETE");
    if !report.rows.is_empty() {
        write_results(&report.rows, dir)?;
    }
    write(dir.join("loss_traces.csv"), &trace_csv(cfg, &report.cells))?;
    write(dir.join("eval_records.csv"), &records_csv(cfg, &report.cells))?;
    if report.failures.is_empty() {
        if marker.exists() {
            std::fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
        }
        return Ok(());
    }
    let mut text = String::from("results are partial; failed cells:\n");
    for (cell, err) in &report.failures {
        let _ = writeln!(text, "{}: {err}", cell.label());
    }
    write(marker, &text)?;
    Err(Error::CellsFailed {
        failed: report.failures.len(),
        total: report.failures.len() + report.cells.len(),
        first: format!("{}: {}", report.failures[0].0.label(), report.failures[0].1),
    })
}

/// Per-series preprocessing summary.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub name: String,
    pub role: Role,
    pub length: usize,
    pub adf_statistic: Option<f64>,
    pub adf_critical_5pct: Option<f64>,
    pub adf_stationary: Option<bool>,
    pub diff_order: usize,
    pub norm_min: Option<f64>,
    pub norm_max: Option<f64>,
}

impl From<&PreparedSeries> for SeriesReport {
    fn from(p: &PreparedSeries) -> Self {
        let norm = p.transform.stack.norm;
        Self {
            name: p.name.clone(),
            role: p.role,
            length: p.transform.original.len(),
            adf_statistic: p.adf.as_ref().map(|a| a.statistic),
            adf_critical_5pct: p.adf.as_ref().map(|a| a.critical_value_5pct),
            adf_stationary: p.adf.as_ref().map(|a| a.is_stationary),
            diff_order: p.diff_order(),
            norm_min: norm.map(|b| b.min),
            norm_max: norm.map(|b| b.max),
        }
    }
}

/// Preprocesses every series with the configured differencing mode and,
/// when `dir` is given, writes `<name>.csv` (transformed values) and
/// `<name>.stack.json` for each, plus `prepare_report.json`.
pub fn prepare(cfg: &ExperimentConfig, dir: Option<&Path>) -> Result<Vec<SeriesReport>> {
    let raw = load_data(cfg)?;
    let data = raw.prepare(cfg.differencing)?;
    let all: Vec<&PreparedSeries> = data.training.iter().chain(std::iter::once(&data.target)).collect();
    let reports: Vec<SeriesReport> = all.iter().map(|p| SeriesReport::from(*p)).collect();
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for p in &all {
            crate::data::write_csv(&dir.join(format!("{}.csv", p.name)), &p.transformed)?;
            write(dir.join(format!("{}.stack.json", p.name)), &serde_json::to_string_pretty(&p.transform.stack)?)?;
        }
        write(dir.join("prepare_report.json"), &serde_json::to_string_pretty(&reports)?)?;
    }
    Ok(reports)
}
