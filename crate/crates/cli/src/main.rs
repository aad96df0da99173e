use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smaml_core::autodiff::gradcheck::{run_gradcheck, TOLERANCE};
use smaml_core::data::{generate_synthetic, write_csv, write_results, SynthSpec};
use smaml_core::error::{Error, Result};
use smaml_core::experiment::{
    cell_tasks, cells, evaluate_cell, map_cells, prepare, result_rows, run_experiment, train_cell, write_report, Cell,
    CellResult, DataCache, ExperimentConfig, ExperimentReport,
};
use smaml_core::meta::{dataset_fingerprint, load_checkpoint, save_checkpoint, CheckpointMeta};

#[derive(Parser)]
#[command(name = "smaml", version, about = "Successive meta-task partitioning for few-shot time-series prognosis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent grid cells.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output directory.
    #[arg(long, env = "SMAML_OUT", default_value = "smaml_out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Stationarity report, differencing order and transformed series.
    Prepare(Common),
    /// Write the meta-task sets of every grid cell as JSON lines.
    Partition(Common),
    /// Meta-train every cell and save checkpoints.
    Train(Common),
    /// Fine-tune and score saved checkpoints on the target domain.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Score this checkpoint in every cell instead of each cell's own.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Full grid: prepare, partition, meta-train, evaluate, tabulate.
    Experiment(Common),
    /// Generate a synthetic series and its ground-truth components.
    Synth {
        /// JSON synthetic spec.
        #[arg(long)]
        spec: PathBuf,
        /// Base name of the output files; defaults to the spec file stem.
        #[arg(long)]
        name: Option<String>,
        /// Overrides the spec's noise seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "SMAML_OUT", default_value = "smaml_out")]
        out: PathBuf,
    },
    /// Compare analytic gradients with central finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb one op's analytic gradient (checks the checker).
        #[arg(long, hide = true)]
        corrupt: Option<String>,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.master_seed = seed;
    }
    if c.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_prepare(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let dir = c.out.join("prepared");
    let reports = prepare(&cfg, Some(&dir))?;
    println!("{:<20} {:<7} {:>7} {:>10} {:>10} {:>11} {:>2}", "series", "role", "length", "adf_stat", "crit_5%", "stationary", "d");
    for r in &reports {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{:<20} {:<7} {:>7} {:>10} {:>10} {:>11} {:>2}",
            r.name,
            format!("{:?}", r.role).to_lowercase(),
            r.length,
            fmt(r.adf_statistic),
            fmt(r.adf_critical_5pct),
            r.adf_stationary.map_or("-".to_string(), |s| s.to_string()),
            r.diff_order
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_partition(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    cfg.validate()?;
    let cache = DataCache::new(&cfg)?;
    let dir = c.out.join("tasks");
    create_dir(&dir)?;
    for cell in cells(&cfg) {
        let tasks = cell_tasks(&cfg, cache.for_method(&cfg, cell.method), &cell)?;
        write_file(&dir.join(format!("{}.jsonl", cell.label())), &tasks.to_jsonl())?;
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn checkpoint_path(dir: &Path, cell: &Cell) -> PathBuf {
    dir.join(format!("{}.bin", cell.label()))
}

fn cmd_train(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    cfg.validate()?;
    let cache = DataCache::new(&cfg)?;
    let dir = c.out.join("checkpoints");
    create_dir(&dir)?;
    let grid = cells(&cfg);
    let trained = map_cells(&grid, c.threads, |cell| train_cell(&cfg, cache.for_method(&cfg, cell.method), cell))?;
    let mut trace = String::from("method,N,K,input_len,seed,epoch,mean_query_loss,tasks_used,aborted\n");
    for t in trained {
        let t = t?;
        let data = cache.for_method(&cfg, t.cell.method);
        let pooled: Vec<f64> = data.training.iter().flat_map(|p| p.transform.original.iter().copied()).collect();
        let meta = CheckpointMeta {
            config: cfg.meta.clone(),
            dataset_sha256: dataset_fingerprint(&pooled),
            k: t.cell.k,
            input_len: t.cell.input_len,
        };
        save_checkpoint(&checkpoint_path(&dir, &t.cell), &t.params, &meta)?;
        for e in &t.trace {
            trace.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                t.cell.method.as_str(), t.cell.n, t.cell.k, t.cell.input_len, t.cell.seed, e.epoch, e.mean_query_loss, e.tasks_used, e.aborted
            ));
        }
    }
    write_file(&c.out.join("loss_traces.csv"), &trace)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_evaluate(c: &Common, checkpoint: Option<&Path>) -> Result<()> {
    let cfg = load_config(c)?;
    cfg.validate()?;
    let cache = DataCache::new(&cfg)?;
    let dir = c.out.join("checkpoints");
    let grid = cells(&cfg);
    let evaluated = map_cells(&grid, c.threads, |cell| -> Result<CellResult> {
        let path = checkpoint.map_or_else(|| checkpoint_path(&dir, cell), Path::to_path_buf);
        let (params, meta) = load_checkpoint(&path)?;
        if meta.input_len != cell.input_len {
            return Err(Error::Checkpoint(format!(
                "{} was trained with input_len {}, cell uses {}",
                path.display(),
                meta.input_len,
                cell.input_len
            )));
        }
        let records = evaluate_cell(&cfg, cache.for_method(&cfg, cell.method), cell, &params, meta.k)?;
        Ok(CellResult {
            cell: *cell,
            trace: Vec::new(),
            records,
        })
    })?;
    let done = evaluated.into_iter().collect::<Result<Vec<_>>>()?;
    let rows = result_rows(&cfg, &done)?;
    create_dir(&c.out)?;
    let (csv, md) = write_results(&rows, &c.out)?;
    print!("{}", std::fs::read_to_string(&md).unwrap_or_default());
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_experiment(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let report: ExperimentReport = run_experiment(&cfg, c.threads)?;
    let written = write_report(&cfg, &report, &c.out);
    if let Ok(md) = std::fs::read_to_string(c.out.join("results.md")) {
        print!("{md}");
    }
    written?;
    println!("wrote {}", c.out.display());
    Ok(())
}

fn cmd_synth(spec_path: &Path, name: Option<&str>, seed: Option<u64>, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(spec_path).map_err(|source| Error::Io {
        path: spec_path.to_path_buf(),
        source,
    })?;
    let mut spec: SynthSpec =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", spec_path.display())))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let stem = spec_path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let name = name.map(str::to_string).or(stem).unwrap_or_else(|| "synth".into());
    let (series, truth) = generate_synthetic(&spec, &name)?;
    create_dir(out)?;
    write_csv(&out.join(format!("{name}.csv")), &series)?;
    write_file(&out.join(format!("{name}.truth.json")), &serde_json::to_string_pretty(&truth)?)?;
    println!("wrote {} points to {}", series.len(), out.join(format!("{name}.csv")).display());
    Ok(())
}

fn cmd_gradcheck(seed: u64, corrupt: Option<&str>) -> Result<bool> {
    let report = run_gradcheck(seed, corrupt)?;
    println!("{:<10} {:>14}  status", "op", "max_rel_error");
    for (op, err, ok) in report.per_op() {
        println!("{op:<10} {err:>14.3e}  {}", if ok { "pass" } else { "FAIL" });
    }
    let passed = report.passed();
    println!("tolerance {TOLERANCE:e}: {}", if passed { "all ops pass" } else { "gradient check failed" });
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Prepare(c) => cmd_prepare(c),
        Command::Partition(c) => cmd_partition(c),
        Command::Train(c) => cmd_train(c),
        Command::Evaluate { common, checkpoint } => cmd_evaluate(common, checkpoint.as_deref()),
        Command::Experiment(c) => cmd_experiment(c),
        Command::Synth { spec, name, seed, out } => cmd_synth(spec, name.as_deref(), *seed, out),
        Command::Gradcheck { seed, corrupt } => match cmd_gradcheck(*seed, corrupt.as_deref()) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
