//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::data::SynthSpec;
use crate::error::{Error, Result};
use crate::meta::MetaConfig;
use crate::partition::Strategy;

/// Compared methods. Each one is a support-selection strategy on the same
/// trainer; `Esmaml` also swaps differencing for exponential smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    Smaml,
    MamlRandom,
    SmamlShuffle,
    MamlDtw,
    Esmaml,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Smaml, Method::MamlRandom, Method::SmamlShuffle, Method::MamlDtw, Method::Esmaml];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Smaml => "smaml",
            Method::MamlRandom => "maml_random",
            Method::SmamlShuffle => "smaml_shuffle",
            Method::MamlDtw => "maml_dtw",
            Method::Esmaml => "esmaml",
        }
    }

    pub fn strategy(self) -> Strategy {
        match self {
            Method::Smaml => Strategy::Successive,
            Method::MamlRandom => Strategy::Random,
            Method::SmamlShuffle => Strategy::Shuffle,
            Method::MamlDtw => Strategy::Dtw,
            Method::Esmaml => Strategy::Es,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?} (expected one of smaml, maml_random, smaml_shuffle, maml_dtw, esmaml)")))
    }
}

/// How many times to difference before normalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Differencing {
    /// Smallest order in 0..=2 whose ADF test rejects a unit root.
    Auto,
    Fixed(usize),
}

impl FromStr for Differencing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Differencing::Auto),
            "off" | "0" => Ok(Differencing::Fixed(0)),
            "1" => Ok(Differencing::Fixed(1)),
            "2" => Ok(Differencing::Fixed(2)),
            _ => Err(Error::Config(format!("differencing must be auto, off, 0, 1 or 2, got {s:?}"))),
        }
    }
}

/// Where a domain's series comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DataSource {
    Csv { path: PathBuf, column: String },
    Synth { name: String, spec: SynthSpec },
}

impl DataSource {
    pub fn name(&self) -> String {
        match self {
            DataSource::Csv { path, .. } => path.file_stem().map_or("csv".into(), |s| s.to_string_lossy().into_owned()),
            DataSource::Synth { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Label used in the `dataset` column of result tables.
    pub dataset: String,
    pub sources: Vec<DataSource>,
    pub target: DataSource,
    pub integrate_conditions: bool,
    pub methods: Vec<Method>,
    pub n_tasks: Vec<usize>,
    pub k_shots: Vec<usize>,
    pub input_lens: Vec<usize>,
    pub stride: usize,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub meta: MetaConfig,
    pub hidden_size: usize,
    pub differencing: Differencing,
    pub es_alpha: Option<f64>,
    pub test_tasks: usize,
}

pub const DEFAULT_ES_ALPHA: f64 = 0.3;

impl ExperimentConfig {
    /// A config with default hyperparameters for the given data.
    pub fn new(dataset: impl Into<String>, sources: Vec<DataSource>, target: DataSource) -> Self {
        Self {
            dataset: dataset.into(),
            sources,
            target,
            integrate_conditions: false,
            methods: vec![Method::Smaml, Method::MamlRandom],
            n_tasks: vec![70],
            k_shots: vec![5],
            input_lens: vec![16],
            stride: 1,
            seeds: vec![0, 1, 2],
            master_seed: 0,
            meta: MetaConfig::default(),
            hidden_size: 32,
            differencing: Differencing::Auto,
            es_alpha: None,
            test_tasks: 50,
        }
    }

    pub fn es_alpha(&self) -> f64 {
        self.es_alpha.unwrap_or(DEFAULT_ES_ALPHA)
    }

    /// Static checks run before any computation.
    pub fn validate(&self) -> Result<()> {
        self.meta.validate()?;
        if self.sources.is_empty() {
            return Err(Error::Config("at least one source dataset is required".into()));
        }
        for (what, list) in [("methods", self.methods.len()), ("n_tasks", self.n_tasks.len()), ("k_shots", self.k_shots.len()), ("input_len", self.input_lens.len()), ("seeds", self.seeds.len())] {
            if list == 0 {
                return Err(Error::Config(format!("{what} must not be empty")));
            }
        }
        if let Some(&l) = self.input_lens.iter().find(|&&l| l == 0 || l % 4 != 0) {
            return Err(Error::Config(format!("input_len must be a positive multiple of 4, got {l}")));
        }
        if self.n_tasks.contains(&0) || self.k_shots.contains(&0) {
            return Err(Error::Config("n_tasks and k_shots must be positive".into()));
        }
        if self.stride == 0 || self.hidden_size == 0 || self.test_tasks == 0 {
            return Err(Error::Config("stride, hidden_size and test_tasks must be positive".into()));
        }
        if let Some(a) = self.es_alpha {
            if !self.methods.contains(&Method::Esmaml) {
                return Err(Error::Config("es_alpha is only meaningful with the esmaml method".into()));
            }
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!("es_alpha must be in (0, 1], got {a}")));
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Config(format!("method {m} listed twice")));
            }
        }
        let mut names: Vec<String> = self.sources.iter().map(DataSource::name).collect();
        names.push(self.target.name());
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        Ok(())
    }

    /// Parses the flat text format. Relative data paths resolve against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
            let key = k.trim().to_string();
            if kv.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Config(format!("line {}: key {key:?} set twice", i + 1)));
            }
        }
        let mut p = Parser { kv, base_dir };
        let cfg = p.build()?;
        if let Some((key, (line, _))) = p.kv.iter().next() {
            return Err(Error::Config(format!("line {line}: unknown key {key:?}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

struct Parser<'a> {
    kv: BTreeMap<String, (usize, String)>,
    base_dir: &'a Path,
}

impl Parser<'_> {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.kv.remove(key)
    }

    fn scalar<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::Config(format!("line {line}: {key}: {e}"))),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| Error::Config(format!("line {line}: {key}: {e}"))))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn path_list(&mut self, key: &str) -> Option<Vec<PathBuf>> {
        self.take(key)
            .map(|(_, v)| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| self.base_dir.join(s)).collect())
    }

    fn sources(&mut self, csv_key: &str, synth_key: &str, column: &str) -> Result<Vec<DataSource>> {
        let mut out = Vec::new();
        for path in self.path_list(csv_key).unwrap_or_default() {
            out.push(DataSource::Csv {
                path,
                column: column.to_string(),
            });
        }
        for path in self.path_list(synth_key).unwrap_or_default() {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let spec: SynthSpec = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let name = path.file_stem().map_or("synth".into(), |s| s.to_string_lossy().into_owned());
            out.push(DataSource::Synth { name, spec });
        }
        Ok(out)
    }

    fn build(&mut self) -> Result<ExperimentConfig> {
        let column = self.take("column").map_or("value".to_string(), |(_, v)| v);
        let sources = self.sources("source_csv", "source_synth", &column)?;
        let mut targets = self.sources("target_csv", "target_synth", &column)?;
        if targets.len() != 1 {
            return Err(Error::Config(format!("exactly one target dataset is required, got {}", targets.len())));
        }
        let dataset = self.take("dataset").map(|(_, v)| v);
        let target = targets.remove(0);
        let mut cfg = ExperimentConfig::new(dataset.unwrap_or_else(|| target.name()), sources, target);

        if let Some(v) = self.scalar("integrate_conditions")? {
            cfg.integrate_conditions = v;
        }
        if let Some(v) = self.list("methods")? {
            cfg.methods = v;
        }
        if let Some(v) = self.list("n_tasks")? {
            cfg.n_tasks = v;
        }
        if let Some(v) = self.list("k_shots")? {
            cfg.k_shots = v;
        }
        if let Some((line, v)) = self.take("target_k_shots") {
            let k: Vec<usize> = v
                .split(',')
                .map(|s| s.trim().parse().map_err(|e| Error::Config(format!("line {line}: target_k_shots: {e}"))))
                .collect::<Result<_>>()?;
            if k != cfg.k_shots {
                return Err(Error::Config(format!(
                    "line {line}: target_k_shots {k:?} differs from k_shots {:?}; K must stay constant between meta-training and fine-tuning",
                    cfg.k_shots
                )));
            }
        }
        if let Some(v) = self.list("input_len")? {
            cfg.input_lens = v;
        }
        if let Some(v) = self.scalar("stride")? {
            cfg.stride = v;
        }
        if let Some(v) = self.list("seeds")? {
            cfg.seeds = v;
        }
        if let Some(v) = self.scalar("seed")? {
            cfg.master_seed = v;
        }
        if let Some(v) = self.scalar("inner_lr")? {
            cfg.meta.inner_lr = v;
        }
        if let Some(v) = self.scalar("inner_steps")? {
            cfg.meta.inner_steps = v;
        }
        if let Some(v) = self.scalar("outer_lr")? {
            cfg.meta.outer_lr = v;
        }
        if let Some(v) = self.scalar("meta_epochs")? {
            cfg.meta.meta_epochs = v;
        }
        if let Some(v) = self.scalar("tasks_per_meta_batch")? {
            cfg.meta.tasks_per_meta_batch = v;
        }
        if let Some(v) = self.scalar("first_order")? {
            cfg.meta.first_order = v;
        }
        if let Some(v) = self.scalar("fine_tune_steps")? {
            cfg.meta.fine_tune_steps = Some(v);
        }
        if let Some(v) = self.scalar("hidden_size")? {
            cfg.hidden_size = v;
        }
        if let Some(v) = self.scalar("differencing")? {
            cfg.differencing = v;
        }
        if let Some(v) = self.scalar("es_alpha")? {
            cfg.es_alpha = Some(v);
        }
        if let Some(v) = self.scalar("test_tasks")? {
            cfg.test_tasks = v;
        }
        Ok(cfg)
    }
}
