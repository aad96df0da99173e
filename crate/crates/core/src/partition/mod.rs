//! Sliding-window samples and pseudo meta-task construction.
//!
//! A window list is cut from one series (or from several, concatenated into
//! a pool). Each builder turns it into a [`TaskSet`]: every task pairs one
//! query window with a support set of `k` other windows. Strategies differ
//! only in how the support set is chosen.

mod builders;
mod dtw;
mod windows;

pub use builders::{
    build_dtw_tasks, build_es_tasks, build_random_tasks, build_shuffle_tasks, build_successive_tasks, build_tasks,
};
pub use dtw::{dtw_distance, dtw_path, DtwAlignment};
pub use windows::{exponential_smoothing, make_windows, make_windows_paired, pool_windows};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// One `(input, target)` sample. `target` immediately follows `input` in
/// the source series and is a quarter of its length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPair {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    /// Position of the last input element in the source series.
    pub origin_index: usize,
    /// Which series of a pooled window list this window came from.
    pub segment: usize,
}

/// Support-selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// The `k` windows immediately preceding the query, in time order.
    Successive,
    /// `k` windows drawn uniformly from everything except the query.
    Random,
    /// Successive membership, randomly permuted.
    Shuffle,
    /// The `k` earlier windows closest to the query under DTW.
    Dtw,
    /// Successive selection over exponentially smoothed inputs.
    Es,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Successive,
        Strategy::Random,
        Strategy::Shuffle,
        Strategy::Dtw,
        Strategy::Es,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Successive => "successive",
            Strategy::Random => "random",
            Strategy::Shuffle => "shuffle",
            Strategy::Dtw => "dtw",
            Strategy::Es => "es",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown partition strategy {s:?}")))
    }
}

/// A support set and its query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaTask {
    pub support: Vec<WindowPair>,
    pub query: WindowPair,
    /// Positions in the window list the task was built from.
    pub support_positions: Vec<usize>,
    pub query_position: usize,
    pub strategy: Strategy,
}

/// `n` tasks sharing one support size and strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    pub tasks: Vec<MetaTask>,
    pub k: usize,
    pub strategy: Strategy,
}

#[derive(Serialize)]
struct TaskLine<'a> {
    strategy: Strategy,
    k: usize,
    query_origin: usize,
    support_origins: Vec<usize>,
    query_position: usize,
    support_positions: &'a [usize],
}

impl TaskSet {
    pub fn n(&self) -> usize {
        self.tasks.len()
    }

    /// One JSON object per task, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.tasks {
            let line = TaskLine {
                strategy: self.strategy,
                k: self.k,
                query_origin: t.query.origin_index,
                support_origins: t.support.iter().map(|w| w.origin_index).collect(),
                query_position: t.query_position,
                support_positions: &t.support_positions,
            };
            out.push_str(&serde_json::to_string(&line).expect("task line serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for st in Strategy::ALL {
            assert_eq!(st.as_str().parse::<Strategy>().unwrap(), st);
        }
        assert!("similarity".parse::<Strategy>().is_err());
    }

    #[test]
    fn jsonl_has_one_line_per_task() {
        let series = crate::series::Series::new("s", (0..40).map(f64::from).collect()).unwrap();
        let w = make_windows(&series, 8, 1).unwrap();
        let ts = build_successive_tasks(&w, 3, 4, 1).unwrap();
        let text = ts.to_jsonl();
        assert_eq!(text.lines().count(), 4);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["strategy"], "successive");
        assert_eq!(first["k"], 3);
        assert_eq!(first["support_origins"].as_array().unwrap().len(), 3);
    }
}
