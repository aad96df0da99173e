use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dtw_distance, MetaTask, Strategy, TaskSet, WindowPair};
use crate::error::{Error, Result};

fn check_sizes(windows: &[WindowPair], k: usize, n: usize) -> Result<()> {
    if k == 0 || n == 0 {
        return Err(Error::Config(format!("support size and task count must be positive (k={k}, n={n})")));
    }
    if windows.len() < k + 1 {
        return Err(Error::InsufficientWindows(format!(
            "{} windows cannot form a task with k={k}",
            windows.len()
        )));
    }
    Ok(())
}

/// Draws `n` distinct query positions from `eligible` without replacement.
fn sample_queries(eligible: &[usize], n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if eligible.len() < n {
        return Err(Error::InsufficientWindows(format!(
            "{n} tasks requested but only {} query positions are eligible",
            eligible.len()
        )));
    }
    Ok(index::sample(rng, eligible.len(), n).into_iter().map(|i| eligible[i]).collect())
}

/// Positions `q` whose `k` predecessors lie in the same series segment.
fn successive_eligible(windows: &[WindowPair], k: usize) -> Vec<usize> {
    (k..windows.len())
        .filter(|&q| windows[q - k..q].iter().all(|w| w.segment == windows[q].segment))
        .collect()
}

fn assemble(windows: &[WindowPair], query: usize, support: Vec<usize>, strategy: Strategy) -> MetaTask {
    MetaTask {
        support: support.iter().map(|&p| windows[p].clone()).collect(),
        query: windows[query].clone(),
        support_positions: support,
        query_position: query,
        strategy,
    }
}

fn successive_like(
    windows: &[WindowPair],
    k: usize,
    n: usize,
    seed: u64,
    strategy: Strategy,
) -> Result<TaskSet> {
    check_sizes(windows, k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries = sample_queries(&successive_eligible(windows, k), n, &mut rng)?;
    let tasks = queries
        .into_iter()
        .map(|q| {
            let mut support: Vec<usize> = (q - k..q).collect();
            if strategy == Strategy::Shuffle {
                support.shuffle(&mut rng);
            }
            assemble(windows, q, support, strategy)
        })
        .collect();
    Ok(TaskSet { tasks, k, strategy })
}

/// Each sampled query `q` gets the `k` windows at `q-k..q` in time order.
pub fn build_successive_tasks(windows: &[WindowPair], k: usize, n: usize, seed: u64) -> Result<TaskSet> {
    successive_like(windows, k, n, seed, Strategy::Successive)
}

/// Same queries and support membership as [`build_successive_tasks`] for a
/// given seed, with each support set randomly permuted.
pub fn build_shuffle_tasks(windows: &[WindowPair], k: usize, n: usize, seed: u64) -> Result<TaskSet> {
    successive_like(windows, k, n, seed, Strategy::Shuffle)
}

/// Successive selection over windows cut from an exponentially smoothed
/// series (see [`super::make_windows_paired`]).
pub fn build_es_tasks(smoothed_windows: &[WindowPair], k: usize, n: usize, seed: u64) -> Result<TaskSet> {
    successive_like(smoothed_windows, k, n, seed, Strategy::Es)
}

/// Uniform queries; supports are `k` distinct uniform draws excluding the query.
pub fn build_random_tasks(windows: &[WindowPair], k: usize, n: usize, seed: u64) -> Result<TaskSet> {
    check_sizes(windows, k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..windows.len()).collect();
    let queries = sample_queries(&all, n, &mut rng)?;
    let tasks = queries
        .into_iter()
        .map(|q| {
            let support = index::sample(&mut rng, windows.len() - 1, k)
                .into_iter()
                .map(|i| if i >= q { i + 1 } else { i })
                .collect();
            assemble(windows, q, support, Strategy::Random)
        })
        .collect();
    Ok(TaskSet {
        tasks,
        k,
        strategy: Strategy::Random,
    })
}

/// For each query, the `k` windows earlier in the list with the smallest
/// DTW distance between inputs, ascending; ties go to the earlier window.
///
/// Only windows before the query are candidates, so no support window can
/// overlap the query's future. Queries with fewer than `k` candidates are
/// never drawn.
pub fn build_dtw_tasks(windows: &[WindowPair], k: usize, n: usize, seed: u64) -> Result<TaskSet> {
    check_sizes(windows, k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<usize> = (k..windows.len()).collect();
    let queries = sample_queries(&eligible, n, &mut rng)?;
    let mut tasks = Vec::with_capacity(n);
    for q in queries {
        let mut scored = Vec::with_capacity(q);
        for p in 0..q {
            scored.push((dtw_distance(&windows[p].input, &windows[q].input)?, p));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let support = scored.into_iter().take(k).map(|(_, p)| p).collect();
        tasks.push(assemble(windows, q, support, Strategy::Dtw));
    }
    Ok(TaskSet {
        tasks,
        k,
        strategy: Strategy::Dtw,
    })
}

/// Dispatches on `strategy`. For [`Strategy::Es`] the caller supplies
/// windows cut from the smoothed series.
pub fn build_tasks(strategy: Strategy, windows: &[WindowPair], k: usize, n: usize, seed: u64) -> Result<TaskSet> {
    match strategy {
        Strategy::Successive => build_successive_tasks(windows, k, n, seed),
        Strategy::Random => build_random_tasks(windows, k, n, seed),
        Strategy::Shuffle => build_shuffle_tasks(windows, k, n, seed),
        Strategy::Dtw => build_dtw_tasks(windows, k, n, seed),
        Strategy::Es => build_es_tasks(windows, k, n, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{make_windows, pool_windows};
    use crate::series::Series;
    use rand::Rng;
    use std::collections::BTreeSet;

    fn windows(count: usize, seed: u64) -> Vec<WindowPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..count + 9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = make_windows(&Series::new("w", values).unwrap(), 8, 1).unwrap();
        assert_eq!(w.len(), count);
        w
    }

    fn check_task_basics(ts: &TaskSet) {
        for t in &ts.tasks {
            assert_eq!(t.support.len(), ts.k);
            assert!(!t.support_positions.contains(&t.query_position));
            let distinct: BTreeSet<_> = t.support_positions.iter().collect();
            assert_eq!(distinct.len(), ts.k);
            assert_eq!(t.strategy, ts.strategy);
        }
    }

    #[test]
    fn successive_support_precedes_query() {
        let w = windows(10, 1);
        let ts = build_successive_tasks(&w, 3, 7, 0).unwrap();
        let task = ts.tasks.iter().find(|t| t.query_position == 5).unwrap();
        assert_eq!(task.support_positions, vec![2, 3, 4]);
        for t in &ts.tasks {
            let q = t.query_position;
            assert_eq!(t.support_positions, (q - 3..q).collect::<Vec<_>>());
            let origins: Vec<usize> = t.support.iter().map(|w| w.origin_index).collect();
            assert_eq!(*origins.last().unwrap() + 1, t.query.origin_index);
        }
        check_task_basics(&ts);
    }

    #[test]
    fn maximal_successive_task_is_forced() {
        let w = windows(10, 2);
        let ts = build_successive_tasks(&w, 9, 1, 5).unwrap();
        assert_eq!(ts.tasks[0].query_position, 9);
        assert_eq!(ts.tasks[0].support_positions, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn too_many_tasks_rejected() {
        let w = windows(10, 3);
        assert!(matches!(build_successive_tasks(&w, 3, 8, 0), Err(Error::InsufficientWindows(_))));
        assert!(build_random_tasks(&w, 10, 1, 0).is_err());
    }

    #[test]
    fn successive_skips_segment_boundaries() {
        let parts: Vec<Series> = (0..2)
            .map(|k| Series::new(format!("p{k}"), (0..20).map(|i| (k * 100 + i) as f64).collect()).unwrap())
            .collect();
        let pool = pool_windows(&parts, 8, 1).unwrap();
        assert_eq!(pool.len(), 22);
        let ts = build_successive_tasks(&pool, 4, 14, 9).unwrap();
        for t in &ts.tasks {
            assert!(t.support.iter().all(|w| w.segment == t.query.segment));
        }
        assert!(build_successive_tasks(&pool, 4, 15, 9).is_err());
    }

    #[test]
    fn random_two_windows_forced() {
        let w = windows(2, 4);
        let ts = build_random_tasks(&w, 1, 1, 11).unwrap();
        let t = &ts.tasks[0];
        assert_eq!(t.support_positions, vec![1 - t.query_position]);
    }

    #[test]
    fn random_support_frequencies_are_uniform() {
        let w = windows(12, 5);
        let draws = 10_000usize;
        let mut counts = vec![vec![0usize; w.len()]; w.len()];
        let mut per_query = vec![0usize; w.len()];
        for seed in 0..draws as u64 {
            let ts = build_random_tasks(&w, 1, 1, seed).unwrap();
            let t = &ts.tasks[0];
            per_query[t.query_position] += 1;
            counts[t.query_position][t.support_positions[0]] += 1;
        }
        // Pool over queries: each non-query window should be picked 1/(W-1) of the time.
        let p = 1.0 / (w.len() - 1) as f64;
        for q in 0..w.len() {
            let trials = per_query[q] as f64;
            let sigma = (trials * p * (1.0 - p)).sqrt();
            assert_eq!(counts[q][q], 0);
            for s in (0..w.len()).filter(|&s| s != q) {
                let dev = (counts[q][s] as f64 - trials * p).abs();
                assert!(dev <= 3.5 * sigma, "q={q} s={s} count={} expected {}", counts[q][s], trials * p);
            }
        }
        let pq = 1.0 / w.len() as f64;
        let sq = (draws as f64 * pq * (1.0 - pq)).sqrt();
        for c in per_query {
            assert!((c as f64 - draws as f64 * pq).abs() <= 3.5 * sq);
        }
    }

    #[test]
    fn shuffle_matches_successive_membership() {
        let w = windows(60, 6);
        let succ = build_successive_tasks(&w, 5, 40, 77).unwrap();
        let shuf = build_shuffle_tasks(&w, 5, 40, 77).unwrap();
        let mut permuted = 0;
        for (a, b) in succ.tasks.iter().zip(&shuf.tasks) {
            assert_eq!(a.query_position, b.query_position);
            let sa: BTreeSet<_> = a.support_positions.iter().collect();
            let sb: BTreeSet<_> = b.support_positions.iter().collect();
            assert_eq!(sa, sb);
            if a.support_positions != b.support_positions {
                permuted += 1;
            }
        }
        assert!(permuted >= 20, "only {permuted} of 40 supports permuted");
        check_task_basics(&shuf);
    }

    #[test]
    fn shuffle_with_k1_equals_successive() {
        let w = windows(30, 7);
        let a = build_successive_tasks(&w, 1, 10, 3).unwrap();
        let b = build_shuffle_tasks(&w, 1, 10, 3).unwrap();
        for (x, y) in a.tasks.iter().zip(&b.tasks) {
            assert_eq!(x.support_positions, y.support_positions);
            assert_eq!(x.query_position, y.query_position);
        }
    }

    #[test]
    fn dtw_identical_windows_take_nearest_in_time() {
        let w = make_windows(&Series::new("c", vec![1.0; 40]).unwrap(), 8, 1).unwrap();
        let ts = build_dtw_tasks(&w, 4, 5, 1).unwrap();
        for t in &ts.tasks {
            assert_eq!(t.support_positions, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn dtw_duplicate_ranks_first() {
        let mut w = windows(30, 8);
        let dup = w[29].input.clone();
        w[7].input = dup;
        let ts = build_dtw_tasks(&w, 3, 22, 2).unwrap();
        let t = ts.tasks.iter().find(|t| t.query_position == 29).unwrap();
        assert_eq!(t.support_positions[0], 7);
    }

    #[test]
    fn dtw_matches_exhaustive_top_k() {
        let w = windows(50, 9);
        let k = 4;
        let ts = build_dtw_tasks(&w, k, 40, 13).unwrap();
        for t in &ts.tasks {
            let q = t.query_position;
            // Exhaustive: compute every causal distance, sort by (distance, position).
            let mut all: Vec<(f64, usize)> = (0..q)
                .map(|p| (dtw_distance(&w[p].input, &w[q].input).unwrap(), p))
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let expected: Vec<usize> = all.iter().take(k).map(|x| x.1).collect();
            assert_eq!(t.support_positions, expected);
            assert!(t.support_positions.iter().all(|&p| w[p].origin_index < t.query.origin_index));
        }
        check_task_basics(&ts);
    }

    #[test]
    fn builders_are_deterministic() {
        let w = windows(80, 10);
        for st in Strategy::ALL {
            let a = build_tasks(st, &w, 5, 30, 99).unwrap();
            let b = build_tasks(st, &w, 5, 30, 99).unwrap();
            assert_eq!(a, b);
            check_task_basics(&a);
            assert_eq!(a.n(), 30);
        }
    }

    #[test]
    fn es_with_alpha_one_equals_successive() {
        use crate::partition::{exponential_smoothing, make_windows_paired};
        let raw = Series::new("r", (0..50).map(|i| ((i * 7) % 13) as f64).collect()).unwrap();
        let smooth = Series::new("s", exponential_smoothing(raw.values(), 1.0).unwrap()).unwrap();
        let ws = make_windows_paired(&smooth, &raw, 8, 1).unwrap();
        let wr = make_windows(&raw, 8, 1).unwrap();
        let es = build_es_tasks(&ws, 5, 20, 4).unwrap();
        let succ = build_successive_tasks(&wr, 5, 20, 4).unwrap();
        for (a, b) in es.tasks.iter().zip(&succ.tasks) {
            assert_eq!(a.support, b.support);
            assert_eq!(a.query, b.query);
        }
    }
}
