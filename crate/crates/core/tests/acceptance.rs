//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use smaml_core::autodiff::gradcheck::{run_gradcheck, STEP, TOLERANCE};
use smaml_core::autodiff::{LstmShape, ModelParams};
use smaml_core::data::SynthSpec;
use smaml_core::error::Error;
use smaml_core::experiment::{run_experiment, write_report, DataCache, DataSource, Differencing, ExperimentConfig, ExperimentReport, Method};
use smaml_core::meta::{fine_tune, inner_adapt, meta_train, support_loss, MetaConfig};
use smaml_core::partition::{build_successive_tasks, dtw_distance, dtw_path, make_windows, WindowPair};
use smaml_core::series::{adf_test, default_max_lag, difference, fit_ar, integrate, Series};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn differencing_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let len = rng.random_range(4..=512);
        let d = if trial % 2 == 0 { 1 } else { 2 };
        let x: Vec<f64> = if trial % 4 < 2 {
            (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
        } else {
            let mut level = 0.0;
            (0..len)
                .map(|_| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    level += e;
                    level
                })
                .collect()
        };
        let s = Series::new("x", x.clone()).unwrap();
        let (diffed, stack) = difference(&s, d).unwrap();
        let back = integrate(&diffed, &stack).unwrap();
        for (a, b) in back.values().iter().zip(&x) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && within(elapsed, 5.0),
        format!("1000 series, max abs error {worst:.2e} (limit 1e-12), {:.2}s (limit 5s)", elapsed.as_secs_f64()),
    )
}

fn adf_classification() -> Outcome {
    let start = Instant::now();
    let n = 500;
    let lag = default_max_lag(n);
    let (mut noise_ok, mut walk_ok) = (0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if adf_test(&Series::new("noise", e.clone()).unwrap(), lag).unwrap().is_stationary {
            noise_ok += 1;
        }
        let walk: Vec<f64> = e
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        if !adf_test(&Series::new("walk", walk).unwrap(), lag).unwrap().is_stationary {
            walk_ok += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        noise_ok >= 95 && walk_ok >= 95 && within(elapsed, 10.0),
        format!(
            "white noise stationary {noise_ok}/100, random walk non-stationary {walk_ok}/100 (need >= 95 each), {:.2}s (limit 10s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn memo_dtw(a: &[f64], b: &[f64], i: usize, j: usize, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
    if let Some(v) = memo.get(&(i, j)) {
        return *v;
    }
    let cost = (a[i] - b[j]).abs();
    let v = match (i, j) {
        (0, 0) => cost,
        (0, _) => cost + memo_dtw(a, b, 0, j - 1, memo),
        (_, 0) => cost + memo_dtw(a, b, i - 1, 0, memo),
        _ => {
            cost + memo_dtw(a, b, i - 1, j, memo)
                .min(memo_dtw(a, b, i, j - 1, memo))
                .min(memo_dtw(a, b, i - 1, j - 1, memo))
        }
    };
    memo.insert((i, j), v);
    v
}

fn dtw_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for _ in 0..500 {
        let mut seq = || -> Vec<f64> { (0..rng.random_range(1..=6)).map(|_| rng.random_range(0..3) as f64).collect() };
        let (a, b) = (seq(), seq());
        let oracle = memo_dtw(&a, &b, a.len() - 1, b.len() - 1, &mut HashMap::new());
        if dtw_distance(&a, &b).unwrap() != oracle || dtw_path(&a, &b).unwrap().cost != oracle {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && within(elapsed, 5.0),
        format!("500 sampled pairs, {mismatches} mismatches vs memoized recursion, {:.2}s (limit 5s)", elapsed.as_secs_f64()),
    )
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let report = run_gradcheck(4, None).unwrap();
    let elapsed = start.elapsed();
    let per_op = report.per_op();
    let mut shapes: HashMap<&str, usize> = HashMap::new();
    for c in &report.checks {
        *shapes.entry(c.op.as_str()).or_default() += 1;
    }
    let enough_shapes = shapes.values().all(|&n| n >= 3);
    let worst = per_op.iter().map(|(_, e, _)| *e).fold(0.0, f64::max);
    let summary: Vec<String> = per_op.iter().map(|(op, e, _)| format!("{op} {e:.1e}")).collect();
    outcome(
        report.passed() && enough_shapes && per_op.iter().any(|(op, _, _)| op == "lstm") && STEP == 1e-5 && TOLERANCE == 1e-4 && within(elapsed, 30.0),
        format!(
            "{} ops x >=3 shapes, worst rel error {worst:.1e} (limit 1e-4) [{}], {:.2}s (limit 30s)",
            per_op.len(),
            summary.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn ar_recovery() -> Outcome {
    let mut y = vec![1.0];
    for _ in 1..50 {
        y.push(0.5 * y.last().unwrap());
    }
    let exact = fit_ar(&Series::new("ar1", y).unwrap(), 1).unwrap().coefficients[0];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sim = vec![0.0, 0.0];
    for t in 2..5200 {
        let e: f64 = StandardNormal.sample(&mut rng);
        sim.push(0.6 * sim[t - 1] - 0.2 * sim[t - 2] + e);
    }
    let fit = fit_ar(&Series::new("ar2", sim[200..].to_vec()).unwrap(), 2).unwrap();
    let (e1, e2) = ((fit.coefficients[0] - 0.6).abs(), (fit.coefficients[1] + 0.2).abs());
    outcome(
        (exact - 0.5).abs() < 1e-8 && e1 <= 0.05 && e2 <= 0.05,
        format!(
            "exact beta1 error {:.1e} (limit 1e-8); AR(2) n=5000 errors {e1:.3}, {e2:.3} (limit 0.05)",
            (exact - 0.5).abs()
        ),
    )
}

fn sine_family_support(seed: u64) -> Vec<WindowPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (amp, freq, phase) = (rng.random_range(0.1..0.5), rng.random_range(0.2..0.8), rng.random_range(0.0..6.28));
    let values: Vec<f64> = (0..40).map(|t| 0.5 + amp * (freq * t as f64 + phase).sin()).collect();
    let windows = make_windows(&Series::new("sine", values).unwrap(), 16, 1).unwrap();
    build_successive_tasks(&windows, 5, 1, seed).unwrap().tasks.remove(0).support
}

fn inner_loop_efficacy() -> Outcome {
    let cfg = MetaConfig::default();
    let mut improved = 0;
    for seed in 0..50u64 {
        let support = sine_family_support(seed);
        let theta = ModelParams::init(LstmShape::new(1, 32, 4).unwrap(), 1000 + seed);
        let before = support_loss(&theta, &support).unwrap();
        let after = support_loss(&inner_adapt(&theta, &support, &cfg).unwrap(), &support).unwrap();
        if after < before {
            improved += 1;
        }
    }
    outcome(
        improved >= 45,
        format!("support MSE reduced in {improved}/50 seeds after {} steps at lr {} (need >= 45)", cfg.inner_steps, cfg.inner_lr),
    )
}

fn synth(name: &str, length: usize, slope: f64, amp: f64, period: usize, ar: f64, seed: u64) -> DataSource {
    DataSource::Synth {
        name: name.into(),
        spec: SynthSpec {
            length,
            trend_slope: slope,
            season_amplitude: amp,
            season_period: period,
            ar_coeffs: vec![ar],
            noise_sigma: 0.5,
            seed,
            offset: 0.0,
        },
    }
}

fn grid_config(seeds: Vec<u64>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        "synthetic",
        vec![synth("source", 600, 0.05, 2.0, 24, 0.6, 11)],
        synth("target", 400, 0.08, 3.0, 36, 0.4, 12),
    );
    cfg.methods = vec![Method::Smaml, Method::MamlRandom, Method::SmamlShuffle];
    cfg.n_tasks = vec![70];
    cfg.k_shots = vec![5];
    cfg.input_lens = vec![16];
    cfg.seeds = seeds;
    cfg
}

fn mean_of(report: &ExperimentReport, method: Method) -> f64 {
    report.rows.iter().find(|r| r.method == method.as_str()).expect("row present").mae_mean()
}

fn directional_reproduction(triples: &[ExperimentReport], elapsed: Duration) -> Outcome {
    let first = &triples[0];
    let (s, r) = (mean_of(first, Method::Smaml), mean_of(first, Method::MamlRandom));
    let margin = (r - s) / r;
    let shuffle_wins: Vec<bool> = triples
        .iter()
        .map(|t| mean_of(t, Method::Smaml) <= mean_of(t, Method::SmamlShuffle))
        .collect();
    let wins = shuffle_wins.iter().filter(|w| **w).count();
    let shuffle_detail: Vec<String> = triples
        .iter()
        .map(|t| format!("{:.6}/{:.6}", mean_of(t, Method::Smaml), mean_of(t, Method::SmamlShuffle)))
        .collect();
    outcome(
        margin >= 0.05 && wins >= 2 && within(elapsed, 600.0),
        format!(
            "smaml {s:.4} vs maml_random {r:.4}: margin {:.1}% (need >= 5%); smaml <= smaml_shuffle in {wins}/3 triples [{}]; {:.0}s (limit 600s)",
            100.0 * margin,
            shuffle_detail.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn differencing_ablation(auto: &ExperimentReport) -> Outcome {
    let mut cfg = grid_config(vec![0, 1, 2]);
    cfg.methods = vec![Method::Smaml];
    cfg.differencing = Differencing::Fixed(0);
    let off = run_experiment(&cfg, 1).unwrap();
    let (a, o) = (mean_of(auto, Method::Smaml), mean_of(&off, Method::Smaml));
    outcome(a <= o, format!("smaml MAE with differencing auto {a:.4} vs off {o:.4}"))
}

fn determinism(first: &ExperimentReport) -> Outcome {
    let cfg = grid_config(vec![0, 1, 2]);
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("first"), dir.path().join("second"));
    write_report(&cfg, first, &a).unwrap();
    let rerun = run_experiment(&cfg, 1).unwrap();
    write_report(&cfg, &rerun, &b).unwrap();
    let (ca, cb) = (std::fs::read(a.join("results.csv")).unwrap(), std::fs::read(b.join("results.csv")).unwrap());
    outcome(ca == cb && !ca.is_empty(), format!("results.csv {} bytes, rerun identical: {}", ca.len(), ca == cb))
}

fn k_consistency() -> Outcome {
    let cfg = grid_config(vec![0]);
    let cache = DataCache::new(&cfg).unwrap();
    let data = cache.for_method(&cfg, Method::Smaml);
    let windows = make_windows(&data.training[0].transformed, 16, 1).unwrap();
    let tasks5 = build_successive_tasks(&windows, 5, 10, 0).unwrap();
    let meta = MetaConfig { meta_epochs: 1, ..Default::default() };
    let theta = meta_train(&ModelParams::init(LstmShape::new(1, 8, 4).unwrap(), 0), &tasks5, &meta, 0)
        .unwrap()
        .params;
    let support10 = build_successive_tasks(&windows, 10, 1, 0).unwrap().tasks.remove(0).support;
    let err = fine_tune(&theta, &support10, 5, &meta);
    let pass = matches!(&err, Err(e @ Error::KMismatch { expected: 5, got: 10 }) if e.is_validation());
    let ok_same_k = fine_tune(&theta, &tasks5.tasks[0].support, 5, &meta).is_ok();
    outcome(
        pass && ok_same_k,
        format!("fine-tune with K=10 after K=5 training -> {}", match err {
            Err(e) => e.to_string(),
            Ok(_) => "accepted".into(),
        }),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!("[{}] {id:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    report(1, "differencing round trip", differencing_round_trip());
    report(2, "ADF classification", adf_classification());
    report(3, "DTW oracle equivalence", dtw_oracle());
    report(4, "gradient checks", gradient_checks());
    report(5, "AR recovery", ar_recovery());
    report(6, "inner-loop efficacy", inner_loop_efficacy());

    let start = Instant::now();
    let triples: Vec<ExperimentReport> = (0..3u64)
        .map(|t| run_experiment(&grid_config(vec![3 * t, 3 * t + 1, 3 * t + 2]), 1).unwrap())
        .collect();
    report(7, "directional reproduction", directional_reproduction(&triples, start.elapsed()));
    report(8, "differencing ablation", differencing_ablation(&triples[0]));
    report(9, "determinism", determinism(&triples[0]));
    report(10, "K-consistency contract", k_consistency());

    let failed: Vec<String> = results.iter().filter(|(_, _, o)| !o.pass).map(|(id, n, _)| format!("{id} ({n})")).collect();
    println!("acceptance: {}/{} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
