//! Timing harness comparing classical training against cluster-weighted training.
//!
//! For every corpus size one corpus is sampled, then each timed step
//! (Euclidean clustering, DTW clustering, classical EM, weighted EM) is run
//! `runs` times and the mean wall-clock time is reported. File parsing and
//! corpus generation are never inside a timed region.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cluster::{build_clusters, ClusterTable, Distance};
use crate::error::{Error, Result};
use crate::model::{derive_seed, rng_from_seed, sample_sequences, Dataset, HmmModel, ObservationSequence};
use crate::parallel;
use crate::train::{em_train, initialize_model, weighted_em_train, TrainingConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub length: usize,
    pub iterations: usize,
    pub runs: usize,
    pub seed: u64,
    pub n_states: usize,
    /// Clustering whose table feeds the weighted trainer.
    pub distance: Distance,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![100, 1000, 10000],
            length: 5,
            iterations: 50,
            runs: 10,
            seed: 0,
            n_states: 3,
            distance: Distance::Dtw,
        }
    }
}

/// One row of the timing table. Times are means over `runs`, in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub n_sequences: usize,
    pub n_clusters_euclidean: usize,
    pub n_clusters_dtw: usize,
    pub t_cluster_euclidean_s: f64,
    pub t_cluster_dtw_s: f64,
    pub t_em_s: f64,
    pub t_weighted_em_s: f64,
    pub speedup: f64,
    pub speedup_total: f64,
    pub runs: usize,
    pub threads: usize,
    pub distance: Distance,
    /// Largest per-entry gap between the classical and weighted final models.
    pub max_param_gap: f64,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "n_sequences,n_clusters_euclidean,n_clusters_dtw,\
t_cluster_euclidean_s,t_cluster_dtw_s,t_em_s,t_weighted_em_s,speedup,speedup_total,\
runs,threads,distance,max_param_gap";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:e}",
            self.n_sequences,
            self.n_clusters_euclidean,
            self.n_clusters_dtw,
            fmt_sig(self.t_cluster_euclidean_s, 6),
            fmt_sig(self.t_cluster_dtw_s, 6),
            fmt_sig(self.t_em_s, 6),
            fmt_sig(self.t_weighted_em_s, 6),
            fmt_sig(self.speedup, 6),
            fmt_sig(self.speedup_total, 6),
            self.runs,
            self.threads,
            self.distance,
            self.max_param_gap,
        )
    }

    fn selected_cluster_time(&self) -> f64 {
        match self.distance {
            Distance::Dtw => self.t_cluster_dtw_s,
            Distance::Euclidean => self.t_cluster_euclidean_s,
        }
    }
}

pub fn reports_to_csv(rows: &[BenchReport]) -> String {
    let mut out = String::from(BenchReport::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn reports_to_text(rows: &[BenchReport]) -> String {
    let header = [
        "sequences", "clusters(euc)", "clusters(dtw)", "t_clu_euc/s", "t_clu_dtw/s", "t_em/s",
        "t_wem/s", "speedup", "speedup_total", "max_gap",
    ];
    let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in rows {
        table.push(vec![
            r.n_sequences.to_string(),
            r.n_clusters_euclidean.to_string(),
            r.n_clusters_dtw.to_string(),
            fmt_sig(r.t_cluster_euclidean_s, 6),
            fmt_sig(r.t_cluster_dtw_s, 6),
            fmt_sig(r.t_em_s, 6),
            fmt_sig(r.t_weighted_em_s, 6),
            fmt_sig(r.speedup, 6),
            fmt_sig(r.speedup_total, 6),
            format!("{:.3e}", r.max_param_gap),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    if let Some(r) = rows.first() {
        out.push_str(&format!(
            "weighted training on {} clusters; means over {} runs; {} thread(s)\n",
            r.distance, r.runs, r.threads
        ));
    }
    for row in table {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Formats `x` with `digits` significant digits in plain decimal notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

fn check_config(config: &BenchConfig) -> Result<()> {
    if config.sizes.is_empty() || config.sizes.contains(&0) {
        return Err(Error::InvalidArgument("sizes must be non-empty and at least 1".into()));
    }
    if config.runs == 0 || config.iterations == 0 || config.length == 0 || config.n_states == 0 {
        return Err(Error::InvalidArgument(
            "runs, iterations, length and states must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Benchmarks one already-generated corpus.
pub fn bench_corpus(
    data: &Dataset,
    init: &HmmModel,
    iterations: usize,
    runs: usize,
    distance: Distance,
) -> Result<BenchReport> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    let cfg = TrainingConfig::with_iterations(iterations);
    let uniform_length = data
        .sequences
        .windows(2)
        .all(|w| w[0].len() == w[1].len());

    let mut sums = [0.0f64; 4];
    let mut last: Option<(Option<ClusterTable>, ClusterTable, HmmModel, HmmModel)> = None;
    for _ in 0..runs {
        let (euc, t_euc) = if uniform_length {
            let (t, s) = timed(|| build_clusters(data, Distance::Euclidean))?;
            (Some(t), s)
        } else {
            (None, 0.0)
        };
        let (dtw, t_dtw) = timed(|| build_clusters(data, Distance::Dtw))?;
        let selected = match distance {
            Distance::Dtw => &dtw,
            Distance::Euclidean => euc.as_ref().ok_or_else(|| {
                Error::InvalidArgument("euclidean clustering needs equal-length sequences".into())
            })?,
        };
        let (classical, t_em) = timed(|| em_train(init, data, &cfg))?;
        let (weighted, t_wem) = timed(|| weighted_em_train(init, selected, &cfg))?;
        for (acc, t) in sums.iter_mut().zip([t_euc, t_dtw, t_em, t_wem]) {
            *acc += t;
        }
        last = Some((euc, dtw, classical.final_model, weighted.final_model));
    }

    let (euc, dtw, classical, weighted) = last.expect("runs >= 1");
    let n = runs as f64;
    let [t_euc, t_dtw, t_em, t_wem] = sums.map(|s| s / n);
    let mut report = BenchReport {
        n_sequences: data.len(),
        n_clusters_euclidean: euc.as_ref().map_or(data.len(), ClusterTable::len),
        n_clusters_dtw: dtw.len(),
        t_cluster_euclidean_s: t_euc,
        t_cluster_dtw_s: t_dtw,
        t_em_s: t_em,
        t_weighted_em_s: t_wem,
        speedup: 0.0,
        speedup_total: 0.0,
        runs,
        threads: parallel::threads(),
        distance,
        max_param_gap: classical.max_abs_diff(&weighted),
    };
    report.speedup = ratio(report.t_em_s, report.t_weighted_em_s);
    report.speedup_total = ratio(report.t_em_s, report.selected_cluster_time() + report.t_weighted_em_s);
    Ok(report)
}

// Timers can read zero on trivially small inputs; clamp to one nanosecond.
fn ratio(num: f64, den: f64) -> f64 {
    num.max(1e-9) / den.max(1e-9)
}

/// Runs the full table: one row per corpus size.
pub fn run_bench(generator: &HmmModel, config: &BenchConfig) -> Result<Vec<BenchReport>> {
    check_config(config)?;
    config
        .sizes
        .iter()
        .map(|&size| {
            let row_seed = derive_seed(config.seed, size as u64);
            let data = sample_sequences(generator, size, config.length, derive_seed(row_seed, 0))?;
            let init = initialize_model(
                config.n_states,
                generator.n_symbols(),
                derive_seed(row_seed, 1),
            )?;
            bench_corpus(&data, &init, config.iterations, config.runs, config.distance)
        })
        .collect()
}

/// A corpus of time-warped copies of a few base patterns.
#[derive(Debug, Clone)]
pub struct WarpedCorpus {
    pub patterns: Vec<Vec<usize>>,
    pub data: Dataset,
}

/// Builds `count` sequences of exactly `length` symbols. Each one picks a base
/// pattern (no two consecutive symbols equal) and stretches every symbol into
/// a run of random length. The first `n_patterns` sequences cover every pattern
/// once, so each pattern is present.
pub fn warped_corpus(
    n_patterns: usize,
    count: usize,
    length: usize,
    n_symbols: usize,
    seed: u64,
) -> Result<WarpedCorpus> {
    if n_patterns == 0 || count < n_patterns || n_symbols < 2 || length < 3 {
        return Err(Error::InvalidArgument(
            "need n_patterns >= 1, count >= n_patterns, n_symbols >= 2, length >= 3".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let min_len = 3.min(length);
    let max_len = (length / 2).max(min_len);
    let mut patterns: Vec<Vec<usize>> = Vec::with_capacity(n_patterns);
    let mut attempts = 0;
    while patterns.len() < n_patterns {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::InvalidArgument("cannot draw enough distinct patterns".into()));
        }
        let len = rng.gen_range(min_len..=max_len);
        let mut p = vec![rng.gen_range(0..n_symbols)];
        while p.len() < len {
            let s = rng.gen_range(0..n_symbols - 1);
            let last = *p.last().unwrap();
            p.push(if s >= last { s + 1 } else { s });
        }
        if !patterns.contains(&p) {
            patterns.push(p);
        }
    }

    let mut order: Vec<usize> = (0..n_patterns).collect();
    order.shuffle(&mut rng);
    let sequences = (0..count)
        .map(|i| {
            let k = if i < n_patterns { order[i] } else { rng.gen_range(0..n_patterns) };
            let pattern = &patterns[k];
            // random composition of `length` into pattern.len() positive run lengths
            let mut runs = vec![1usize; pattern.len()];
            for _ in 0..length - pattern.len() {
                let slot = rng.gen_range(0..pattern.len());
                runs[slot] += 1;
            }
            let symbols = pattern
                .iter()
                .zip(&runs)
                .flat_map(|(&s, &r)| std::iter::repeat_n(s, r))
                .collect();
            ObservationSequence::new(symbols)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WarpedCorpus {
        patterns,
        data: Dataset::new(0, sequences),
    })
}
