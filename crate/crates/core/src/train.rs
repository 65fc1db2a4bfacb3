//! Baum-Welch re-estimation, classical and cluster-weighted.
//!
//! Both trainers run the same code: a classical run is a weighted run in
//! which every sequence carries weight one. Each representative's expected
//! counts (initial-state occupancy, transitions, emissions) are multiplied by
//! its cluster weight before they are added to the totals, so a cluster of
//! weight `w` contributes exactly what `w` identical sequences would.
//!
//! Accumulation order is fixed: entries are split into consecutive blocks of
//! [`BLOCK_SIZE`], each block is summed in entry order (time-major within a
//! sequence), and block totals are then added in block order. Blocks may be
//! evaluated on different threads; the result does not depend on how many.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::cluster::ClusterTable;
use crate::error::{Error, Result};
use crate::inference::forward_backward;
use crate::model::{rng_from_seed, Dataset, HmmModel, ModelParams, ObservationSequence};
use crate::parallel;

pub const BLOCK_SIZE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub iterations: usize,
    /// Stop once the log-likelihood improves by less than this.
    pub ll_tolerance: Option<f64>,
    /// Keep the model produced by every iteration in [`TrainingTrace::history`].
    pub record_history: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            iterations: 50,
            ll_tolerance: None,
            record_history: false,
        }
    }
}

impl TrainingConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        if let Some(tol) = self.ll_tolerance {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::InvalidArgument("ll_tolerance must be non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainingTrace {
    /// Weighted log-likelihood of the training data under the model entering
    /// each iteration.
    pub per_iteration_log_likelihood: Vec<f64>,
    /// Wall-clock seconds since the start of training, at the end of each iteration.
    pub cumulative_seconds: Vec<f64>,
    pub final_model: HmmModel,
    pub wall_time_seconds: f64,
    pub history: Vec<HmmModel>,
    pub warnings: Vec<String>,
}

impl TrainingTrace {
    pub fn iterations_run(&self) -> usize {
        self.per_iteration_log_likelihood.len()
    }

    /// `iteration,log_likelihood,cumulative_seconds`, one row per iteration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,log_likelihood,cumulative_seconds\n");
        for (i, (ll, s)) in self
            .per_iteration_log_likelihood
            .iter()
            .zip(&self.cumulative_seconds)
            .enumerate()
        {
            out.push_str(&format!("{},{:?},{}\n", i + 1, ll, crate::bench::fmt_sig(*s, 6)));
        }
        out
    }
}

/// A random model with strictly positive entries, deterministic in `seed`.
pub fn initialize_model(n_states: usize, n_symbols: usize, seed: u64) -> Result<HmmModel> {
    if n_states == 0 || n_symbols == 0 {
        return Err(Error::InvalidArgument(
            "n_states and n_symbols must be at least 1".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut row = |len: usize| -> Vec<f64> {
        // 1 - U[0, 1) lies in (0, 1]
        let raw: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    };
    let pi = row(n_states);
    let a = (0..n_states).map(|_| row(n_states)).collect();
    let b = (0..n_states).map(|_| row(n_symbols)).collect();
    HmmModel::new(pi, a, b)
}

/// Classical multi-sequence Baum-Welch.
pub fn em_train(init: &HmmModel, data: &Dataset, config: &TrainingConfig) -> Result<TrainingTrace> {
    let entries: Vec<(&ObservationSequence, f64)> =
        data.sequences.iter().map(|s| (s, 1.0)).collect();
    train_entries(init, &entries, config)
}

/// Baum-Welch over cluster representatives, each weighted by its cluster size.
pub fn weighted_em_train(
    init: &HmmModel,
    table: &ClusterTable,
    config: &TrainingConfig,
) -> Result<TrainingTrace> {
    let entries: Vec<(&ObservationSequence, f64)> = table
        .entries
        .iter()
        .map(|e| (&e.representative, e.weight as f64))
        .collect();
    train_entries(init, &entries, config)
}

fn train_entries(
    init: &HmmModel,
    entries: &[(&ObservationSequence, f64)],
    config: &TrainingConfig,
) -> Result<TrainingTrace> {
    config.check()?;
    if entries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (index, (seq, _)) in entries.iter().enumerate() {
        init.check_sequence(seq)
            .map_err(|e| Error::InvalidArgument(format!("sequence {index}: {e}")))?;
    }

    let start = Instant::now();
    let mut model = init.clone();
    let mut lls = Vec::with_capacity(config.iterations);
    let mut seconds = Vec::with_capacity(config.iterations);
    let mut history = Vec::new();
    let mut warnings = Vec::new();

    for iteration in 1..=config.iterations {
        let counts = expected_counts(&model, entries).map_err(|e| match e {
            ExpectationError::Impossible(index) => {
                Error::ImpossibleTrainingSequence { index, iteration }
            }
            ExpectationError::Other(e) => e,
        })?;
        let improvement = lls.last().map(|prev| counts.log_likelihood - prev);
        lls.push(counts.log_likelihood);

        model = counts.reestimate(&model, iteration, &mut warnings);
        seconds.push(start.elapsed().as_secs_f64());
        if config.record_history {
            history.push(model.clone());
        }

        if let (Some(tol), Some(delta)) = (config.ll_tolerance, improvement) {
            if delta < tol {
                break;
            }
        }
    }

    Ok(TrainingTrace {
        per_iteration_log_likelihood: lls,
        cumulative_seconds: seconds,
        final_model: model,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        history,
        warnings,
    })
}

enum ExpectationError {
    Impossible(usize),
    Other(Error),
}

/// Weighted expected counts over the whole training multiset.
#[derive(Debug, Clone)]
struct Counts {
    n: usize,
    m: usize,
    initial: Vec<f64>,
    transitions: Vec<f64>,
    emissions: Vec<f64>,
    log_likelihood: f64,
}

impl Counts {
    fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            initial: vec![0.0; n],
            transitions: vec![0.0; n * n],
            emissions: vec![0.0; n * m],
            log_likelihood: 0.0,
        }
    }

    fn add_sequence(
        &mut self,
        model: &HmmModel,
        seq: &ObservationSequence,
        weight: f64,
    ) -> Result<()> {
        let fb = forward_backward(model, seq)?;
        let n = self.n;
        self.log_likelihood += weight * fb.log_likelihood;
        for (acc, g) in self.initial.iter_mut().zip(fb.gamma_row(0)) {
            *acc += weight * g;
        }
        for (t, &o) in seq.symbols().iter().enumerate() {
            for (j, g) in fb.gamma_row(t).iter().enumerate() {
                self.emissions[j * self.m + o] += weight * g;
            }
            if t + 1 < fb.len() {
                for (acc, x) in self.transitions.iter_mut().zip(fb.xi_slice(t)) {
                    *acc += weight * x;
                }
            }
        }
        debug_assert_eq!(self.transitions.len(), n * n);
        Ok(())
    }

    fn merge(&mut self, other: &Counts) {
        let add = |a: &mut [f64], b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.initial, &other.initial);
        add(&mut self.transitions, &other.transitions);
        add(&mut self.emissions, &other.emissions);
        self.log_likelihood += other.log_likelihood;
    }

    /// M-step. Rows of states that were never occupied keep their old values.
    fn reestimate(&self, prev: &HmmModel, iteration: usize, warnings: &mut Vec<String>) -> HmmModel {
        let (n, m) = (self.n, self.m);
        // Σ_i of the initial counts equals the total weight up to rounding;
        // dividing by it keeps every entry inside [0, 1]
        let initial_total: f64 = self.initial.iter().sum();
        let pi = self.initial.iter().map(|c| c / initial_total).collect();

        let normalize = |counts: &[f64], old: &[f64], what: &str, i: usize, warnings: &mut Vec<String>| {
            let total: f64 = counts.iter().sum();
            if total > 0.0 {
                counts.iter().map(|c| c / total).collect()
            } else {
                warnings.push(format!(
                    "iteration {iteration}: state {i} has zero expected {what}; row kept"
                ));
                old.to_vec()
            }
        };

        let a = (0..n)
            .map(|i| normalize(&self.transitions[i * n..(i + 1) * n], &prev.a()[i], "transitions", i, warnings))
            .collect();
        let b = (0..n)
            .map(|j| normalize(&self.emissions[j * m..(j + 1) * m], &prev.b()[j], "occupancy", j, warnings))
            .collect();

        HmmModel::from_params_unchecked(ModelParams {
            n_states: n,
            n_symbols: m,
            pi,
            a,
            b,
        })
    }
}

fn expected_counts(
    model: &HmmModel,
    entries: &[(&ObservationSequence, f64)],
) -> std::result::Result<Counts, ExpectationError> {
    let (n, m) = (model.n_states(), model.n_symbols());
    let block = |(b, chunk): (usize, &[(&ObservationSequence, f64)])| {
        let mut counts = Counts::zeros(n, m);
        for (k, (seq, w)) in chunk.iter().enumerate() {
            counts.add_sequence(model, seq, *w).map_err(|e| match e {
                Error::ImpossibleSequence => ExpectationError::Impossible(b * BLOCK_SIZE + k),
                other => ExpectationError::Other(other),
            })?;
        }
        Ok(counts)
    };

    let blocks: Vec<_> = if entries.len() <= BLOCK_SIZE {
        vec![block((0, entries))]
    } else {
        parallel::pool().install(|| {
            entries
                .par_chunks(BLOCK_SIZE)
                .enumerate()
                .map(block)
                .collect()
        })
    };

    let mut total = Counts::zeros(n, m);
    for b in blocks {
        total.merge(&b?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterEntry;

    fn seq(v: &[usize]) -> ObservationSequence {
        ObservationSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn init_one_by_one() {
        let m = initialize_model(1, 1, 42).unwrap();
        assert_eq!(m.pi(), &[1.0]);
        assert_eq!(m.a(), &[vec![1.0]]);
        assert_eq!(m.b(), &[vec![1.0]]);
    }

    #[test]
    fn init_is_deterministic_and_positive() {
        let x = initialize_model(3, 10, 5).unwrap();
        assert_eq!(x, initialize_model(3, 10, 5).unwrap());
        assert_ne!(x, initialize_model(3, 10, 6).unwrap());
        assert!(x.flat_params().iter().all(|&v| v > 0.0));
        let rows = std::iter::once(x.pi()).chain(x.a().iter().map(Vec::as_slice)).chain(x.b().iter().map(Vec::as_slice));
        for r in rows {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn init_rejects_zero_dimensions() {
        assert!(initialize_model(0, 3, 1).is_err());
        assert!(initialize_model(3, 0, 1).is_err());
    }

    #[test]
    fn one_state_closed_form() {
        let init = HmmModel::new(vec![1.0], vec![vec![1.0]], vec![vec![0.3, 0.7]]).unwrap();
        let data = Dataset::new(0, vec![seq(&[0, 0, 0])]);
        let trace = em_train(&init, &data, &TrainingConfig::with_iterations(1)).unwrap();
        assert_eq!(trace.final_model.b(), &[vec![1.0, 0.0]]);
        assert_eq!(trace.final_model.pi(), &[1.0]);
        assert_eq!(trace.iterations_run(), 1);
    }

    #[test]
    fn zero_iterations_rejected() {
        let init = initialize_model(2, 2, 1).unwrap();
        let data = Dataset::new(0, vec![seq(&[0, 1])]);
        assert!(em_train(&init, &data, &TrainingConfig::with_iterations(0)).is_err());
        let cfg = TrainingConfig {
            ll_tolerance: Some(-1.0),
            ..TrainingConfig::default()
        };
        assert!(em_train(&init, &data, &cfg).is_err());
    }

    #[test]
    fn symbol_outside_model_alphabet_is_rejected() {
        let init = initialize_model(2, 2, 1).unwrap();
        let data = Dataset::new(0, vec![seq(&[0, 1]), seq(&[2])]);
        let err = em_train(&init, &data, &TrainingConfig::default()).unwrap_err();
        assert!(err.to_string().contains("sequence 1"), "{err}");
    }

    #[test]
    fn impossible_sequence_names_index_and_iteration() {
        let init = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let data = Dataset::new(0, vec![seq(&[0, 1]), seq(&[1, 1])]);
        let err = em_train(&init, &data, &TrainingConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ImpossibleTrainingSequence { index: 1, iteration: 1 }));
    }

    #[test]
    fn unvisited_state_keeps_its_rows() {
        // state 1 can never be entered, so its transition and emission rows carry over
        let init = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.3, 0.7]],
            vec![vec![0.5, 0.5], vec![0.9, 0.1]],
        )
        .unwrap();
        let data = Dataset::new(0, vec![seq(&[0, 1, 1])]);
        let trace = em_train(&init, &data, &TrainingConfig::with_iterations(2)).unwrap();
        assert_eq!(trace.final_model.a()[1], vec![0.3, 0.7]);
        assert_eq!(trace.final_model.b()[1], vec![0.9, 0.1]);
        assert!(!trace.warnings.is_empty());
    }

    #[test]
    fn early_stop_on_tolerance() {
        let init = initialize_model(2, 3, 9).unwrap();
        let data = Dataset::new(0, vec![seq(&[0, 1, 2, 0]), seq(&[2, 2, 1])]);
        let cfg = TrainingConfig {
            iterations: 500,
            ll_tolerance: Some(1e-3),
            record_history: true,
        };
        let trace = em_train(&init, &data, &cfg).unwrap();
        assert!(trace.iterations_run() < 500);
        assert_eq!(trace.history.len(), trace.iterations_run());
    }

    #[test]
    fn unit_weights_match_classical_bitwise() {
        let init = initialize_model(3, 4, 2).unwrap();
        let seqs = vec![seq(&[0, 1, 2]), seq(&[3, 3]), seq(&[1, 0, 0, 2])];
        let data = Dataset::new(0, seqs.clone());
        let table = ClusterTable::unit_weight(seqs, 0).unwrap();
        let cfg = TrainingConfig::with_iterations(10);
        let a = em_train(&init, &data, &cfg).unwrap();
        let b = weighted_em_train(&init, &table, &cfg).unwrap();
        assert_eq!(a.final_model, b.final_model);
        assert_eq!(a.per_iteration_log_likelihood, b.per_iteration_log_likelihood);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let init = initialize_model(2, 2, 1).unwrap();
        let table = ClusterTable::new(0, vec![ClusterEntry { representative: seq(&[0, 1]), weight: 3 }]).unwrap();
        let trace = weighted_em_train(&init, &table, &TrainingConfig::with_iterations(3)).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "iteration,log_likelihood,cumulative_seconds");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("3,"));
    }
}
