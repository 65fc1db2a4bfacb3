//! Brute-force oracles shared by the integration tests. None of these call
//! into the recursions they are used to check.
#![allow(dead_code)]

use hmmaccel_core::model::{HmmModel, ObservationSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seq(v: &[usize]) -> ObservationSequence {
    ObservationSequence::new(v.to_vec()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every warping path between lengths `n` and `m`, as 0-based index pairs.
pub fn all_warping_paths(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(n: usize, m: usize, path: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let (i, j) = *path.last().unwrap();
        if (i, j) == (n - 1, m - 1) {
            out.push(path.clone());
            return;
        }
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            let (a, b) = (i + di, j + dj);
            if a < n && b < m {
                path.push((a, b));
                rec(n, m, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, m, &mut vec![(0, 0)], &mut out);
    out
}

pub fn brute_force_dtw(x: &[usize], y: &[usize]) -> f64 {
    all_warping_paths(x.len(), y.len())
        .iter()
        .map(|p| p.iter().map(|&(i, j)| x[i].abs_diff(y[j]) as f64).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// All `base^len` index vectors in lexicographic order.
pub fn all_tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..base).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// P(Q, O | λ), multiplied left to right: π b, then a b per step.
pub fn joint_probability(model: &HmmModel, states: &[usize], obs: &[usize]) -> f64 {
    let mut p = model.pi()[states[0]] * model.b()[states[0]][obs[0]];
    for t in 1..obs.len() {
        p = p * model.a()[states[t - 1]][states[t]] * model.b()[states[t]][obs[t]];
    }
    p
}

pub fn brute_force_likelihood(model: &HmmModel, obs: &[usize]) -> f64 {
    all_tuples(model.n_states(), obs.len())
        .iter()
        .map(|q| joint_probability(model, q, obs))
        .sum()
}

/// Best state path; among equal maxima the one that is smallest when read
/// from the last step backwards.
pub fn brute_force_viterbi(model: &HmmModel, obs: &[usize]) -> (Vec<usize>, f64) {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for q in all_tuples(model.n_states(), obs.len()) {
        let p = joint_probability(model, &q, obs);
        let better = match &best {
            None => true,
            Some((bq, bp)) => {
                p > *bp || (p == *bp && q.iter().rev().lt(bq.iter().rev()))
            }
        };
        if better {
            best = Some((q, p));
        }
    }
    best.unwrap()
}

/// State and transition posteriors by exhaustive path enumeration.
pub fn brute_force_posteriors(model: &HmmModel, obs: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
    let n = model.n_states();
    let t_len = obs.len();
    let total = brute_force_likelihood(model, obs);
    let mut gamma = vec![vec![0.0; n]; t_len];
    let mut xi = vec![vec![vec![0.0; n]; n]; t_len.saturating_sub(1)];
    for q in all_tuples(n, t_len) {
        let p = joint_probability(model, &q, obs) / total;
        for t in 0..t_len {
            gamma[t][q[t]] += p;
            if t + 1 < t_len {
                xi[t][q[t]][q[t + 1]] += p;
            }
        }
    }
    (gamma, xi)
}

/// One weighted Baum-Welch update computed from enumerated posteriors.
pub fn brute_force_em_step(model: &HmmModel, data: &[(Vec<usize>, f64)]) -> HmmModel {
    let (n, m) = (model.n_states(), model.n_symbols());
    let mut pi = vec![0.0; n];
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![vec![0.0; m]; n];
    let mut wsum = 0.0;
    for (obs, w) in data {
        let (gamma, xi) = brute_force_posteriors(model, obs);
        wsum += w;
        for i in 0..n {
            pi[i] += w * gamma[0][i];
            for t in 0..obs.len() {
                b[i][obs[t]] += w * gamma[t][i];
            }
            for x in &xi {
                for j in 0..n {
                    a[i][j] += w * x[i][j];
                }
            }
        }
    }
    pi.iter_mut().for_each(|v| *v /= wsum);
    for row in a.iter_mut().chain(b.iter_mut()) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    HmmModel::new(pi, a, b).unwrap()
}

pub fn random_row<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn random_model<R: Rng>(rng: &mut R, n: usize, m: usize) -> HmmModel {
    let pi = random_row(rng, n);
    let a = (0..n).map(|_| random_row(rng, n)).collect();
    let b = (0..n).map(|_| random_row(rng, m)).collect();
    HmmModel::new(pi, a, b).unwrap()
}

pub fn random_symbols<R: Rng>(rng: &mut R, len: usize, m: usize) -> Vec<usize> {
    (0..len).map(|_| rng.gen_range(0..m)).collect()
}

pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

/// The 2T factors of P(Q, O | λ) as sorted bit patterns. Two paths with equal
/// multisets have the same probability in exact arithmetic.
pub fn path_factors(model: &HmmModel, states: &[usize], obs: &[usize]) -> Vec<u64> {
    let mut f = vec![model.pi()[states[0]].to_bits(), model.b()[states[0]][obs[0]].to_bits()];
    for t in 1..obs.len() {
        f.push(model.a()[states[t - 1]][states[t]].to_bits());
        f.push(model.b()[states[t]][obs[t]].to_bits());
    }
    f.sort_unstable();
    f
}
