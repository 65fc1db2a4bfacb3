//! Scaled forward-backward and Viterbi decoding.
//!
//! Forward variables are normalized to sum to one at every step; the
//! backward pass reuses the same per-step normalizers, the textbook
//! scaling scheme. `scaling[t]` holds the coefficient `c_t = 1 / Σ_i α_t(i)`
//! applied at step `t`, so `log P(O | λ) = -Σ_t ln c_t`.

use crate::error::{Error, Result};
use crate::model::{HmmModel, ObservationSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardBackwardResult {
    pub log_likelihood: f64,
    n_states: usize,
    len: usize,
    gamma: Vec<f64>,
    xi: Vec<f64>,
    scaling: Vec<f64>,
}

impl ForwardBackwardResult {
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// P(q_t = S_i | O, λ).
    pub fn gamma(&self, t: usize, i: usize) -> f64 {
        self.gamma[t * self.n_states + i]
    }

    pub fn gamma_row(&self, t: usize) -> &[f64] {
        &self.gamma[t * self.n_states..(t + 1) * self.n_states]
    }

    /// P(q_t = S_i, q_{t+1} = S_j | O, λ), for `t < T - 1`.
    pub fn xi(&self, t: usize, i: usize, j: usize) -> f64 {
        let n = self.n_states;
        self.xi[(t * n + i) * n + j]
    }

    /// The `N × N` slice ξ_t, row-major.
    pub fn xi_slice(&self, t: usize) -> &[f64] {
        let nn = self.n_states * self.n_states;
        &self.xi[t * nn..(t + 1) * nn]
    }

    /// Number of ξ slices, `T - 1`.
    pub fn n_transitions(&self) -> usize {
        self.len.saturating_sub(1)
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }
}

/// Normalized forward variables plus the normalizing sums `Σ_i α_t(i)`.
struct Forward {
    alpha: Vec<f64>,
    sums: Vec<f64>,
}

fn forward(model: &HmmModel, obs: &[usize]) -> Result<Forward> {
    let n = model.n_states();
    let (pi, a, b) = (model.pi(), model.a(), model.b());
    let mut alpha = vec![0.0; obs.len() * n];
    let mut sums = Vec::with_capacity(obs.len());

    for (t, &o) in obs.iter().enumerate() {
        let (done, rest) = alpha.split_at_mut(t * n);
        let cur = &mut rest[..n];
        if t == 0 {
            for i in 0..n {
                cur[i] = pi[i] * b[i][o];
            }
        } else {
            let prev = &done[(t - 1) * n..];
            for j in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += prev[i] * a[i][j];
                }
                cur[j] = s * b[j][o];
            }
        }
        let sum: f64 = cur.iter().sum();
        if sum == 0.0 {
            return Err(Error::ImpossibleSequence);
        }
        cur.iter_mut().for_each(|v| *v /= sum);
        sums.push(sum);
    }
    Ok(Forward { alpha, sums })
}

/// State posteriors γ, transition posteriors ξ and log P(O | λ).
pub fn forward_backward(
    model: &HmmModel,
    seq: &ObservationSequence,
) -> Result<ForwardBackwardResult> {
    model.check_sequence(seq)?;
    let obs = seq.symbols();
    let n = model.n_states();
    let len = obs.len();
    let (a, b) = (model.a(), model.b());
    let Forward { alpha, sums } = forward(model, obs)?;

    // beta[t] holds β_t(i) divided by the forward sums of steps t+1..T
    let mut beta = vec![0.0; len * n];
    beta[(len - 1) * n..].fill(1.0);
    for t in (0..len - 1).rev() {
        let o = obs[t + 1];
        let (head, tail) = beta.split_at_mut((t + 1) * n);
        let next = &tail[..n];
        let cur = &mut head[t * n..];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += a[i][j] * b[j][o] * next[j];
            }
            cur[i] = s / sums[t + 1];
        }
    }

    let gamma: Vec<f64> = alpha.iter().zip(&beta).map(|(x, y)| x * y).collect();

    let mut xi = vec![0.0; len.saturating_sub(1) * n * n];
    for t in 0..len.saturating_sub(1) {
        let o = obs[t + 1];
        let scale = sums[t + 1];
        for i in 0..n {
            let ai = alpha[t * n + i];
            for j in 0..n {
                xi[(t * n + i) * n + j] = ai * a[i][j] * b[j][o] * beta[(t + 1) * n + j] / scale;
            }
        }
    }

    Ok(ForwardBackwardResult {
        log_likelihood: sums.iter().map(|s| s.ln()).sum(),
        n_states: n,
        len,
        gamma,
        xi,
        scaling: sums.iter().map(|s| 1.0 / s).collect(),
    })
}

/// log P(O | λ) from the scaled forward pass alone.
pub fn likelihood(model: &HmmModel, seq: &ObservationSequence) -> Result<f64> {
    model.check_sequence(seq)?;
    let fwd = forward(model, seq.symbols())?;
    Ok(fwd.sums.iter().map(|s| s.ln()).sum())
}

// Rescaling by a power of two is exact, so small paths keep bit-identical
// products with a direct left-to-right evaluation.
const RESCALE_EXP: i32 = 500;

/// Most probable state path and its joint log-probability log P(Q, O | λ).
///
/// Ties go to the lowest state index, both for the final state and for
/// every back-pointer.
pub fn viterbi(model: &HmmModel, seq: &ObservationSequence) -> Result<(Vec<usize>, f64)> {
    model.check_sequence(seq)?;
    let obs = seq.symbols();
    let n = model.n_states();
    let (pi, a, b) = (model.pi(), model.a(), model.b());
    let threshold = 2f64.powi(-RESCALE_EXP);
    let boost = 2f64.powi(RESCALE_EXP);

    let mut delta: Vec<f64> = (0..n).map(|i| pi[i] * b[i][obs[0]]).collect();
    let mut next = vec![0.0; n];
    let mut back = vec![0usize; obs.len() * n];
    let mut rescales = 0i64;

    for (t, &o) in obs.iter().enumerate() {
        if t > 0 {
            for j in 0..n {
                let mut best = delta[0] * a[0][j];
                let mut arg = 0;
                for i in 1..n {
                    let v = delta[i] * a[i][j];
                    if v > best {
                        best = v;
                        arg = i;
                    }
                }
                next[j] = best * b[j][o];
                back[t * n + j] = arg;
            }
            std::mem::swap(&mut delta, &mut next);
        }
        let max = delta.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return Err(Error::ImpossibleSequence);
        }
        if max < threshold {
            delta.iter_mut().for_each(|v| *v *= boost);
            rescales += 1;
        }
    }

    let mut last = 0;
    for j in 1..n {
        if delta[j] > delta[last] {
            last = j;
        }
    }
    let log_prob = delta[last].ln() - (rescales * RESCALE_EXP as i64) as f64 * std::f64::consts::LN_2;

    let mut path = vec![0; obs.len()];
    path[obs.len() - 1] = last;
    for t in (1..obs.len()).rev() {
        path[t - 1] = back[t * n + path[t]];
    }
    Ok((path, log_prob))
}
