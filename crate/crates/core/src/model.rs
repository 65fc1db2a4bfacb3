//! HMM parameter set, observation sequences and synthetic sampling.
//!
//! Symbols are 0-based indices into the alphabet. All randomness goes
//! through [`ChaCha8Rng`] seeded with `seed_from_u64`, so a given seed
//! produces the same sequences on every platform.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums must be within this distance of 1.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// A single broken invariant of an [`HmmModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStates,
    NoSymbols,
    Shape {
        field: String,
        expected: usize,
        found: usize,
    },
    EntryOutOfRange {
        field: String,
        value: f64,
    },
    RowSum {
        field: String,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "n_states must be at least 1"),
            Violation::NoSymbols => write!(f, "n_symbols must be at least 1"),
            Violation::Shape {
                field,
                expected,
                found,
            } => write!(f, "{field} has length {found}, expected {expected}"),
            Violation::EntryOutOfRange { field, value } => {
                write!(f, "{field} = {value} is outside [0, 1]")
            }
            Violation::RowSum { field, sum } => write!(f, "{field} sums to {sum}"),
        }
    }
}

/// Raw parameter layout shared by the JSON model file and [`HmmModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_states: usize,
    pub n_symbols: usize,
    pub pi: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

/// Checks every stochasticity and shape invariant, reporting all violations.
pub fn validate_model(params: &ModelParams) -> Vec<Violation> {
    validate_with_tolerance(params, STOCHASTIC_TOLERANCE)
}

pub(crate) fn validate_with_tolerance(params: &ModelParams, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    if params.n_states == 0 {
        out.push(Violation::NoStates);
    }
    if params.n_symbols == 0 {
        out.push(Violation::NoSymbols);
    }
    check_row(&mut out, "pi", &params.pi, params.n_states, tol);

    if params.a.len() != params.n_states {
        out.push(Violation::Shape {
            field: "a".into(),
            expected: params.n_states,
            found: params.a.len(),
        });
    }
    for (i, row) in params.a.iter().enumerate() {
        check_row(&mut out, &format!("a row {i}"), row, params.n_states, tol);
    }

    if params.b.len() != params.n_states {
        out.push(Violation::Shape {
            field: "b".into(),
            expected: params.n_states,
            found: params.b.len(),
        });
    }
    for (i, row) in params.b.iter().enumerate() {
        check_row(&mut out, &format!("b row {i}"), row, params.n_symbols, tol);
    }
    out
}

fn check_row(out: &mut Vec<Violation>, field: &str, row: &[f64], len: usize, tol: f64) {
    if row.len() != len {
        out.push(Violation::Shape {
            field: field.to_string(),
            expected: len,
            found: row.len(),
        });
    }
    for (k, &v) in row.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            out.push(Violation::EntryOutOfRange {
                field: format!("{field}[{k}]"),
                value: v,
            });
        }
    }
    if row.is_empty() {
        return;
    }
    let sum: f64 = row.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > tol {
        out.push(Violation::RowSum {
            field: field.to_string(),
            sum,
        });
    }
}

/// A validated discrete HMM, λ = (A, B, π).
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    params: ModelParams,
}

impl HmmModel {
    pub fn new(pi: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self> {
        let params = ModelParams {
            n_states: pi.len(),
            n_symbols: b.first().map_or(0, Vec::len),
            pi,
            a,
            b,
        };
        Self::from_params(params)
    }

    pub fn from_params(params: ModelParams) -> Result<Self> {
        let violations = validate_model(&params);
        if violations.is_empty() {
            Ok(Self { params })
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    /// Like [`HmmModel::from_params`], but rows whose sums are off are
    /// rescaled to sum to one first. Negative entries and shape errors are
    /// still rejected.
    pub fn from_params_renormalized(mut params: ModelParams) -> Result<Self> {
        normalize_row(&mut params.pi);
        params.a.iter_mut().for_each(|r| normalize_row(r));
        params.b.iter_mut().for_each(|r| normalize_row(r));
        Self::from_params(params)
    }

    /// Builds a model without running the validator. Callers must uphold
    /// the stochasticity invariants themselves.
    pub(crate) fn from_params_unchecked(params: ModelParams) -> Self {
        debug_assert!(validate_model(&params).is_empty());
        Self { params }
    }

    pub fn from_json_str(text: &str, renormalize: bool) -> Result<Self> {
        let params: ModelParams = serde_json::from_str(text)?;
        if renormalize {
            Self::from_params_renormalized(params)
        } else {
            Self::from_params(params)
        }
    }

    /// JSON model file text, one matrix row per line, numbers at full precision.
    pub fn to_json_string(&self) -> String {
        let row = |r: &[f64]| serde_json::to_string(r).expect("finite floats serialize");
        let rows = |m: &[Vec<f64>]| {
            m.iter()
                .map(|r| format!("    {}", row(r)))
                .collect::<Vec<_>>()
                .join(",\n")
        };
        let p = &self.params;
        format!(
            "{{\n  \"n_states\": {},\n  \"n_symbols\": {},\n  \"pi\": {},\n  \"a\": [\n{}\n  ],\n  \"b\": [\n{}\n  ]\n}}\n",
            p.n_states,
            p.n_symbols,
            row(&p.pi),
            rows(&p.a),
            rows(&p.b)
        )
    }

    pub fn n_states(&self) -> usize {
        self.params.n_states
    }

    pub fn n_symbols(&self) -> usize {
        self.params.n_symbols
    }

    pub fn pi(&self) -> &[f64] {
        &self.params.pi
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.params.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.params.b
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn into_params(self) -> ModelParams {
        self.params
    }

    /// Every parameter in a fixed order: π, then A row-major, then B row-major.
    pub fn flat_params(&self) -> Vec<f64> {
        let p = &self.params;
        p.pi.iter()
            .chain(p.a.iter().flatten())
            .chain(p.b.iter().flatten())
            .copied()
            .collect()
    }

    /// Largest absolute per-entry difference between two models of the same shape.
    pub fn max_abs_diff(&self, other: &HmmModel) -> f64 {
        assert_eq!(self.n_states(), other.n_states());
        assert_eq!(self.n_symbols(), other.n_symbols());
        self.flat_params()
            .iter()
            .zip(other.flat_params())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_sequence(&self, seq: &ObservationSequence) -> Result<()> {
        seq.check_symbols(self.n_symbols())
    }
}

fn normalize_row(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        row.iter_mut().for_each(|v| *v /= sum);
    }
}

/// One observation sequence O_1..O_T of 0-based symbol indices, T ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ObservationSequence(Vec<usize>);

impl ObservationSequence {
    pub fn new(symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self(symbols))
    }

    /// Parses a string of decimal digits such as `"1222234"`, one symbol per digit.
    pub fn from_digits(digits: &str) -> Result<Self> {
        let symbols = digits
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::InvalidArgument(format!("not a digit: {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_symbol(&self) -> usize {
        *self.0.iter().max().expect("sequences are non-empty")
    }

    pub fn check_symbols(&self, n_symbols: usize) -> Result<()> {
        match self.0.iter().position(|&s| s >= n_symbols) {
            Some(position) => Err(Error::SymbolOutOfRange {
                symbol: self.0[position],
                position,
                n_symbols,
            }),
            None => Ok(()),
        }
    }

    /// Subtracts `offset` from every symbol, mapping 1-based alphabets onto 0-based indices.
    pub fn rebased(&self, offset: usize) -> Result<Self> {
        let symbols = self
            .0
            .iter()
            .map(|&s| {
                s.checked_sub(offset).ok_or_else(|| {
                    Error::InvalidArgument(format!("symbol {s} is below offset {offset}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }
}

impl TryFrom<Vec<usize>> for ObservationSequence {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ObservationSequence> for Vec<usize> {
    fn from(s: ObservationSequence) -> Self {
        s.0
    }
}

impl fmt::Display for ObservationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// The training instances of one category, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub category_id: u32,
    pub sequences: Vec<ObservationSequence>,
}

impl Dataset {
    pub fn new(category_id: u32, sequences: Vec<ObservationSequence>) -> Self {
        Self {
            category_id,
            sequences,
        }
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Smallest alphabet size that covers every symbol in the dataset.
    pub fn alphabet_size(&self) -> usize {
        self.sequences
            .iter()
            .map(|s| s.max_symbol() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Renders the dataset in the sequence file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sequences {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }
}

/// A parsed sequence file: the sequences plus the 1-based line each came from.
#[derive(Debug, Clone)]
pub struct SequenceFile {
    pub sequences: Vec<ObservationSequence>,
    pub lines: Vec<usize>,
}

impl SequenceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sequences = Vec::new();
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let symbols = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid symbol {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            sequences.push(ObservationSequence::new(symbols)?);
            lines.push(line_no);
        }
        Ok(Self { sequences, lines })
    }

    /// Source line of the sequence at `index`, for error messages.
    pub fn line_of(&self, index: usize) -> usize {
        self.lines.get(index).copied().unwrap_or(index + 1)
    }

    pub fn into_dataset(self, category_id: u32) -> Dataset {
        Dataset::new(category_id, self.sequences)
    }
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent sub-seed for sub-step `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Draws an index from a discrete distribution. Zero-probability entries are never chosen.
pub(crate) fn sample_categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    // u landed in the rounding gap above the final cumulative sum
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("distribution has positive mass")
}

/// Samples `count` sequences of exactly `length` symbols from `model`.
pub fn sample_sequences(
    model: &HmmModel,
    count: usize,
    length: usize,
    seed: u64,
) -> Result<Dataset> {
    let violations = validate_model(model.params());
    if !violations.is_empty() {
        return Err(Error::InvalidModel(violations));
    }
    if count == 0 || length == 0 {
        return Err(Error::InvalidArgument(
            "count and length must be at least 1".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let sequences = (0..count)
        .map(|_| {
            let mut state = sample_categorical(&mut rng, model.pi());
            let mut symbols = Vec::with_capacity(length);
            for t in 0..length {
                symbols.push(sample_categorical(&mut rng, &model.b()[state]));
                if t + 1 < length {
                    state = sample_categorical(&mut rng, &model.a()[state]);
                }
            }
            ObservationSequence(symbols)
        })
        .collect();
    Ok(Dataset::new(0, sequences))
}

/// The 3-state, 10-symbol generator model used by the benchmark harness.
pub fn bundled_bench_model() -> HmmModel {
    HmmModel::from_json_str(include_str!("../data/bench_model.json"), false)
        .expect("bundled model is valid")
}
