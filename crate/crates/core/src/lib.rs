//! Discrete-observation HMM training accelerated by clustering redundant
//! training sequences into weighted representatives.
//!
//! The pipeline: [`cluster::build_clusters`] groups a category's sequences
//! whose distance (Euclidean or DTW) is exactly zero and counts them;
//! [`train::weighted_em_train`] then runs Baum-Welch over the representatives,
//! scaling each one's expected counts by its cluster weight. With exact-duplicate
//! grouping the result matches [`train::em_train`] on the full data.

pub mod bench;
pub mod cluster;
pub mod dtw;
pub mod error;
pub mod inference;
pub mod model;
pub mod parallel;
pub mod train;

pub use cluster::{build_clusters, filter_low_weight, ClusterEntry, ClusterTable, Distance};
pub use dtw::{dtw_distance, euclidean_distance, local_cost, run_length_collapse, DtwResult};
pub use error::{Error, Result};
pub use inference::{forward_backward, likelihood, viterbi, ForwardBackwardResult};
pub use model::{
    sample_sequences, validate_model, Dataset, HmmModel, ModelParams, ObservationSequence,
};
pub use train::{em_train, initialize_model, weighted_em_train, TrainingConfig, TrainingTrace};
