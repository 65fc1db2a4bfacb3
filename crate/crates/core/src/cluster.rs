//! Zero-distance clustering of a category's training sequences.
//!
//! Sequences are scanned in input order. Each one joins the first existing
//! cluster whose representative is at distance exactly zero, or else opens a
//! new cluster with itself as representative. The cluster weight counts the
//! merged instances, so no training information is lost.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dtw::{dtw_cost, euclidean_distance};
use crate::error::{Error, Result};
use crate::model::{Dataset, ObservationSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Dtw,
    Euclidean,
}

impl Distance {
    pub fn between(self, x: &ObservationSequence, y: &ObservationSequence) -> Result<f64> {
        match self {
            Distance::Dtw => dtw_cost(x.symbols(), y.symbols()),
            Distance::Euclidean => euclidean_distance(x.symbols(), y.symbols()),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Dtw => "dtw",
            Distance::Euclidean => "euclidean",
        })
    }
}

impl FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dtw" => Ok(Distance::Dtw),
            "euclidean" => Ok(Distance::Euclidean),
            other => Err(Error::InvalidArgument(format!("unknown distance {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub representative: ObservationSequence,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct ClusterTable {
    pub category_id: u32,
    pub total_weight: u64,
    pub entries: Vec<ClusterEntry>,
}

#[derive(Deserialize)]
struct RawTable {
    category_id: u32,
    total_weight: u64,
    entries: Vec<ClusterEntry>,
}

impl TryFrom<RawTable> for ClusterTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        Self::new(raw.category_id, raw.entries).and_then(|t| {
            if t.total_weight == raw.total_weight {
                Ok(t)
            } else {
                Err(Error::InvalidArgument(format!(
                    "total_weight {} does not match the sum of weights {}",
                    raw.total_weight, t.total_weight
                )))
            }
        })
    }
}

impl ClusterTable {
    pub fn new(category_id: u32, entries: Vec<ClusterEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if entries.iter().any(|e| e.weight == 0) {
            return Err(Error::InvalidArgument("cluster weight must be at least 1".into()));
        }
        let total_weight = entries.iter().map(|e| e.weight).sum();
        Ok(Self {
            category_id,
            total_weight,
            entries,
        })
    }

    /// Every representative at weight one, in table order.
    pub fn unit_weight(sequences: Vec<ObservationSequence>, category_id: u32) -> Result<Self> {
        let entries = sequences
            .into_iter()
            .map(|representative| ClusterEntry {
                representative,
                weight: 1,
            })
            .collect();
        Self::new(category_id, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn representatives(&self) -> Dataset {
        Dataset::new(
            self.category_id,
            self.entries.iter().map(|e| e.representative.clone()).collect(),
        )
    }

    /// Each representative repeated `weight` times, in table order.
    pub fn expand(&self) -> Dataset {
        let sequences = self
            .entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.representative.clone(), e.weight as usize))
            .collect();
        Dataset::new(self.category_id, sequences)
    }

    pub fn weights(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.weight).collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// JSON text with the header fields first and one entry per line.
    pub fn to_json_string(&self) -> String {
        let entries: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("    {}", serde_json::to_string(e).expect("entries serialize")))
            .collect();
        format!(
            "{{\n  \"category_id\": {},\n  \"total_weight\": {},\n  \"entries\": [\n{}\n  ]\n}}\n",
            self.category_id,
            self.total_weight,
            entries.join(",\n")
        )
    }
}

/// Clusters `data` with the exact-duplicate pre-pass enabled.
pub fn build_clusters(data: &Dataset, distance: Distance) -> Result<ClusterTable> {
    build_clusters_with(data, distance, true)
}

/// Clusters `data`. With `dedup_prepass`, a sequence identical to one seen
/// earlier goes straight to that sequence's cluster; the result is the same
/// table the plain scan produces.
pub fn build_clusters_with(
    data: &Dataset,
    distance: Distance,
    dedup_prepass: bool,
) -> Result<ClusterTable> {
    let first = data.sequences.first().ok_or(Error::EmptyDataset)?;
    if distance == Distance::Euclidean {
        let expected = first.len();
        if let Some(index) = data.sequences.iter().position(|s| s.len() != expected) {
            return Err(Error::MixedLengths {
                index,
                expected,
                found: data.sequences[index].len(),
            });
        }
    }

    let mut entries: Vec<ClusterEntry> = Vec::new();
    let mut seen: HashMap<&[usize], usize> = HashMap::new();

    for seq in &data.sequences {
        if dedup_prepass {
            if let Some(&k) = seen.get(seq.symbols()) {
                entries[k].weight += 1;
                continue;
            }
        }
        let mut target = None;
        for (k, entry) in entries.iter().enumerate() {
            if distance.between(seq, &entry.representative)? == 0.0 {
                target = Some(k);
                break;
            }
        }
        let k = match target {
            Some(k) => {
                entries[k].weight += 1;
                k
            }
            None => {
                entries.push(ClusterEntry {
                    representative: seq.clone(),
                    weight: 1,
                });
                entries.len() - 1
            }
        };
        if dedup_prepass {
            seen.insert(seq.symbols(), k);
        }
    }

    ClusterTable::new(data.category_id, entries)
}

/// Keeps only clusters of weight at least `min_weight`.
pub fn filter_low_weight(table: &ClusterTable, min_weight: u64) -> Result<ClusterTable> {
    if min_weight == 0 {
        return Err(Error::InvalidArgument("min_weight must be at least 1".into()));
    }
    let kept: Vec<ClusterEntry> = table
        .entries
        .iter()
        .filter(|e| e.weight >= min_weight)
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(Error::AllClustersFiltered);
    }
    ClusterTable::new(table.category_id, kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(items: &[&str]) -> Dataset {
        Dataset::new(
            0,
            items
                .iter()
                .map(|s| ObservationSequence::from_digits(s).unwrap())
                .collect(),
        )
    }

    fn worked_example() -> Dataset {
        dataset(&["1234567", "1222234", "1123334", "1222344"])
    }

    #[test]
    fn worked_example_dtw_gives_two_clusters() {
        let t = build_clusters(&worked_example(), Distance::Dtw).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.entries[0].representative.to_string(), "1 2 3 4 5 6 7");
        assert_eq!(t.entries[1].representative.to_string(), "1 2 2 2 2 3 4");
        assert_eq!(t.weights(), vec![1, 3]);
        assert_eq!(t.total_weight, 4);
    }

    #[test]
    fn worked_example_euclidean_gives_four_clusters() {
        let t = build_clusters(&worked_example(), Distance::Euclidean).unwrap();
        assert_eq!(t.weights(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn copies_collapse_to_one_cluster() {
        let d = dataset(&["3141"; 9]);
        for dist in [Distance::Dtw, Distance::Euclidean] {
            let t = build_clusters(&d, dist).unwrap();
            assert_eq!(t.weights(), vec![9]);
        }
    }

    #[test]
    fn euclidean_rejects_mixed_lengths() {
        let d = dataset(&["123", "123", "1234"]);
        let err = build_clusters(&d, Distance::Euclidean).unwrap_err();
        assert!(matches!(err, Error::MixedLengths { index: 2, expected: 3, found: 4 }));
        // DTW is fine with it
        assert_eq!(build_clusters(&d, Distance::Dtw).unwrap().len(), 2);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let d = Dataset::new(0, vec![]);
        assert!(matches!(build_clusters(&d, Distance::Dtw), Err(Error::EmptyDataset)));
    }

    #[test]
    fn prepass_does_not_change_the_table() {
        let d = dataset(&["1123", "123", "1123", "2", "22", "123", "1233", "2"]);
        assert_eq!(
            build_clusters_with(&d, Distance::Dtw, true).unwrap(),
            build_clusters_with(&d, Distance::Dtw, false).unwrap()
        );
    }

    fn table(weights: &[u64]) -> ClusterTable {
        let entries = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| ClusterEntry {
                representative: ObservationSequence::new(vec![i]).unwrap(),
                weight: w,
            })
            .collect();
        ClusterTable::new(0, entries).unwrap()
    }

    #[test]
    fn filter_examples() {
        let t = table(&[5, 1]);
        assert_eq!(filter_low_weight(&t, 1).unwrap(), t);
        let f = filter_low_weight(&t, 2).unwrap();
        assert_eq!(f.weights(), vec![5]);
        assert_eq!(f.total_weight, 5);
        assert!(matches!(
            filter_low_weight(&table(&[1]), 2),
            Err(Error::AllClustersFiltered)
        ));
        assert!(filter_low_weight(&t, 0).is_err());
    }

    #[test]
    fn json_checks_total_weight() {
        let t = table(&[2, 3]);
        let text = t.to_json_string();
        assert_eq!(ClusterTable::from_json_str(&text).unwrap(), t);
        let bad = text.replace("\"total_weight\": 5", "\"total_weight\": 6");
        assert!(ClusterTable::from_json_str(&bad).is_err());
    }

    #[test]
    fn expand_repeats_in_order() {
        let t = table(&[2, 1]);
        let d = t.expand();
        let syms: Vec<_> = d.sequences.iter().map(|s| s.symbols()[0]).collect();
        assert_eq!(syms, vec![0, 0, 1]);
    }
}
