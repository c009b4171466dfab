//! Learning on dissimilarity matrices: K-medoids, cluster validation,
//! retrieval statistics and nearest-neighbour classification.

mod kmedoids;
mod retrieval;

pub use kmedoids::{clustering_accuracy, davies_bouldin, k_medoids, select_tau, ClusteringResult, TauSelection};
pub use retrieval::{cv_accuracy, kfold_indices, knn_classify, retrieval_stats, RetrievalStats};

use std::fmt::Write as _;

use crate::diagram::fmt_f64;
use crate::error::{Error, Result};

/// Symmetric, nonnegative, zero-diagonal `n x n` matrix with item ids.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    data: Vec<f64>,
    ids: Vec<String>,
}

impl DissimilarityMatrix {
    /// Validates `data` (row-major). Ids default to `0..n`.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::Invalid(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !(a >= 0.0 && a.is_finite()) || a != b {
                    return Err(Error::Invalid(format!(
                        "entry ({i}, {j}) must be finite, nonnegative and symmetric"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            data,
            ids: (0..n).map(|i| i.to_string()).collect(),
        })
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: ids.len(),
            });
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Square CSV with a header row of item ids.
    pub fn to_csv(&self) -> String {
        let mut s = self.ids.join(",");
        s.push('\n');
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let ids: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let n = ids.len();
        let mut data = Vec::with_capacity(n * n);
        for (k, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: k + 2,
                    msg: "non-numeric entry".into(),
                })?;
            if row.len() != n {
                return Err(Error::Parse {
                    line: k + 2,
                    msg: format!("expected {n} columns, found {}", row.len()),
                });
            }
            data.extend(row);
        }
        Self::new(n, data)?.with_ids(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = DissimilarityMatrix::new(3, vec![0.0, 1.0, 0.1, 1.0, 0.0, 2.0, 0.1, 2.0, 0.0])
            .unwrap()
            .with_ids(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let back = DissimilarityMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn validation() {
        assert!(DissimilarityMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(DissimilarityMatrix::new(2, vec![0.0]).is_err());
    }
}
