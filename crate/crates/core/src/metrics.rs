//! p-Wasserstein distances between diagrams and Lp distances between
//! feature vectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment;
use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{invalid_param, Error, Result};
use crate::learn::DissimilarityMatrix;

/// An entry of a padded diagram: an original point, or the axis
/// projection of the opposite diagram's point with that index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    Point(usize),
    Projection(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingResult {
    pub cost: f64,
    pub p: f64,
    /// `(slot in padded d1, slot in padded d2)`; `Projection(j)` on the left
    /// is the projection of `d2[j]`, on the right the projection of `d1[j]`.
    pub pairs: Vec<(Slot, Slot)>,
}

fn slot_point(slot: Slot, own: &PersistenceDiagram, other: &PersistenceDiagram) -> DiagramPoint {
    match slot {
        Slot::Point(i) => own.points[i],
        Slot::Projection(j) => other.points[j].axis_projection(),
    }
}

fn pair_term(a: Slot, b: Slot, d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> f64 {
    if matches!((a, b), (Slot::Projection(_), Slot::Projection(_))) {
        // both pads may be placed at the same axis point
        return 0.0;
    }
    let pa = slot_point(a, d1, d2);
    let pb = slot_point(b, d2, d1);
    pa.sup_distance(&pb).powf(p)
}

/// Sums per-pair terms in ascending order and applies the outer root for
/// `p >= 1`.
pub fn finish_cost(mut terms: Vec<f64>, p: f64) -> f64 {
    terms.sort_by(f64::total_cmp);
    let s: f64 = terms.iter().sum();
    if p >= 1.0 {
        s.powf(1.0 / p)
    } else {
        s
    }
}

impl MatchingResult {
    /// Cost of the stored assignment, recomputed from scratch.
    pub fn reevaluate(&self, d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
        let terms = self
            .pairs
            .iter()
            .map(|&(a, b)| pair_term(a, b, d1, d2, self.p))
            .collect();
        finish_cost(terms, self.p)
    }

    /// True when no exchange of partners between two pairs lowers the
    /// summed cost (relative tolerance `1e-12`).
    pub fn is_locally_optimal(&self, d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> bool {
        let t = |a, b| pair_term(a, b, d1, d2, self.p);
        for (i, &(a1, b1)) in self.pairs.iter().enumerate() {
            for &(a2, b2) in &self.pairs[i + 1..] {
                let now = t(a1, b1) + t(a2, b2);
                let swapped = t(a1, b2) + t(a2, b1);
                if swapped < now - 1e-12 * now.max(1.0) {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact p-Wasserstein distance with sup-norm ground cost.
///
/// For `p >= 1` the result is `(sum ||.||^p)^(1/p)`; for `0 < p < 1` the
/// sum itself (no root), which is the metric form.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<MatchingResult> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid_param("p", format!("{p} must be positive and finite")));
    }
    let (n1, n2) = (d1.len(), d2.len());
    let n = n1 + n2;
    let row_slot = |r: usize| if r < n1 { Slot::Point(r) } else { Slot::Projection(r - n1) };
    let col_slot = |c: usize| if c < n2 { Slot::Point(c) } else { Slot::Projection(c - n2) };
    let mut cost = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            cost[r * n + c] = pair_term(row_slot(r), col_slot(c), d1, d2, p);
        }
    }
    let assign = assignment::solve(&cost, n);
    let pairs: Vec<(Slot, Slot)> = assign
        .iter()
        .enumerate()
        .map(|(r, &c)| (row_slot(r), col_slot(c)))
        .collect();
    let terms = assign.iter().enumerate().map(|(r, &c)| cost[r * n + c]).collect();
    Ok(MatchingResult {
        cost: finish_cost(terms, p),
        p,
        pairs,
    })
}

/// Shorthand for `wasserstein(..).cost`.
pub fn wasserstein_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<f64> {
    Ok(wasserstein(d1, d2, p)?.cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            "linf" | "l-inf" | "inf" => Ok(Self::Linf),
            other => Err(invalid_param("norm", format!("unknown norm `{other}`"))),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::L1 => "L1",
            Self::L2 => "L2",
            Self::Linf => "Linf",
        })
    }
}

pub fn vector_distance(v1: &[f64], v2: &[f64], norm: Norm) -> Result<f64> {
    if v1.len() != v2.len() {
        return Err(Error::LengthMismatch {
            left: v1.len(),
            right: v2.len(),
        });
    }
    let diffs = v1.iter().zip(v2).map(|(a, b)| (a - b).abs());
    Ok(match norm {
        Norm::L1 => diffs.sum(),
        Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Norm::Linf => diffs.fold(0.0, f64::max),
    })
}

/// Symmetric matrix of pairwise vector distances, zero diagonal.
pub fn pairwise_matrix<V: AsRef<[f64]> + Sync>(features: &[V], norm: Norm) -> Result<DissimilarityMatrix> {
    let n = features.len();
    if n == 0 {
        return Err(Error::Invalid("pairwise_matrix needs at least one vector".into()));
    }
    let len = features[0].as_ref().len();
    if let Some(bad) = features.iter().find(|f| f.as_ref().len() != len) {
        return Err(Error::LengthMismatch {
            left: len,
            right: bad.as_ref().len(),
        });
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| vector_distance(features[i].as_ref(), features[j].as_ref(), norm).unwrap())
                .collect()
        })
        .collect();
    let mut data = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (k, d) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DissimilarityMatrix::new(n, data)
}
