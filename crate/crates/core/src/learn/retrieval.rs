use rand::seq::SliceRandom;
use serde::Serialize;

use super::DissimilarityMatrix;
use crate::error::{invalid_param, Error, Result};
use crate::rng::rng_from_seed;

/// Number of retrieved items scored by the E-measure.
pub const E_MEASURE_CUTOFF: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetrievalStats {
    pub nn: f64,
    pub ft: f64,
    pub st: f64,
    pub e: f64,
    pub dcg: f64,
}

/// Shape-retrieval statistics, each averaged over all queries. Every other
/// item is ranked by dissimilarity to the query, ties by index.
pub fn retrieval_stats(m: &DissimilarityMatrix, labels: &[usize]) -> Result<RetrievalStats> {
    let n = m.n();
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: n, right: labels.len() });
    }
    let kl = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut class_size = vec![0usize; kl];
    for &l in labels {
        class_size[l] += 1;
    }
    if let Some(l) = labels.iter().find(|&&l| class_size[l] < 2) {
        return Err(Error::Invalid(format!("class {l} has a single member")));
    }
    let mut acc = [0.0f64; 5];
    for q in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != q).collect();
        order.sort_by(|&a, &b| m.get(q, a).total_cmp(&m.get(q, b)).then(a.cmp(&b)));
        let rel: Vec<bool> = order.iter().map(|&j| labels[j] == labels[q]).collect();
        let c = class_size[labels[q]] - 1;
        let hits = |k: usize| rel.iter().take(k).filter(|&&r| r).count() as f64;
        acc[0] += if rel[0] { 1.0 } else { 0.0 };
        acc[1] += hits(c) / c as f64;
        acc[2] += hits(2 * c) / c as f64;
        let k = E_MEASURE_CUTOFF.min(rel.len());
        let h = hits(k);
        if h > 0.0 {
            let (p, r) = (h / k as f64, h / c as f64);
            acc[3] += 2.0 * p * r / (p + r);
        }
        let gain = |i: usize| if i == 0 { 1.0 } else { 1.0 / ((i + 1) as f64).log2() };
        let dcg: f64 = rel.iter().enumerate().filter(|(_, &r)| r).map(|(i, _)| gain(i)).sum();
        let ideal: f64 = (0..c).map(gain).sum();
        acc[4] += dcg / ideal;
    }
    let nf = n as f64;
    Ok(RetrievalStats {
        nn: acc[0] / nf,
        ft: acc[1] / nf,
        st: acc[2] / nf,
        e: acc[3] / nf,
        dcg: acc[4] / nf,
    })
}

/// Majority label among the `k` nearest training items of each test row;
/// distance ties go to the lower index, vote ties to the nearest voter.
/// `block` is row-major `tests x train_labels.len()`.
pub fn knn_classify(block: &[f64], train_labels: &[usize], k: usize) -> Result<Vec<usize>> {
    let nt = train_labels.len();
    if nt == 0 {
        return Err(Error::Invalid("empty training set".into()));
    }
    if k == 0 {
        return Err(invalid_param("k", "must be positive"));
    }
    if block.len() % nt != 0 {
        return Err(Error::LengthMismatch { left: block.len(), right: nt });
    }
    Ok(block
        .chunks(nt)
        .map(|row| {
            let mut order: Vec<usize> = (0..nt).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            let voters = &order[..k.min(nt)];
            let mut best = (0usize, train_labels[voters[0]]);
            for &v in voters {
                let l = train_labels[v];
                let count = voters.iter().filter(|&&u| train_labels[u] == l).count();
                if count > best.0 {
                    best = (count, l);
                }
            }
            best.1
        })
        .collect())
}

/// Seeded split of `0..n` into `folds` nearly equal folds.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n {
        return Err(invalid_param("folds", format!("need 2 <= folds <= {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    let mut out = vec![Vec::new(); folds];
    for (i, j) in idx.into_iter().enumerate() {
        out[i % folds].push(j);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Cross-validated 1-NN accuracy on a full dissimilarity matrix.
pub fn cv_accuracy(m: &DissimilarityMatrix, labels: &[usize], folds: &[Vec<usize>]) -> Result<f64> {
    let n = m.n();
    let mut correct = 0usize;
    let mut total = 0usize;
    for fold in folds {
        let mut is_test = vec![false; n];
        for &i in fold {
            is_test[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
        let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let block: Vec<f64> = fold
            .iter()
            .flat_map(|&t| train.iter().map(move |&j| m.get(t, j)))
            .collect();
        let pred = knn_classify(&block, &train_labels, 1)?;
        correct += fold.iter().zip(&pred).filter(|(&t, &p)| labels[t] == p).count();
        total += fold.len();
    }
    Ok(correct as f64 / total.max(1) as f64)
}
