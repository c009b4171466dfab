use serde::Serialize;

use super::DissimilarityMatrix;
use crate::assignment;
use crate::error::{invalid_param, Error, Result};

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringResult {
    /// Medoid item indices, ascending; cluster `c` is `medoids[c]`.
    pub medoids: Vec<usize>,
    /// Cluster index of each item.
    pub assignment: Vec<usize>,
    pub cost: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Total cost after BUILD and after each accepted swap.
    pub cost_trace: Vec<f64>,
}

fn nearest(m: &DissimilarityMatrix, medoids: &[usize], i: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, &md) in medoids.iter().enumerate() {
        if md == i {
            return (c, 0.0);
        }
        let d = m.get(i, md);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn total_cost(m: &DissimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..m.n()).map(|i| nearest(m, medoids, i).1).sum()
}

/// PAM: greedy BUILD, then best-improvement SWAP sweeps until no swap
/// lowers the cost (at most 100 sweeps). Fully deterministic.
pub fn k_medoids(m: &DissimilarityMatrix, k: usize) -> Result<ClusteringResult> {
    let n = m.n();
    if k == 0 || k > n {
        return Err(invalid_param("k", format!("need 1 <= k <= n = {n}, got {k}")));
    }
    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut dnear = vec![f64::INFINITY; n];
    for _ in 0..k {
        let mut best = (usize::MAX, f64::INFINITY);
        for cand in (0..n).filter(|c| !medoids.contains(c)) {
            let cost: f64 = (0..n).map(|i| dnear[i].min(m.get(i, cand))).sum();
            if cost < best.1 {
                best = (cand, cost);
            }
        }
        medoids.push(best.0);
        for (i, d) in dnear.iter_mut().enumerate() {
            *d = d.min(m.get(i, best.0));
        }
    }
    let mut cost = total_cost(m, &medoids);
    let mut trace = vec![cost];
    // SWAP
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..k {
            for h in (0..n).filter(|h| !medoids.contains(h)) {
                let mut trial = medoids.clone();
                trial[slot] = h;
                let c = total_cost(m, &trial);
                if best.is_none_or(|(_, _, b)| c < b) {
                    best = Some((slot, h, c));
                }
            }
        }
        match best {
            Some((slot, h, c)) if c < cost - 1e-12 * cost.abs().max(f64::MIN_POSITIVE) => {
                medoids[slot] = h;
                cost = c;
                trace.push(cost);
            }
            _ => {
                converged = true;
                break;
            }
        }
    }
    medoids.sort_unstable();
    let assignment: Vec<usize> = (0..n).map(|i| nearest(m, &medoids, i).0).collect();
    Ok(ClusteringResult {
        cost: total_cost(m, &medoids),
        medoids,
        assignment,
        sweeps,
        converged,
        cost_trace: trace,
    })
}

/// Davies-Bouldin index with medoids as cluster centres.
pub fn davies_bouldin(m: &DissimilarityMatrix, r: &ClusteringResult) -> Result<f64> {
    let k = r.medoids.len();
    if k < 2 {
        return Err(Error::Invalid("Davies-Bouldin needs at least two clusters".into()));
    }
    let mut spread = vec![0.0; k];
    let mut size = vec![0usize; k];
    for (i, &c) in r.assignment.iter().enumerate() {
        spread[c] += m.get(i, r.medoids[c]);
        size[c] += 1;
    }
    for c in 0..k {
        spread[c] /= size[c].max(1) as f64;
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in (0..k).filter(|&j| j != i) {
            let sep = m.get(r.medoids[i], r.medoids[j]);
            if sep == 0.0 {
                return Err(Error::Invalid(format!(
                    "medoids {} and {} coincide",
                    r.medoids[i], r.medoids[j]
                )));
            }
            worst = worst.max((spread[i] + spread[j]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSelection {
    pub tau: f64,
    /// `(tau, Davies-Bouldin)` in input order.
    pub table: Vec<(f64, f64)>,
}

/// Evaluates `score(tau)` (a Davies-Bouldin index) for every candidate and
/// returns the minimiser, ties going to the smaller `tau`.
pub fn select_tau<F>(taus: &[f64], mut score: F) -> Result<TauSelection>
where
    F: FnMut(f64) -> Result<f64>,
{
    if taus.is_empty() {
        return Err(invalid_param("taus", "empty candidate list"));
    }
    let mut table = Vec::with_capacity(taus.len());
    for &t in taus {
        table.push((t, score(t)?));
    }
    let mut best = table[0];
    for &(t, s) in &table[1..] {
        if s < best.1 || (s == best.1 && t < best.0) {
            best = (t, s);
        }
    }
    Ok(TauSelection { tau: best.0, table })
}

/// Best fraction of items whose cluster maps to their label under a
/// one-to-one cluster/label correspondence. Unequal counts fall back to a
/// rectangular assignment.
pub fn clustering_accuracy(assignment: &[usize], labels: &[usize]) -> Result<f64> {
    if assignment.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::Invalid("no items".into()));
    }
    let kc = assignment.iter().max().unwrap() + 1;
    let kl = labels.iter().max().unwrap() + 1;
    let mut conf = vec![0.0; kc * kl];
    for (&c, &l) in assignment.iter().zip(labels) {
        conf[c * kl + l] += 1.0;
    }
    let big = labels.len() as f64;
    let cost: Vec<f64> = conf.iter().map(|x| big - x).collect();
    let matched = assignment::solve_rect(&cost, kc, kl);
    let correct: f64 = matched
        .iter()
        .enumerate()
        .filter_map(|(c, l)| l.map(|l| conf[c * kl + l]))
        .sum();
    Ok(correct / big)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{pairwise_matrix, Norm};
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn line(xs: &[f64]) -> DissimilarityMatrix {
        let v: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        pairwise_matrix(&v, Norm::L1).unwrap()
    }

    #[test]
    fn separated_clusters() {
        let r = k_medoids(&line(&[0.0, 0.1, 10.0, 10.1]), 2).unwrap();
        assert_eq!(r.assignment[0], r.assignment[1]);
        assert_eq!(r.assignment[2], r.assignment[3]);
        assert_ne!(r.assignment[0], r.assignment[2]);
        assert!(r.converged);
    }

    #[test]
    fn k_equals_n() {
        let r = k_medoids(&line(&[0.0, 1.0, 5.0]), 3).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.medoids, vec![0, 1, 2]);
        assert!(k_medoids(&line(&[0.0]), 2).is_err());
    }

    #[test]
    fn swap_audit_and_monotone_trace() {
        let mut rng = rng_from_seed(8);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
            let m = pairwise_matrix(&pts, Norm::L2).unwrap();
            let r = k_medoids(&m, 3).unwrap();
            for w in r.cost_trace.windows(2) {
                assert!(w[1] <= w[0]);
            }
            for slot in 0..3 {
                for h in (0..20).filter(|h| !r.medoids.contains(h)) {
                    let mut t = r.medoids.clone();
                    t[slot] = h;
                    assert!(r.cost <= total_cost(&m, &t) + 1e-12);
                }
            }
            for (c, &md) in r.medoids.iter().enumerate() {
                assert_eq!(r.assignment[md], c);
            }
        }
    }

    #[test]
    fn permutation_invariance() {
        let xs = [0.0, 0.3, 0.35, 4.0, 4.2, 9.0, 9.5, 9.6];
        let r = k_medoids(&line(&xs), 3).unwrap();
        let perm = [5, 2, 7, 0, 3, 6, 1, 4];
        let pxs: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
        let pr = k_medoids(&line(&pxs), 3).unwrap();
        let back: Vec<usize> = perm.iter().map(|&i| r.assignment[i]).collect();
        assert_eq!(clustering_accuracy(&pr.assignment, &back).unwrap(), 1.0);
        assert!((r.cost - pr.cost).abs() < 1e-12);
    }

    #[test]
    fn davies_bouldin_examples() {
        // two zero-spread clusters two apart
        let m = line(&[0.0, 0.0, 2.0, 2.0]);
        let r = ClusteringResult {
            medoids: vec![0, 2],
            assignment: vec![0, 0, 1, 1],
            cost: 0.0,
            sweeps: 0,
            converged: true,
            cost_trace: vec![],
        };
        // zero-distance duplicates give zero spread
        assert_eq!(davies_bouldin(&m, &r).unwrap(), 0.0);
        let r = ClusteringResult {
            medoids: vec![1, 4],
            assignment: vec![0, 0, 0, 1, 1, 1],
            ..r
        };
        let coincide = ClusteringResult {
            medoids: vec![0, 1],
            ..r.clone()
        };
        assert!(davies_bouldin(&line(&[0.0, 0.0, 1.0, 1.0, 1.0, 1.0]), &coincide).is_err());
    }

    #[test]
    fn davies_bouldin_spread_one_each() {
        // members at distance 1 from each medoid, medoids 4 apart
        let m = line(&[-1.0, 0.0, 1.0, 3.0, 4.0, 5.0]);
        let r = ClusteringResult {
            medoids: vec![1, 4],
            assignment: vec![0, 0, 0, 1, 1, 1],
            cost: 0.0,
            sweeps: 0,
            converged: true,
            cost_trace: vec![],
        };
        // mean over members includes the medoid itself: (1+0+1)/3
        let s = 2.0 / 3.0;
        assert!((davies_bouldin(&m, &r).unwrap() - 2.0 * s / 4.0).abs() < 1e-15);
        let m = line(&[-1.0, 1.0, 3.0, 5.0]);
        let r = ClusteringResult {
            medoids: vec![0, 2],
            assignment: vec![0, 0, 1, 1],
            ..r
        };
        // spread excludes nothing: members {-1,1} around -1 give (0+2)/2 = 1
        assert!((davies_bouldin(&m, &r).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn merging_separated_clusters_raises_db() {
        let xs = [0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 10.0, 10.1, 10.2];
        let m = line(&xs);
        let three = k_medoids(&m, 3).unwrap();
        let merged = ClusteringResult {
            medoids: vec![1, 7],
            assignment: vec![0, 0, 0, 0, 0, 0, 1, 1, 1],
            ..three.clone()
        };
        assert!(davies_bouldin(&m, &merged).unwrap() > davies_bouldin(&m, &three).unwrap());
    }

    #[test]
    fn tau_selection_rules() {
        let s = select_tau(&[0.1, 0.3, 0.5], |t| Ok(if t == 0.3 { 0.0 } else { 1.0 })).unwrap();
        assert_eq!(s.tau, 0.3);
        let s = select_tau(&[0.5, 0.1, 0.3], |_| Ok(2.0)).unwrap();
        assert_eq!(s.tau, 0.1);
        assert!(select_tau(&[], |_| Ok(0.0)).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(clustering_accuracy(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap(), 0.5);
        // more clusters than labels
        assert_eq!(clustering_accuracy(&[0, 1, 2, 2], &[0, 0, 1, 1]).unwrap(), 0.75);
    }
}
