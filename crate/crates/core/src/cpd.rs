//! Hierarchical energy-statistic change-point detection with permutation
//! significance tests.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::rng::stream;

fn dist_alpha(a: &[f64], b: &[f64], alpha: f64) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    if alpha == 1.0 {
        d
    } else {
        d.powf(alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid_param("alpha", "must lie in (0, 2)"));
    }
    Ok(())
}

/// Energy divergence `E` between two samples and the scaled statistic
/// `Q = n m / (n + m) E`. Returns `(E, Q)`.
pub fn energy_divergence<V: AsRef<[f64]>>(x: &[V], y: &[V], alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::Invalid("energy divergence needs two nonempty segments".into()));
    }
    let (n, m) = (x.len() as f64, y.len() as f64);
    let mut cross = 0.0;
    for a in x {
        for b in y {
            cross += dist_alpha(a.as_ref(), b.as_ref(), alpha);
        }
    }
    let within = |s: &[V]| {
        let k = s.len();
        if k < 2 {
            return 0.0;
        }
        let mut t = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                t += dist_alpha(s[i].as_ref(), s[j].as_ref(), alpha);
            }
        }
        t / (k * (k - 1) / 2) as f64
    };
    let e = 2.0 * cross / (n * m) - within(x) - within(y);
    Ok((e, n * m / (n + m) * e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EDivisiveConfig {
    pub min_seg: usize,
    pub permutations: usize,
    pub sig: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for EDivisiveConfig {
    fn default() -> Self {
        Self {
            min_seg: 5,
            permutations: 199,
            sig: 0.05,
            alpha: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointResult {
    /// 1-based first index of each new segment, ascending.
    pub change_points: Vec<usize>,
    /// p-value of each accepted split, in acceptance order, followed by the
    /// rejected one (if the search stopped on a test).
    pub p_values: Vec<f64>,
    pub permutations: usize,
    pub config: EDivisiveConfig,
}

/// Best admissible split of every segment under the index map `idx`
/// (`dm` is the full distance^alpha matrix). Within a segment `[lo, hi)` the
/// left sample is `[lo, tau)` and the right one `[tau, kappa)`, maximised
/// over both ends. Returns `(q, segment, tau)`.
fn best_split(dm: &[f64], n: usize, idx: &[usize], bounds: &[usize], min_seg: usize) -> Option<(f64, usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    let pairs = |k: usize| (k * k.saturating_sub(1) / 2).max(1) as f64;
    for s in 0..bounds.len() - 1 {
        let (lo, hi) = (bounds[s], bounds[s + 1]);
        if hi - lo < 2 * min_seg {
            continue;
        }
        let len = hi - lo;
        let d = |a: usize, b: usize| dm[idx[a] * n + idx[b]];
        // w[a * (len + 1) + b]: sum of d over pairs inside [lo + a, lo + b)
        let stride = len + 1;
        let mut w = vec![0.0; stride * stride];
        for b in 2..=len {
            let last = lo + b - 1;
            let mut col = 0.0;
            for a in (0..b - 1).rev() {
                col += d(lo + a, last);
                w[a * stride + b] = w[a * stride + b - 1] + col;
            }
        }
        for t in min_seg..=len - min_seg {
            let wl = w[t];
            let na = t;
            for k in t + min_seg..=len {
                let nb = k - t;
                let wr = w[t * stride + k];
                let cross = w[k] - wl - wr;
                let e = 2.0 * cross / (na * nb) as f64 - wl / pairs(na) - wr / pairs(nb);
                let q = (na * nb) as f64 / (na + nb) as f64 * e;
                if best.is_none_or(|(bq, _, _)| q > bq) {
                    best = Some((q, s, lo + t));
                }
            }
        }
    }
    best
}

/// E-Divisive: repeatedly take the split with the largest `Q` over all
/// current segments and keep it while its permutation p-value is at most
/// `sig`.
pub fn e_divisive<V: AsRef<[f64]>>(seq: &[V], cfg: &EDivisiveConfig) -> Result<ChangePointResult> {
    check_alpha(cfg.alpha)?;
    if cfg.min_seg == 0 {
        return Err(invalid_param("min_seg", "must be positive"));
    }
    let n = seq.len();
    if n < 2 * cfg.min_seg {
        return Err(Error::Invalid(format!(
            "sequence of length {n} is shorter than 2 * min_seg = {}",
            2 * cfg.min_seg
        )));
    }
    if let Some(v) = seq.iter().find(|v| v.as_ref().len() != seq[0].as_ref().len()) {
        return Err(Error::LengthMismatch {
            left: seq[0].as_ref().len(),
            right: v.as_ref().len(),
        });
    }
    let mut dm = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = dist_alpha(seq[i].as_ref(), seq[j].as_ref(), cfg.alpha);
            dm[i * n + j] = v;
            dm[j * n + i] = v;
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut bounds = vec![0, n];
    let mut p_values = Vec::new();
    let mut level = 0u64;
    while let Some((q, _, tau)) = best_split(&dm, n, &identity, &bounds, cfg.min_seg) {
        let bounds_now = bounds.clone();
        let exceed: usize = (0..cfg.permutations)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream(cfg.seed, level * 1_000_003 + r as u64);
                let mut idx = identity.clone();
                for w in bounds_now.windows(2) {
                    idx[w[0]..w[1]].shuffle(&mut rng);
                }
                let qp = best_split(&dm, n, &idx, &bounds_now, cfg.min_seg).map_or(f64::NEG_INFINITY, |b| b.0);
                usize::from(qp >= q)
            })
            .sum();
        let p = (1 + exceed) as f64 / (cfg.permutations + 1) as f64;
        p_values.push(p);
        if p > cfg.sig {
            break;
        }
        let pos = bounds.partition_point(|&b| b < tau);
        bounds.insert(pos, tau);
        level += 1;
    }
    Ok(ChangePointResult {
        change_points: bounds[1..bounds.len() - 1].iter().map(|&t| t + 1).collect(),
        p_values,
        permutations: cfg.permutations,
        config: *cfg,
    })
}

/// Absolute error of each true change point against the closest unused
/// estimate (greedy by distance); unmatched points, and errors above
/// `gap`, count as `gap`.
pub fn cpd_error(estimated: &[usize], truth: &[usize], gap: f64) -> Vec<f64> {
    let mut cand: Vec<(usize, usize, usize)> = Vec::new();
    for (ti, &t) in truth.iter().enumerate() {
        for (ei, &e) in estimated.iter().enumerate() {
            cand.push((t.abs_diff(e), ti, ei));
        }
    }
    cand.sort_unstable();
    let mut err = vec![gap; truth.len()];
    let (mut used_t, mut used_e) = (vec![false; truth.len()], vec![false; estimated.len()]);
    for (d, ti, ei) in cand {
        if !used_t[ti] && !used_e[ei] {
            used_t[ti] = true;
            used_e[ei] = true;
            err[ti] = (d as f64).min(gap);
        }
    }
    err
}

pub fn result_to_json(r: &ChangePointResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn scalars(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    fn blocks(parts: &[(f64, usize)]) -> Vec<Vec<f64>> {
        scalars(&parts.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k)).collect::<Vec<_>>())
    }

    #[test]
    fn divergence_examples() {
        let (e, q) = energy_divergence(&scalars(&[0.0; 3]), &scalars(&[1.0; 3]), 1.0).unwrap();
        assert_eq!((e, q), (2.0, 3.0));
        let (e, _) = energy_divergence(&scalars(&[2.0; 4]), &scalars(&[2.0; 2]), 1.0).unwrap();
        assert_eq!(e, 0.0);
        assert!(energy_divergence::<Vec<f64>>(&[], &scalars(&[1.0]), 1.0).is_err());
        assert!(energy_divergence(&scalars(&[1.0]), &scalars(&[1.0]), 2.0).is_err());
    }

    #[test]
    fn prefix_sums_match_direct_sums() {
        let mut rng = rng_from_seed(12);
        for _ in 0..20 {
            let n = rng.random_range(6..30);
            let seq: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
            let alpha = rng.random_range(0.2..1.9);
            let mut dm = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    dm[i * n + j] = dist_alpha(&seq[i], &seq[j], alpha);
                }
            }
            let idx: Vec<usize> = (0..n).collect();
            let (q, _, tau) = best_split(&dm, n, &idx, &[0, n], 2).unwrap();
            let mut want = f64::NEG_INFINITY;
            let mut at = Vec::new();
            for t in 2..=n - 2 {
                for k in t + 2..=n {
                    let v = energy_divergence(&seq[..t], &seq[t..k], alpha).unwrap().1;
                    if v > want {
                        want = v;
                    }
                    at.push((t, v));
                }
            }
            assert!((q - want).abs() <= 1e-10 * want.abs().max(1.0));
            assert!(at.iter().any(|&(t, v)| t == tau && (v - q).abs() <= 1e-10 * q.abs().max(1.0)));
            // symmetric in the two samples
            let direct = energy_divergence(&seq[..tau], &seq[tau..], alpha).unwrap().1;
            let swapped = energy_divergence(&seq[tau..], &seq[..tau], alpha).unwrap().1;
            assert!((direct - swapped).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn detects_single_and_double_shift() {
        let cfg = EDivisiveConfig { min_seg: 2, ..Default::default() };
        let r = e_divisive(&blocks(&[(0.0, 5), (10.0, 5)]), &cfg).unwrap();
        assert_eq!(r.change_points, vec![6]);
        let r = e_divisive(&blocks(&[(0.0, 5), (10.0, 5), (0.0, 5)]), &cfg).unwrap();
        assert_eq!(r.change_points, vec![6, 11]);
        assert_eq!(r, e_divisive(&blocks(&[(0.0, 5), (10.0, 5), (0.0, 5)]), &cfg).unwrap());
    }

    #[test]
    fn constant_sequence_has_no_change() {
        let mut false_pos = 0;
        for seed in 0..20 {
            let cfg = EDivisiveConfig { seed, ..Default::default() };
            let r = e_divisive(&blocks(&[(3.0, 30)]), &cfg).unwrap();
            false_pos += r.change_points.len();
        }
        assert!(false_pos <= 1);
        assert!(e_divisive(&blocks(&[(1.0, 3)]), &EDivisiveConfig::default()).is_err());
    }

    #[test]
    fn error_convention() {
        assert_eq!(cpd_error(&[51, 101], &[51, 101], 50.0), vec![0.0, 0.0]);
        assert_eq!(cpd_error(&[], &[51, 101, 151, 201], 50.0), vec![50.0; 4]);
        assert_eq!(cpd_error(&[53], &[51], 50.0), vec![2.0]);
        assert_eq!(cpd_error(&[52], &[51, 53], 50.0), vec![1.0, 50.0]);
        assert_eq!(cpd_error(&[200], &[51], 50.0), vec![50.0]);
    }
}
