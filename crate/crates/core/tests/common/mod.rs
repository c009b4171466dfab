//! Independent oracles and random generators shared by the integration
//! tests and the acceptance run.
#![allow(dead_code)]

use rand::Rng as _;
use vpb_core::block::{BlockConfig, LengthFunction, PointValue, Region, WeightFunction};
use vpb_core::diagram::{DiagramPoint, Domain, PersistenceDiagram};
use vpb_core::homology::PointCloud;
use vpb_core::learn::DissimilarityMatrix;
use vpb_core::rng::Rng;
use vpb_core::vectorize::GridPartition;

pub fn diagram(rng: &mut Rng, max_points: usize, birth_max: f64, pers_max: f64) -> PersistenceDiagram {
    let n = rng.random_range(0..=max_points);
    let points = (0..n)
        .map(|_| DiagramPoint {
            birth: rng.random_range(0.0..=birth_max),
            persistence: rng.random_range(1e-3..=pers_max),
        })
        .collect();
    PersistenceDiagram::new(1, points)
}

pub fn cloud(rng: &mut Rng, n: usize, dim: usize) -> PointCloud {
    PointCloud::new(dim, (0..n * dim).map(|_| rng.random()).collect()).unwrap()
}

fn sup(a: &DiagramPoint, b: &DiagramPoint) -> f64 {
    (a.birth - b.birth).abs().max((a.persistence - b.persistence).abs())
}

fn total(mut terms: Vec<f64>, p: f64) -> f64 {
    terms.sort_by(f64::total_cmp);
    let s: f64 = terms.iter().sum();
    if p >= 1.0 {
        s.powf(1.0 / p)
    } else {
        s
    }
}

/// Costs of every partial injection of `a` into `b`; unmatched points go
/// to their own axis projection at cost `persistence^p`.
fn all_matching_costs(a: &PersistenceDiagram, b: &PersistenceDiagram, p: f64) -> Vec<f64> {
    fn rec(i: usize, a: &[DiagramPoint], b: &[DiagramPoint], used: &mut Vec<bool>, terms: &mut Vec<f64>, p: f64, out: &mut Vec<f64>) {
        if i == a.len() {
            let mut t = terms.clone();
            t.extend(b.iter().zip(used.iter()).filter(|(_, &u)| !u).map(|(q, _)| q.persistence.powf(p)));
            out.push(total(t, p));
            return;
        }
        terms.push(a[i].persistence.powf(p));
        rec(i + 1, a, b, used, terms, p, out);
        terms.pop();
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                terms.push(sup(&a[i], &b[j]).powf(p));
                rec(i + 1, a, b, used, terms, p, out);
                terms.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, &a.points, &b.points, &mut vec![false; b.len()], &mut Vec::new(), p, &mut out);
    out
}

pub fn brute_wasserstein(a: &PersistenceDiagram, b: &PersistenceDiagram, p: f64) -> f64 {
    all_matching_costs(a, b, p).into_iter().fold(f64::INFINITY, f64::min)
}

/// Floating-point costs of the optimal matchings. Several matchings can
/// tie in exact arithmetic and still round differently.
pub fn optimal_costs(a: &PersistenceDiagram, b: &PersistenceDiagram, p: f64) -> Vec<f64> {
    let all = all_matching_costs(a, b, p);
    let min = all.iter().copied().fold(f64::INFINITY, f64::min);
    let mut tied: Vec<f64> = all.into_iter().filter(|&c| c - min <= 1e-13 * (1.0 + min)).collect();
    tied.sort_by(f64::total_cmp);
    tied.dedup();
    tied
}

/// Prim's algorithm on the complete graph; the edge weights of a minimum
/// spanning tree, ascending.
pub fn mst_weights(c: &PointCloud) -> Vec<f64> {
    let n = c.len();
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    key[0] = 0.0;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&x, &y| key[x].total_cmp(&key[y]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            out.push(key[u]);
        }
        for v in 0..n {
            if !in_tree[v] {
                key[v] = key[v].min(c.distance(u, v));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// `classes` blocks of `per` items: distance `within` inside a class,
/// `between` across.
pub fn class_matrix(classes: usize, per: usize, within: f64, between: f64) -> (DissimilarityMatrix, Vec<usize>) {
    let n = classes * per;
    let labels: Vec<usize> = (0..n).map(|i| i / per).collect();
    let data = (0..n)
        .flat_map(|i| {
            let labels = &labels;
            (0..n).map(move |j| match (i == j, labels[i] == labels[j]) {
                (true, _) => 0.0,
                (false, true) => within,
                (false, false) => between,
            })
        })
        .collect();
    (DissimilarityMatrix::new(n, data).unwrap(), labels)
}

/// Any admissible block configuration with its grid.
pub fn block_setup(rng: &mut Rng) -> (BlockConfig, GridPartition) {
    let domain = Domain::new(rng.random_range(0.5..3.0), rng.random_range(0.3..2.0)).unwrap();
    let tau = rng.random_range(0.05..=1.0);
    let (n, m) = (rng.random_range(0..=2u32), rng.random_range(0..=2u32));
    let length = LengthFunction::new(tau, n, m, domain.pers_max).unwrap();
    let weight = match rng.random_range(0..3) {
        0 => WeightFunction::LinearSum,
        1 => WeightFunction::ShiftedLinear { c: domain.pers_max },
        _ => WeightFunction::Constant { c: rng.random_range(0.5..2.0) },
    };
    let point_value = if rng.random() { PointValue::IdentityOne } else { PointValue::WeightAtCenter };
    let region = if rng.random() { Region::Omega } else { Region::OmegaPrime };
    let cfg = BlockConfig {
        length,
        weight,
        point_value,
        domain,
        region,
    };
    let grid = GridPartition::new(cfg.region_rect(), rng.random_range(1..=3), rng.random_range(1..=3)).unwrap();
    (cfg, grid)
}

/// A random configuration that meets the stability hypotheses.
pub fn stability_config(rng: &mut Rng, point_value: PointValue) -> BlockConfig {
    let domain = Domain::new(rng.random_range(0.2..3.0), rng.random_range(0.2..2.0)).unwrap();
    BlockConfig::stability(rng.random_range(0.05..0.95), domain, point_value).unwrap()
}
