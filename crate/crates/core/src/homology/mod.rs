//! Vietoris-Rips persistent homology in degrees 0 and 1 for small point
//! clouds under a scale cap.
//!
//! Simplices are ordered by `(filtration value, dimension, sorted vertex
//! tuple)`. Degree 0 comes from Kruskal's algorithm in that order. Degree 1
//! uses persistent cohomology with implicit coboundaries, skipping the
//! spanning-tree edges, and is checked against a plain boundary-matrix
//! reduction ([`rips_h1_naive`]).

mod cohomology;
mod reduction;

pub use reduction::rips_h1_naive;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagram::{fmt_f64, DiagramPoint, EssentialPolicy, PersistenceDiagram};
use crate::error::{invalid_param, Error, Result};

/// Points in 2 or 3 dimensions with the Euclidean metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(invalid_param("dim", "point clouds are 2D or 3D"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::Invalid("point cloud needs at least one complete point".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<const D: usize>(rows: &[[f64; D]]) -> Result<Self> {
        Self::new(D, rows.iter().flatten().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(if self.dim == 2 { "x,y\n" } else { "x,y,z\n" });
        for i in 0..self.len() {
            let row: Vec<String> = self.point(i).iter().map(|&c| fmt_f64(c)).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut coords = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if i == 0 && fields[0].eq_ignore_ascii_case("x") {
                dim = Some(fields.len());
                continue;
            }
            let d = *dim.get_or_insert(fields.len());
            if fields.len() != d {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {d} coordinates, found {}", fields.len()),
                });
            }
            for f in fields {
                coords.push(f.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("non-numeric coordinate `{f}`"),
                })?);
            }
        }
        Self::new(dim.unwrap_or(2), coords)
    }
}

/// Simplices whose diameter exceeds `max_scale` are excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiltrationCap {
    pub max_scale: f64,
}

impl FiltrationCap {
    pub fn new(max_scale: f64) -> Result<Self> {
        if !(max_scale > 0.0) {
            return Err(invalid_param("cap", "must be positive"));
        }
        Ok(Self { max_scale })
    }

    pub fn unbounded() -> Self {
        Self {
            max_scale: f64::INFINITY,
        }
    }
}

pub const DEFAULT_TRIANGLE_BUDGET: usize = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipsOptions {
    pub cap: FiltrationCap,
    pub triangle_budget: usize,
}

impl RipsOptions {
    pub fn new(cap: FiltrationCap) -> Self {
        Self {
            cap,
            triangle_budget: DEFAULT_TRIANGLE_BUDGET,
        }
    }
}

/// Finite pairs plus the births of classes still alive at the cap.
#[derive(Debug, Clone, PartialEq)]
pub struct BarcodeOutput {
    pub finite: PersistenceDiagram,
    pub essential_births: Vec<f64>,
}

impl BarcodeOutput {
    /// Drops essential classes, or closes them at the cap value.
    pub fn resolve(&self, policy: EssentialPolicy) -> Result<PersistenceDiagram> {
        let mut d = self.finite.clone();
        if let EssentialPolicy::Cap(c) = policy {
            for &b in &self.essential_births {
                if c >= b {
                    d.points.push(DiagramPoint::new(b, c - b)?);
                }
            }
        }
        Ok(d)
    }
}

/// Pairwise distances and the sorted edge list under the cap.
pub(crate) struct RipsComplex {
    pub n: usize,
    pub cap: f64,
    pub dist: Vec<f64>,
    /// `(length, i, j)` with `i < j`, sorted by length then `(i, j)`.
    pub edges: Vec<(f64, u32, u32)>,
}

impl RipsComplex {
    pub fn new(cloud: &PointCloud, cap: FiltrationCap) -> Self {
        let n = cloud.len();
        let mut dist = vec![0.0; n * n];
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = cloud.distance(i, j);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
                if d <= cap.max_scale {
                    edges.push((d, i as u32, j as u32));
                }
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        Self {
            n,
            cap: cap.max_scale,
            dist,
            edges,
        }
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Spanning-forest edge flags (Kruskal in filtration order) and the
    /// number of components at the cap.
    pub fn kruskal(&self) -> (Vec<bool>, usize) {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut in_tree = vec![false; self.edges.len()];
        let mut comps = self.n;
        for (e, &(_, i, j)) in self.edges.iter().enumerate() {
            let (a, b) = (find(&mut parent, i as usize), find(&mut parent, j as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
                in_tree[e] = true;
                comps -= 1;
            }
        }
        (in_tree, comps)
    }

    /// Number of triangles with diameter at most `cap`.
    pub fn count_triangles(&self, cap: f64) -> usize {
        let words = self.n.div_ceil(64);
        let mut adj = vec![0u64; self.n * words];
        for &(d, i, j) in &self.edges {
            if d <= cap {
                let (i, j) = (i as usize, j as usize);
                adj[i * words + j / 64] |= 1 << (j % 64);
                adj[j * words + i / 64] |= 1 << (i % 64);
            }
        }
        let mut count = 0usize;
        for &(d, i, j) in &self.edges {
            if d > cap {
                break;
            }
            // common neighbours k > j
            let (i, j) = (i as usize, j as usize);
            let start = (j + 1) / 64;
            for w in start..words {
                let mut m = adj[i * words + w] & adj[j * words + w];
                if w == start {
                    m &= !0u64 << ((j + 1) % 64);
                }
                count += m.count_ones() as usize;
            }
        }
        count
    }

    /// Errors when the capped complex has more triangles than `budget`,
    /// suggesting the largest edge length that fits.
    pub fn check_budget(&self, budget: usize) -> Result<()> {
        let count = self.count_triangles(f64::INFINITY);
        if count <= budget {
            return Ok(());
        }
        let (mut lo, mut hi) = (0usize, self.edges.len());
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if self.count_triangles(self.edges[mid].0) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::BudgetExceeded {
            count,
            budget,
            cap: self.cap,
            suggested_cap: self.edges.get(lo).map_or(0.0, |e| e.0),
        })
    }
}

/// Degree-0 barcode: every birth is 0, deaths are spanning-forest edge
/// lengths.
pub fn rips_h0(cloud: &PointCloud, cap: FiltrationCap) -> BarcodeOutput {
    h0_from_complex(&RipsComplex::new(cloud, cap))
}

fn h0_from_complex(cx: &RipsComplex) -> BarcodeOutput {
    let (in_tree, comps) = cx.kruskal();
    let points = cx
        .edges
        .iter()
        .zip(&in_tree)
        .filter(|(_, &t)| t)
        .map(|(&(d, _, _), _)| DiagramPoint { birth: 0.0, persistence: d })
        .collect();
    BarcodeOutput {
        finite: PersistenceDiagram::new(0, points),
        essential_births: vec![0.0; comps],
    }
}

/// Degree-1 barcode with positive-persistence pairs only.
pub fn rips_h1(cloud: &PointCloud, opts: RipsOptions) -> Result<BarcodeOutput> {
    let cx = RipsComplex::new(cloud, opts.cap);
    cx.check_budget(opts.triangle_budget)?;
    Ok(cohomology::h1(&cx, &cx.kruskal().0))
}

/// Both degrees from one distance computation.
pub fn rips(cloud: &PointCloud, opts: RipsOptions) -> Result<(BarcodeOutput, BarcodeOutput)> {
    let cx = RipsComplex::new(cloud, opts.cap);
    cx.check_budget(opts.triangle_budget)?;
    let (in_tree, _) = cx.kruskal();
    Ok((h0_from_complex(&cx), cohomology::h1(&cx, &in_tree)))
}

pub(crate) fn sort_pairs(points: &mut [DiagramPoint]) {
    points.sort_by(|a, b| {
        a.birth
            .total_cmp(&b.birth)
            .then(a.persistence.total_cmp(&b.persistence))
    });
}

/// Flags values within three median absolute deviations of the median.
/// A zero deviation keeps everything.
pub fn mad_keep(values: &[f64]) -> Vec<bool> {
    fn median(v: &mut [f64]) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
    if values.is_empty() {
        return Vec::new();
    }
    let med = median(&mut values.to_vec());
    let mad = median(&mut values.iter().map(|v| (v - med).abs()).collect::<Vec<_>>());
    values
        .iter()
        .map(|v| mad == 0.0 || (v - med).abs() <= 3.0 * mad)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn random_cloud(rng: &mut crate::rng::Rng, n: usize) -> PointCloud {
        let rows: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    #[test]
    fn collinear_h0() {
        let c = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]).unwrap();
        let h = rips_h0(&c, FiltrationCap::new(100.0).unwrap());
        assert_eq!(h.finite, PersistenceDiagram::from_pairs(0, &[(0.0, 1.0), (0.0, 2.0)]).unwrap());
        assert_eq!(h.essential_births, vec![0.0]);
        let single = PointCloud::from_rows(&[[0.5, 0.5]]).unwrap();
        let h = rips_h0(&single, FiltrationCap::unbounded());
        assert!(h.finite.is_empty());
        assert_eq!(h.essential_births.len(), 1);
        let capped = h.resolve(EssentialPolicy::Cap(0.45)).unwrap();
        assert_eq!(capped.points, vec![DiagramPoint { birth: 0.0, persistence: 0.45 }]);
    }

    #[test]
    fn unit_square_h1() {
        let c = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let h = rips_h1(&c, RipsOptions::new(FiltrationCap::new(2.0).unwrap())).unwrap();
        assert_eq!(h.finite.points, vec![DiagramPoint { birth: 1.0, persistence: 2f64.sqrt() - 1.0 }]);
        assert!(h.essential_births.is_empty());
        assert_eq!(rips_h1_naive(&c, FiltrationCap::new(2.0).unwrap()), h);
    }

    #[test]
    fn capped_cycle_is_essential() {
        let c = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let cap = FiltrationCap::new(1.2).unwrap();
        let h = rips_h1(&c, RipsOptions::new(cap)).unwrap();
        assert!(h.finite.is_empty());
        assert_eq!(h.essential_births, vec![1.0]);
        assert_eq!(rips_h1_naive(&c, cap), h);
    }

    #[test]
    fn three_points_no_loop() {
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            let c = random_cloud(&mut rng, 3);
            let h = rips_h1(&c, RipsOptions::new(FiltrationCap::unbounded())).unwrap();
            assert!(h.finite.is_empty() && h.essential_births.is_empty());
        }
    }

    #[test]
    fn regular_polygon_single_loop() {
        let rows: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 12.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let c = PointCloud::from_rows(&rows).unwrap();
        let h = rips_h1(&c, RipsOptions::new(FiltrationCap::new(3.0).unwrap())).unwrap();
        assert_eq!(h.finite.len(), 1);
        assert_eq!(rips_h1_naive(&c, FiltrationCap::new(3.0).unwrap()), h);
    }

    #[test]
    fn clearing_matches_naive() {
        let mut rng = rng_from_seed(21);
        for trial in 0..40 {
            let c = random_cloud(&mut rng, 12);
            let cap = if trial % 2 == 0 { FiltrationCap::unbounded() } else { FiltrationCap::new(0.4).unwrap() };
            assert_eq!(rips_h1(&c, RipsOptions::new(cap)).unwrap(), rips_h1_naive(&c, cap));
        }
    }

    #[test]
    fn triangle_count_and_budget() {
        let mut rng = rng_from_seed(4);
        let c = random_cloud(&mut rng, 30);
        let cx = RipsComplex::new(&c, FiltrationCap::new(0.5).unwrap());
        let mut brute = 0;
        for i in 0..30 {
            for j in i + 1..30 {
                for k in j + 1..30 {
                    if cx.d(i, j).max(cx.d(i, k)).max(cx.d(j, k)) <= 0.5 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(cx.count_triangles(f64::INFINITY), brute);
        let err = rips_h1(
            &c,
            RipsOptions {
                cap: FiltrationCap::new(0.5).unwrap(),
                triangle_budget: brute / 2,
            },
        )
        .unwrap_err();
        match err {
            Error::BudgetExceeded { suggested_cap, .. } => {
                assert!(suggested_cap < 0.5);
                assert!(cx.count_triangles(suggested_cap) <= brute / 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = rng_from_seed(6);
        let c = random_cloud(&mut rng, 25);
        let mut rows: Vec<[f64; 2]> = (0..25).map(|i| [c.point(i)[0], c.point(i)[1]]).collect();
        rows.reverse();
        let p = PointCloud::from_rows(&rows).unwrap();
        let o = RipsOptions::new(FiltrationCap::new(0.6).unwrap());
        assert_eq!(rips_h1(&c, o).unwrap().finite, rips_h1(&p, o).unwrap().finite);
        assert_eq!(rips_h0(&c, o.cap).finite, rips_h0(&p, o.cap).finite);
    }

    #[test]
    fn csv_round_trip() {
        let c = PointCloud::from_rows(&[[0.1, 0.2, 0.3], [1.0 / 3.0, 2.0, -1.0]]).unwrap();
        assert_eq!(PointCloud::from_csv(&c.to_csv()).unwrap(), c);
        assert!(PointCloud::from_csv("x,y\n1,2\n3\n").is_err());
    }

    #[test]
    fn mad_filter() {
        let keep = mad_keep(&[1.0, 1.1, 0.9, 1.05, 10.0]);
        assert_eq!(keep, vec![true, true, true, true, false]);
        assert_eq!(mad_keep(&[2.0, 2.0, 2.0]), vec![true; 3]);
    }
}
