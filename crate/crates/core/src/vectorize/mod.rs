//! Grid partitions and closed-form vectorized persistence blocks (VPBs).
//!
//! Entry `i` of a VPB is the weighted integral of the block surface over
//! grid cell `i`. The surface is a sum of scaled square indicators, so each
//! entry is a sum over points of `f(point) * int_{cell ∩ square} w dA`, and
//! every such integral is a rectangle integral of a linear function.

mod stability;

pub use stability::{
    identification_certificate, measure_of_g, vpb_stability_certificate, IdentificationCertificate,
    StabilityCertificate,
};

use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::block::{BlockConfig, BlockConfigJson, Region};
use crate::diagram::{fmt_f64, PersistenceDiagram, Rect};
use crate::error::{invalid_param, Result};
use crate::rng::rng_from_seed;

/// Axis-aligned grid over `region`. Cells are numbered row-major from the
/// lower-left: index `j * nx + i` is column `i`, row `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    pub region: Rect,
    pub nx: usize,
    pub ny: usize,
}

impl GridPartition {
    pub fn new(region: Rect, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(invalid_param("grid", "cell counts must be positive"));
        }
        if !(region.width() > 0.0 && region.height() > 0.0) {
            return Err(invalid_param("grid", "region must have positive extent"));
        }
        Ok(Self { region, nx, ny })
    }

    /// Grid covering every square of every point in the configuration's
    /// domain: `[0, b_max + tau p_max] x [0, (1 + tau) p_max]` for the
    /// first-quadrant region, the enlarged box otherwise.
    pub fn default_for(cfg: &BlockConfig, nx: usize, ny: usize) -> Result<Self> {
        let d = cfg.domain;
        let region = match cfg.region {
            Region::Omega => {
                let t = cfg.length.tau;
                Rect::new(0.0, d.birth_max + t * d.pers_max, 0.0, (1.0 + t) * d.pers_max)
            }
            Region::OmegaPrime => d.omega_prime(),
        };
        Self::new(region, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.region.width() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.region.height() / self.ny as f64
    }

    fn x_edge(&self, i: usize) -> f64 {
        if i == self.nx {
            self.region.x1
        } else {
            self.region.x0 + i as f64 * self.dx()
        }
    }

    fn y_edge(&self, j: usize) -> f64 {
        if j == self.ny {
            self.region.y1
        } else {
            self.region.y0 + j as f64 * self.dy()
        }
    }

    pub fn cell(&self, index: usize) -> Rect {
        let (i, j) = (index % self.nx, index / self.nx);
        Rect::new(self.x_edge(i), self.x_edge(i + 1), self.y_edge(j), self.y_edge(j + 1))
    }

    /// Column/row ranges of cells that can meet `[lo, hi]` along one axis.
    fn span(lo: f64, hi: f64, origin: f64, step: f64, count: usize) -> std::ops::Range<usize> {
        let a = ((lo - origin) / step).floor().max(0.0);
        let b = ((hi - origin) / step).ceil().min(count as f64);
        if b <= a {
            return 0..0;
        }
        a as usize..b as usize
    }
}

/// Provenance carried alongside every feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum FeatureProvenance {
    Vpb {
        config: BlockConfigJson,
        grid: GridPartition,
        layout: String,
    },
    PersistenceImage {
        sigma: f64,
        pers_max: f64,
        weighting: String,
        grid: GridPartition,
        layout: String,
    },
}

pub(crate) const LAYOUT: &str = "row-major-from-lower-left";

/// A fixed-length real vector and the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub provenance: FeatureProvenance,
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Vectorized persistence block of `d` on `grid`.
pub fn vpb(cfg: &BlockConfig, grid: &GridPartition, d: &PersistenceDiagram) -> FeatureVector {
    FeatureVector {
        values: vpb_values(cfg, grid, d),
        provenance: FeatureProvenance::Vpb {
            config: cfg.to_json_value(),
            grid: *grid,
            layout: LAYOUT.into(),
        },
    }
}

/// Raw VPB values without provenance.
pub fn vpb_values(cfg: &BlockConfig, grid: &GridPartition, d: &PersistenceDiagram) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    let (dx, dy) = (grid.dx(), grid.dy());
    for p in &d.points {
        let sq = cfg.square(p);
        if sq.side <= 0.0 {
            continue;
        }
        let fv = cfg.point_value.eval(p);
        let r = sq.rect();
        let cols = GridPartition::span(r.x0, r.x1, grid.region.x0, dx, grid.nx);
        let rows = GridPartition::span(r.y0, r.y1, grid.region.y0, dy, grid.ny);
        for j in rows {
            for i in cols.clone() {
                let idx = j * grid.nx + i;
                if let Some(ix) = grid.cell(idx).intersect(&r) {
                    out[idx] += fv * cfg.weight.integral(&ix);
                }
            }
        }
    }
    out
}

/// Monte-Carlo estimate of every cell integral and its standard error,
/// floored at the contribution of a single sample.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureEstimate {
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
}

/// Uniform sampling of each cell with `samples` points per cell.
pub fn vpb_quadrature_oracle(
    cfg: &BlockConfig,
    grid: &GridPartition,
    d: &PersistenceDiagram,
    samples: usize,
    seed: u64,
) -> Result<QuadratureEstimate> {
    if samples < 100_000 {
        return Err(invalid_param("samples", "at least 100000 samples per cell"));
    }
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(grid.len());
    let mut std_errors = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let cell = grid.cell(idx);
        let area = cell.area();
        let relevant: Vec<_> = d
            .points
            .iter()
            .filter_map(|p| {
                let sq = cfg.square(p);
                (sq.side > 0.0 && sq.rect().intersect(&cell).is_some())
                    .then(|| (sq, cfg.point_value.eval(p)))
            })
            .collect();
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let x = rng.random_range(cell.x0..cell.x1);
            let y = rng.random_range(cell.y0..cell.y1);
            let surf: f64 = relevant
                .iter()
                .filter(|(sq, _)| sq.contains(x, y))
                .map(|(_, f)| f)
                .sum();
            if surf != 0.0 {
                let v = surf * cfg.weight.eval(x, y);
                s += v;
                s2 += v * v;
            }
        }
        let n = samples as f64;
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
        // One hit's worth: the sample estimate degenerates when slivers go unhit.
        let (wlo, whi) = cfg.weight.range_on(&cell);
        let sup = relevant.iter().map(|(_, f)| f.abs()).sum::<f64>() * wlo.abs().max(whi.abs());
        values.push(area * mean);
        std_errors.push(area * (var / n).sqrt().max(sup / n));
    }
    Ok(QuadratureEstimate { values, std_errors })
}

/// One vector per row, 17 significant digits.
pub fn features_to_csv<V: AsRef<[f64]>>(features: &[V]) -> String {
    let mut s = String::new();
    for f in features {
        let row: Vec<String> = f.as_ref().iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn features_from_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| crate::Error::Parse {
                        line: i + 1,
                        msg: format!("non-numeric feature `{}`", t.trim()),
                    })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{PointValue, WeightFunction};
    use crate::diagram::Domain;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn pd(pts: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_pairs(1, pts).unwrap()
    }

    fn cfg(tau: f64) -> BlockConfig {
        BlockConfig::production(tau, Domain::new(2.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn single_cell_example() {
        let grid = GridPartition::new(Rect::new(0.0, 2.0, 0.0, 1.0), 1, 1).unwrap();
        let v = vpb(&cfg(0.5), &grid, &pd(&[(1.0, 0.5)]));
        assert_eq!(v.values, vec![0.375]);
        assert_eq!(vpb(&cfg(0.5), &grid, &PersistenceDiagram::empty(1)).values, vec![0.0]);
    }

    #[test]
    fn two_cell_example() {
        let grid = GridPartition::new(Rect::new(0.0, 2.0, 0.0, 1.0), 2, 1).unwrap();
        let v = vpb_values(&cfg(0.5), &grid, &pd(&[(1.0, 0.5)]));
        assert!((v[0] - 0.171875).abs() < 1e-15);
        assert!((v[1] - 0.203125).abs() < 1e-15);
    }

    #[test]
    fn layout_is_row_major_from_lower_left() {
        let grid = GridPartition::new(Rect::new(0.0, 3.0, 0.0, 2.0), 3, 2).unwrap();
        assert_eq!(grid.cell(0), Rect::new(0.0, 1.0, 0.0, 1.0));
        assert_eq!(grid.cell(2), Rect::new(2.0, 3.0, 0.0, 1.0));
        assert_eq!(grid.cell(3), Rect::new(0.0, 1.0, 1.0, 2.0));
        assert!(GridPartition::new(Rect::new(0.0, 1.0, 0.0, 1.0), 0, 3).is_err());
    }

    #[test]
    fn default_grid_covers_all_squares() {
        let c = cfg(0.7);
        let grid = GridPartition::default_for(&c, 6, 6).unwrap();
        let d = pd(&[(0.0, 1.0), (2.0, 1.0), (1.0, 0.01)]);
        for p in &d.points {
            let r = c.square(p).rect();
            let clipped = Rect::new(r.x0.max(0.0), r.x1, r.y0, r.y1);
            assert!(grid.region.contains(clipped.x0, clipped.y0));
            assert!(grid.region.contains(clipped.x1, clipped.y1));
        }
    }

    #[test]
    fn oracle_contract() {
        let c = cfg(0.5);
        let grid = GridPartition::new(Rect::new(0.0, 2.0, 0.0, 1.0), 2, 2).unwrap();
        let d = pd(&[(1.0, 0.5), (0.3, 0.4)]);
        let exact = vpb_values(&c, &grid, &d);
        let est = vpb_quadrature_oracle(&c, &grid, &d, 100_000, 1).unwrap();
        for i in 0..grid.len() {
            assert!((est.values[i] - exact[i]).abs() <= 4.0 * est.std_errors[i] + 1e-12);
        }
        let again = vpb_quadrature_oracle(&c, &grid, &d, 100_000, 1).unwrap();
        assert_eq!(est, again);
        let empty = vpb_quadrature_oracle(&c, &grid, &PersistenceDiagram::empty(1), 100_000, 1).unwrap();
        assert!(empty.values.iter().all(|&x| x == 0.0));
        assert!(vpb_quadrature_oracle(&c, &grid, &d, 10, 1).is_err());
    }

    #[test]
    fn mass_conservation() {
        let mut rng = rng_from_seed(4);
        let c = cfg(0.9);
        let grid = GridPartition::default_for(&c, 7, 5).unwrap();
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = (0..8).map(|_| (rng.random_range(0.0..2.0), rng.random_range(0.0..1.0))).collect();
            let d = pd(&pts);
            let total: f64 = vpb_values(&c, &grid, &d).iter().sum();
            let expected: f64 = d
                .points
                .iter()
                .filter_map(|p| c.square(p).rect().intersect(&grid.region))
                .map(|r| c.weight.integral(&r))
                .sum();
            assert!((total - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    fn arb_diagram() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0.0..2.0f64, 0.0..1.0f64), 0..12)
    }

    proptest! {
        #[test]
        fn additive_over_multiset_union(a in arb_diagram(), b in arb_diagram(), tau in 0.05..1.0f64) {
            let c = cfg(tau);
            let grid = GridPartition::default_for(&c, 5, 4).unwrap();
            let (da, db) = (pd(&a), pd(&b));
            let sum = vpb_values(&c, &grid, &da.union(&db));
            let va = vpb_values(&c, &grid, &da);
            let vb = vpb_values(&c, &grid, &db);
            for i in 0..sum.len() {
                prop_assert!((sum[i] - va[i] - vb[i]).abs() <= 1e-12 * (1.0 + sum[i].abs()));
                prop_assert!(sum[i] >= 0.0 && sum[i].is_finite());
            }
        }

        #[test]
        fn refinement_merges_to_coarse(a in arb_diagram(), tau in 0.05..1.0f64, nx in 1usize..6, ny in 1usize..6) {
            let mut c = cfg(tau);
            c.weight = WeightFunction::ShiftedLinear { c: 0.5 };
            c.point_value = PointValue::WeightAtCenter;
            let coarse = GridPartition::default_for(&c, nx, ny).unwrap();
            let fine = GridPartition::new(coarse.region, 2 * nx, 2 * ny).unwrap();
            let d = pd(&a);
            let vc = vpb_values(&c, &coarse, &d);
            let vf = vpb_values(&c, &fine, &d);
            for j in 0..ny {
                for i in 0..nx {
                    let merged: f64 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                        .iter()
                        .map(|(di, dj)| vf[(2 * j + dj) * 2 * nx + 2 * i + di])
                        .sum();
                    let want = vc[j * nx + i];
                    prop_assert!((merged - want).abs() <= 1e-12 * (1.0 + want.abs()));
                }
            }
        }
    }

    #[test]
    fn csv_round_trip() {
        let vs = vec![vec![0.1, 1.0 / 3.0], vec![2.5e-17, 0.0]];
        let back = features_from_csv(&features_to_csv(&vs)).unwrap();
        assert_eq!(back, vs);
    }
}
