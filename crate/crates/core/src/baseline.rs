//! Persistence images: Gaussian bumps at diagram points, integrated over
//! grid cells in closed form, and a timing comparison against VPBs.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::block::BlockConfig;
use crate::datagen::random_beta_diagram;
use crate::diagram::{Domain, PersistenceDiagram, Rect};
use crate::error::{invalid_param, Result};
use crate::rng::derive_seed;
use crate::vectorize::{vpb_values, FeatureProvenance, FeatureVector, GridPartition, LAYOUT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PIWeighting {
    /// `p / pers_max`.
    Linear,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PIConfig {
    pub sigma: f64,
    pub grid: GridPartition,
    pub weighting: PIWeighting,
    pub pers_max: f64,
}

impl PIConfig {
    pub fn new(sigma: f64, grid: GridPartition, weighting: PIWeighting, pers_max: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid_param("sigma", "must be positive"));
        }
        if !(pers_max > 0.0) {
            return Err(invalid_param("pers_max", "must be positive"));
        }
        Ok(Self {
            sigma,
            grid,
            weighting,
            pers_max,
        })
    }

    fn weight(&self, p: f64) -> f64 {
        match self.weighting {
            PIWeighting::Linear => p / self.pers_max,
            PIWeighting::Constant => 1.0,
        }
    }
}

/// Half the largest persistence divided by the grid size.
pub fn default_sigma(pers_max: f64, grid_size: usize) -> f64 {
    0.5 * pers_max / grid_size as f64
}

/// `P(a <= X <= b)` for a standard normal, accurate in both tails.
pub(crate) fn normal_mass(a: f64, b: f64) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if a >= 0.0 {
        0.5 * (erfc(a * s) - erfc(b * s))
    } else if b <= 0.0 {
        0.5 * (erfc(-b * s) - erfc(-a * s))
    } else {
        0.5 * (erf(b * s) - erf(a * s))
    }
}

fn axis_masses(edges: &[f64], mu: f64, sigma: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(edges.windows(2).map(|w| normal_mass((w[0] - mu) / sigma, (w[1] - mu) / sigma)));
}

fn edges(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / count as f64;
    (0..=count).map(|i| if i == count { hi } else { lo + i as f64 * step }).collect()
}

pub fn persistence_image_values(cfg: &PIConfig, d: &PersistenceDiagram) -> Vec<f64> {
    let g = &cfg.grid;
    let xe = edges(g.region.x0, g.region.x1, g.nx);
    let ye = edges(g.region.y0, g.region.y1, g.ny);
    let mut out = vec![0.0; g.len()];
    let (mut mx, mut my) = (Vec::new(), Vec::new());
    for p in &d.points {
        let w = cfg.weight(p.persistence);
        if w == 0.0 {
            continue;
        }
        axis_masses(&xe, p.birth, cfg.sigma, &mut mx);
        axis_masses(&ye, p.persistence, cfg.sigma, &mut my);
        for (j, &vy) in my.iter().enumerate() {
            let row = &mut out[j * g.nx..(j + 1) * g.nx];
            let wy = w * vy;
            for (o, &vx) in row.iter_mut().zip(&mx) {
                *o += wy * vx;
            }
        }
    }
    out
}

pub fn persistence_image(cfg: &PIConfig, d: &PersistenceDiagram) -> FeatureVector {
    FeatureVector {
        values: persistence_image_values(cfg, d),
        provenance: FeatureProvenance::PersistenceImage {
            sigma: cfg.sigma,
            pers_max: cfg.pers_max,
            weighting: format!("{:?}", cfg.weighting).to_lowercase(),
            grid: cfg.grid,
            layout: LAYOUT.into(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub method: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub diagrams_per_size: usize,
    pub trials: usize,
    pub grid: usize,
    pub tau: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            diagrams_per_size: 10,
            trials: 5,
            grid: 10,
            tau: 0.5,
            sigma: 0.1,
            seed: 0,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Shared inputs of the benchmark: the unit-box domain and grids.
pub fn bench_setup(cfg: &BenchConfig) -> Result<(BlockConfig, GridPartition, PIConfig)> {
    let domain = Domain::new(1.0, 1.0)?;
    let block = BlockConfig::production(cfg.tau, domain)?;
    let grid = GridPartition::default_for(&block, cfg.grid, cfg.grid)?;
    let pi = PIConfig::new(cfg.sigma, grid, PIWeighting::Linear, domain.pers_max)?;
    Ok((block, grid, pi))
}

/// Beta-distributed diagrams for one benchmark size; identical for a fixed
/// seed.
pub fn bench_diagrams(cfg: &BenchConfig, size: usize) -> Result<Vec<PersistenceDiagram>> {
    (0..cfg.diagrams_per_size)
        .map(|k| random_beta_diagram(size, (4.0, 6.0), (1.0, 5.0), derive_seed(cfg.seed, (size * 1_000_003 + k) as u64)))
        .collect()
}

/// Median wall-clock seconds to vectorize each size's diagram set, per
/// method. Runs on the calling thread.
pub fn cost_benchmark(sizes: &[usize], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let (block, grid, pi) = bench_setup(cfg)?;
    let mut rows = Vec::new();
    let mut sink = 0.0;
    for &size in sizes {
        let diagrams = if size == 0 {
            vec![PersistenceDiagram::empty(1); cfg.diagrams_per_size]
        } else {
            bench_diagrams(cfg, size)?
        };
        let (mut tv, mut tp) = (Vec::new(), Vec::new());
        for _ in 0..cfg.trials.max(1) {
            let t = Instant::now();
            for d in &diagrams {
                sink += vpb_values(&block, &grid, d)[0];
            }
            tv.push(t.elapsed().as_secs_f64());
            let t = Instant::now();
            for d in &diagrams {
                sink += persistence_image_values(&pi, d)[0];
            }
            tp.push(t.elapsed().as_secs_f64());
        }
        rows.push(BenchRow { n: size, method: "vpb".into(), seconds: median(tv) });
        rows.push(BenchRow { n: size, method: "pi".into(), seconds: median(tp) });
    }
    std::hint::black_box(sink);
    Ok(rows)
}

pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("n,method,seconds\n");
    for r in rows {
        s.push_str(&format!("{},{},{:.9}\n", r.n, r.method, r.seconds));
    }
    s
}

/// Grid region shared by a PI and the coordinate box of a diagram set.
pub fn unit_region() -> Rect {
    Rect::new(0.0, 1.0, 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn cfg20() -> PIConfig {
        let grid = GridPartition::new(unit_region(), 20, 20).unwrap();
        PIConfig::new(0.1, grid, PIWeighting::Linear, 1.0).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let c = cfg20();
        assert!(persistence_image_values(&c, &PersistenceDiagram::empty(1)).iter().all(|&x| x == 0.0));
        let flat = PersistenceDiagram::from_pairs(1, &[(0.3, 0.0)]).unwrap();
        assert!(persistence_image_values(&c, &flat).iter().all(|&x| x == 0.0));
        let g = c.grid;
        assert!(PIConfig::new(0.0, g, PIWeighting::Linear, 1.0).is_err());
    }

    #[test]
    fn single_point_mass_and_monte_carlo() {
        let c = cfg20();
        let d = PersistenceDiagram::from_pairs(1, &[(0.5, 0.5)]).unwrap();
        let v = persistence_image_values(&c, &d);
        let inside = normal_mass(-5.0, 5.0).powi(2);
        assert!((v.iter().sum::<f64>() - 0.5 * inside).abs() < 1e-12);
        // Monte Carlo: sample the Gaussian, bin into cells
        let mut rng = rng_from_seed(17);
        let n = 400_000usize;
        let mut counts = vec![0.0; 400];
        for _ in 0..n {
            let x: f64 = 0.5 + 0.1 * rng.sample::<f64, _>(rand_distr::StandardNormal);
            let y: f64 = 0.5 + 0.1 * rng.sample::<f64, _>(rand_distr::StandardNormal);
            if (0.0..1.0).contains(&x) && (0.0..1.0).contains(&y) {
                counts[(y * 20.0) as usize * 20 + (x * 20.0) as usize] += 1.0;
            }
        }
        for (i, &k) in counts.iter().enumerate() {
            let p = k / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
            assert!((0.5 * p - v[i]).abs() <= 4.0 * 0.5 * se + 1e-12, "cell {i}");
        }
    }

    #[test]
    fn matches_dense_riemann_sum() {
        let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for sigma in [0.05, 0.1, 0.3] {
            let grid = GridPartition::new(unit_region(), 5, 5).unwrap();
            let c = PIConfig::new(sigma, grid, PIWeighting::Constant, 1.0).unwrap();
            let d = PersistenceDiagram::from_pairs(1, &[(0.37, 0.61)]).unwrap();
            let v = persistence_image_values(&c, &d);
            for idx in [0, 7, 12, 24] {
                let cell = grid.cell(idx);
                // midpoint rule on a fine subgrid, separable
                let k = 20_000;
                let axis = |lo: f64, hi: f64, mu: f64| {
                    let h = (hi - lo) / k as f64;
                    (0..k).map(|i| pdf((lo + (i as f64 + 0.5) * h - mu) / sigma) * h / sigma).sum::<f64>()
                };
                let r = axis(cell.x0, cell.x1, 0.37) * axis(cell.y0, cell.y1, 0.61);
                assert!((r - v[idx]).abs() <= 1e-6 * r.abs().max(1e-300), "sigma {sigma} cell {idx}");
            }
        }
    }

    #[test]
    fn additive_and_nonnegative() {
        let c = cfg20();
        let mut rng = rng_from_seed(3);
        let a: Vec<(f64, f64)> = (0..5).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
        let b: Vec<(f64, f64)> = (0..4).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
        let (da, db) = (PersistenceDiagram::from_pairs(1, &a).unwrap(), PersistenceDiagram::from_pairs(1, &b).unwrap());
        let u = persistence_image_values(&c, &da.union(&db));
        let (va, vb) = (persistence_image_values(&c, &da), persistence_image_values(&c, &db));
        for i in 0..u.len() {
            assert!(u[i] >= 0.0);
            assert!((u[i] - va[i] - vb[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn translation_covariance() {
        let grid = GridPartition::new(Rect::new(0.0, 2.0, 0.0, 2.0), 8, 8).unwrap();
        let c = PIConfig::new(0.05, grid, PIWeighting::Constant, 1.0).unwrap();
        let shifted_grid = GridPartition::new(Rect::new(0.25, 2.25, 0.5, 2.5), 8, 8).unwrap();
        let cs = PIConfig { grid: shifted_grid, ..c };
        let d = PersistenceDiagram::from_pairs(1, &[(1.0, 1.0)]).unwrap();
        let ds = PersistenceDiagram::from_pairs(1, &[(1.25, 1.5)]).unwrap();
        let (v, vs) = (persistence_image_values(&c, &d), persistence_image_values(&cs, &ds));
        for i in 0..v.len() {
            assert!((v[i] - vs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn default_sigma_rule() {
        assert_eq!(default_sigma(2.0, 20), 0.05);
    }

    #[test]
    fn benchmark_schema_and_zero_size() {
        let cfg = BenchConfig { diagrams_per_size: 2, trials: 1, ..Default::default() };
        let rows = cost_benchmark(&[0, 50], &cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(bench_to_csv(&rows).starts_with("n,method,seconds\n"));
        assert_eq!(bench_diagrams(&cfg, 50).unwrap(), bench_diagrams(&cfg, 50).unwrap());
    }
}
