//! Seeded synthetic data: six point-cloud shapes, linked twist map orbits
//! and beta-distributed diagrams.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::beta::inv_beta_reg;

use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{invalid_param, Error, Result};
use crate::homology::PointCloud;
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Cube,
    Circle,
    Sphere,
    Clusters3,
    NestedClusters,
    Torus,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        Self::Cube,
        Self::Circle,
        Self::Sphere,
        Self::Clusters3,
        Self::NestedClusters,
        Self::Torus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cube => "cube",
            Self::Circle => "circle",
            Self::Sphere => "sphere",
            Self::Clusters3 => "clusters3",
            Self::NestedClusters => "nested-clusters",
            Self::Torus => "torus",
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid_param("kind", format!("unknown shape `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub n_points: usize,
    pub noise_eta: f64,
    pub seed: u64,
}

/// Parameters fixed for every generated shape.
pub mod shape_constants {
    /// Every shape is centred here.
    pub const CENTER: [f64; 3] = [0.5, 0.5, 0.5];
    pub const CIRCLE_RADIUS: f64 = 0.5;
    pub const SPHERE_RADIUS: f64 = 0.5;
    /// Tube centre radius and tube radius: inner diameter 1/2, outer 1.
    pub const TORUS_MAJOR: f64 = 0.375;
    pub const TORUS_MINOR: f64 = 0.125;
    pub const CLUSTER_SD: f64 = 0.05;
    pub const NESTED_OFFSET_SD: f64 = 0.05;
    pub const NESTED_POINT_SD: f64 = 0.02;
}

use shape_constants::*;

fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn unit_vector(rng: &mut Rng) -> [f64; 3] {
    loop {
        let v = [normal(rng), normal(rng), normal(rng)];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 1e-12 {
            return [v[0] / r, v[1] / r, v[2] / r];
        }
    }
}

fn unit_cube(rng: &mut Rng) -> [f64; 3] {
    [rng.random(), rng.random(), rng.random()]
}

/// Surface-uniform torus point: tube angle accepted with probability
/// proportional to the local circumference.
fn torus_point(rng: &mut Rng) -> [f64; 3] {
    let (big, small) = (TORUS_MAJOR, TORUS_MINOR);
    let theta = loop {
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let u: f64 = rng.random();
        if u * (big + small) <= big + small * t.cos() {
            break t;
        }
    };
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let ring = big + small * theta.cos();
    [
        CENTER[0] + ring * phi.cos(),
        CENTER[1] + ring * phi.sin(),
        CENTER[2] + small * theta.sin(),
    ]
}

/// Noiseless points of `spec`, then isotropic noise with standard deviation
/// `noise_eta`.
pub fn sample_shape(spec: &ShapeSpec) -> Result<PointCloud> {
    if spec.n_points == 0 {
        return Err(invalid_param("n_points", "must be positive"));
    }
    if !(spec.noise_eta >= 0.0) {
        return Err(invalid_param("noise_eta", "must be nonnegative"));
    }
    let mut rng = rng_from_seed(spec.seed);
    let n = spec.n_points;
    let mut pts: Vec<[f64; 3]> = Vec::with_capacity(n);
    match spec.kind {
        ShapeKind::Cube => pts.extend((0..n).map(|_| unit_cube(&mut rng))),
        ShapeKind::Circle => {
            for _ in 0..n {
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                pts.push([
                    CENTER[0] + CIRCLE_RADIUS * t.cos(),
                    CENTER[1] + CIRCLE_RADIUS * t.sin(),
                    CENTER[2],
                ]);
            }
        }
        ShapeKind::Sphere => {
            for _ in 0..n {
                let u = unit_vector(&mut rng);
                pts.push([
                    CENTER[0] + SPHERE_RADIUS * u[0],
                    CENTER[1] + SPHERE_RADIUS * u[1],
                    CENTER[2] + SPHERE_RADIUS * u[2],
                ]);
            }
        }
        ShapeKind::Torus => pts.extend((0..n).map(|_| torus_point(&mut rng))),
        ShapeKind::Clusters3 => {
            let centers: Vec<[f64; 3]> = (0..3).map(|_| unit_cube(&mut rng)).collect();
            for i in 0..n {
                let c = centers[i % 3];
                pts.push([
                    c[0] + CLUSTER_SD * normal(&mut rng),
                    c[1] + CLUSTER_SD * normal(&mut rng),
                    c[2] + CLUSTER_SD * normal(&mut rng),
                ]);
            }
        }
        ShapeKind::NestedClusters => {
            let mut children = Vec::with_capacity(9);
            for _ in 0..3 {
                let p = unit_cube(&mut rng);
                for _ in 0..3 {
                    children.push([
                        p[0] + NESTED_OFFSET_SD * normal(&mut rng),
                        p[1] + NESTED_OFFSET_SD * normal(&mut rng),
                        p[2] + NESTED_OFFSET_SD * normal(&mut rng),
                    ]);
                }
            }
            for i in 0..n {
                let c: [f64; 3] = children[i % 9];
                pts.push([
                    c[0] + NESTED_POINT_SD * normal(&mut rng),
                    c[1] + NESTED_POINT_SD * normal(&mut rng),
                    c[2] + NESTED_POINT_SD * normal(&mut rng),
                ]);
            }
        }
    }
    if spec.noise_eta > 0.0 {
        for p in &mut pts {
            for c in p.iter_mut() {
                *c += spec.noise_eta * normal(&mut rng);
            }
        }
    }
    PointCloud::from_rows(&pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LTMSpec {
    pub r: f64,
    pub x0: f64,
    pub y0: f64,
    pub length: usize,
}

/// `x' = x + r y (1 - y) mod 1`, then `y' = y + r x' (1 - x') mod 1`.
pub fn ltm_orbit(spec: &LTMSpec) -> Result<PointCloud> {
    let unit = 0.0..1.0;
    if !(unit.contains(&spec.x0) && unit.contains(&spec.y0)) {
        return Err(invalid_param("x0/y0", "start must lie in [0, 1)^2"));
    }
    if !(spec.r > 0.0 && spec.r.is_finite()) {
        return Err(invalid_param("r", "must be positive"));
    }
    let (mut x, mut y) = (spec.x0, spec.y0);
    let mut rows = Vec::with_capacity(spec.length + 1);
    rows.push([x, y]);
    for _ in 0..spec.length {
        x = (x + spec.r * y * (1.0 - y)) % 1.0;
        y = (y + spec.r * x * (1.0 - x)) % 1.0;
        rows.push([x, y]);
    }
    PointCloud::from_rows(&rows)
}

/// Random start for an orbit, drawn from `rng`.
pub fn ltm_start(rng: &mut Rng) -> (f64, f64) {
    (rng.random(), rng.random())
}

/// Births from `Beta(ab)`, persistences from `Beta(ap)`, by inverse CDF.
pub fn random_beta_diagram(n: usize, ab: (f64, f64), ap: (f64, f64), seed: u64) -> Result<PersistenceDiagram> {
    if n == 0 {
        return Err(invalid_param("n", "must be positive"));
    }
    for (a, b) in [ab, ap] {
        if !(a > 0.0 && b > 0.0) {
            return Err(invalid_param("beta", "shape parameters must be positive"));
        }
    }
    let mut rng = rng_from_seed(seed);
    let points = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            DiagramPoint {
                birth: inv_beta_reg(ab.0, ab.1, u),
                persistence: inv_beta_reg(ap.0, ap.1, v),
            }
        })
        .collect();
    Ok(PersistenceDiagram::new(1, points))
}
