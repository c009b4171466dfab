//! Stages shared by the drivers: diagrams from clouds, features from
//! diagrams, clustering with τ selection.

use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::{default_sigma, persistence_image_values, PIConfig, PIWeighting};
use crate::block::BlockConfig;
use crate::datagen::ShapeKind;
use crate::diagram::{bounding_domain, Domain, EssentialPolicy, PersistenceDiagram, Rect};
use crate::error::{Error, Result};
use crate::homology::{rips_h0, rips_h1, FiltrationCap, PointCloud, RipsOptions};
use crate::learn::{clustering_accuracy, davies_bouldin, k_medoids, select_tau, DissimilarityMatrix};
use crate::metrics::{pairwise_matrix, Norm};
use crate::vectorize::{vpb_values, GridPartition};

/// The ten synthetic retrieval classes: a base shape and a uniform scale
/// applied to its noisy cloud.
pub const RETRIEVAL_CLASSES: [(ShapeKind, f64); 10] = [
    (ShapeKind::Circle, 1.0),
    (ShapeKind::Circle, 0.6),
    (ShapeKind::Sphere, 1.0),
    (ShapeKind::Sphere, 0.6),
    (ShapeKind::Torus, 1.0),
    (ShapeKind::Torus, 0.6),
    (ShapeKind::Cube, 1.0),
    (ShapeKind::Cube, 0.6),
    (ShapeKind::Clusters3, 1.0),
    (ShapeKind::NestedClusters, 1.0),
];

/// Diagrams of every cloud in each requested dimension: `out[k][i]` is the
/// diagram of cloud `i` in `dims[k]`.
pub(crate) fn cloud_diagrams(
    clouds: &[PointCloud],
    dims: &[usize],
    cap: Option<f64>,
    policy: EssentialPolicy,
) -> Result<Vec<Vec<PersistenceDiagram>>> {
    let fcap = match cap {
        Some(c) => FiltrationCap::new(c)?,
        None => FiltrationCap::unbounded(),
    };
    let per_cloud: Vec<Vec<PersistenceDiagram>> = clouds
        .par_iter()
        .map(|c| {
            dims.iter()
                .map(|&d| match d {
                    0 => rips_h0(c, fcap).resolve(policy),
                    _ => rips_h1(c, RipsOptions::new(fcap))?.resolve(policy),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..dims.len())
        .map(|k| per_cloud.iter().map(|v| v[k].clone()).collect())
        .collect())
}

/// Domain of a whole dataset; fails when every diagram is empty.
pub(crate) fn dataset_domain(diagrams: &[PersistenceDiagram]) -> Result<Domain> {
    bounding_domain(diagrams, 0.0).map_err(|e| Error::Domain(format!("dataset has no usable diagram points: {e}")))
}

pub(crate) fn vpb_features(diagrams: &[PersistenceDiagram], domain: Domain, tau: f64, grid: usize) -> Result<Vec<Vec<f64>>> {
    let cfg = BlockConfig::production(tau, domain)?;
    let g = GridPartition::default_for(&cfg, grid, grid)?;
    Ok(diagrams.par_iter().map(|d| vpb_values(&cfg, &g, d)).collect())
}

/// Region of the PI grid: the VPB default region at τ = 1, which contains
/// every square for every admissible τ.
pub fn pi_region(domain: &Domain) -> Rect {
    Rect::new(0.0, domain.birth_max + domain.pers_max, 0.0, 2.0 * domain.pers_max)
}

/// `sigma = None` selects the default bandwidth rule.
pub(crate) fn pi_features(
    diagrams: &[PersistenceDiagram],
    domain: Domain,
    grid: usize,
    sigma: Option<f64>,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let sigma = sigma.unwrap_or_else(|| default_sigma(domain.pers_max, grid));
    let g = GridPartition::new(pi_region(&domain), grid, grid)?;
    let cfg = PIConfig::new(sigma, g, PIWeighting::Linear, domain.pers_max)?;
    Ok((diagrams.par_iter().map(|d| persistence_image_values(&cfg, d)).collect(), sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub(crate) struct ClusterScore {
    pub davies_bouldin: f64,
    pub accuracy: f64,
}

/// K-medoids on the pairwise matrix; coinciding medoids make the
/// Davies-Bouldin index infinite.
pub(crate) fn cluster_score(features: &[Vec<f64>], labels: &[usize], k: usize, norm: Norm) -> Result<(ClusterScore, DissimilarityMatrix)> {
    let m = pairwise_matrix(features, norm)?;
    let r = k_medoids(&m, k)?;
    let db = davies_bouldin(&m, &r).unwrap_or(f64::INFINITY);
    let accuracy = clustering_accuracy(&r.assignment, labels)?;
    Ok((ClusterScore { davies_bouldin: db, accuracy }, m))
}

pub(crate) struct TauSweep {
    pub tau: f64,
    pub rows: Vec<(f64, ClusterScore)>,
    pub matrix: DissimilarityMatrix,
}

impl TauSweep {
    pub fn chosen(&self) -> &ClusterScore {
        &self.rows.iter().find(|r| r.0 == self.tau).expect("chosen tau is a candidate").1
    }
}

/// Clusters the VPBs at every τ and keeps the one with the smallest
/// Davies-Bouldin index.
pub(crate) fn vpb_tau_sweep(
    diagrams: &[PersistenceDiagram],
    labels: &[usize],
    k: usize,
    taus: &[f64],
    grid: usize,
    norm: Norm,
) -> Result<TauSweep> {
    let domain = dataset_domain(diagrams)?;
    let mut rows = Vec::with_capacity(taus.len());
    let mut matrices = Vec::with_capacity(taus.len());
    for &tau in taus {
        let f = vpb_features(diagrams, domain, tau, grid)?;
        let (s, m) = cluster_score(&f, labels, k, norm)?;
        rows.push((tau, s));
        matrices.push(m);
    }
    let mut it = rows.iter();
    let sel = select_tau(taus, |_| Ok(it.next().expect("one row per tau").1.davies_bouldin))?;
    let pos = taus.iter().position(|&t| t == sel.tau).expect("selected tau is a candidate");
    Ok(TauSweep {
        tau: sel.tau,
        rows,
        matrix: matrices.swap_remove(pos),
    })
}

pub(crate) fn csv_f64(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_f64).unwrap_or_default()
}
