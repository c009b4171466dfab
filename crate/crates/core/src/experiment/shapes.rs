use std::time::Instant;

use serde_json::{json, Value};

use super::params::{RetrievalParams, SensitivityParams, SixShapesParams};
use super::pipeline::{
    cloud_diagrams, cluster_score, csv_f64, csv_opt, dataset_domain, pi_features, vpb_features, vpb_tau_sweep,
    RETRIEVAL_CLASSES,
};
use super::{MethodSel, OutputFile, RunOutput};
use crate::datagen::{sample_shape, shape_constants::CENTER, ShapeKind, ShapeSpec};
use crate::diagram::PersistenceDiagram;
use crate::error::Result;
use crate::homology::PointCloud;
use crate::learn::retrieval_stats;
use crate::metrics::pairwise_matrix;
use crate::rng::derive_seed;

struct Corpus {
    specs: Vec<ShapeSpec>,
    labels: Vec<usize>,
    /// `diagrams[k]` holds dimension `dims[k]`.
    diagrams: Vec<Vec<PersistenceDiagram>>,
}

fn shape_corpus(
    items: usize,
    points: usize,
    eta: f64,
    noise_index: usize,
    dims: &[usize],
    cap: Option<f64>,
    policy: crate::diagram::EssentialPolicy,
    seed: u64,
) -> Result<Corpus> {
    let mut specs = Vec::new();
    let mut labels = Vec::new();
    for (si, kind) in ShapeKind::ALL.into_iter().enumerate() {
        for k in 0..items {
            let tag = ((noise_index * ShapeKind::ALL.len() + si) * 1_000_000 + k) as u64;
            specs.push(ShapeSpec {
                kind,
                n_points: points,
                noise_eta: eta,
                seed: derive_seed(seed, tag),
            });
            labels.push(si);
        }
    }
    let clouds: Vec<PointCloud> = specs.iter().map(sample_shape).collect::<Result<_>>()?;
    let diagrams = cloud_diagrams(&clouds, dims, cap, policy)?;
    Ok(Corpus { specs, labels, diagrams })
}

fn specs_json(specs: &[ShapeSpec]) -> Value {
    Value::Array(
        specs
            .iter()
            .map(|s| json!({"kind": s.kind.name(), "n_points": s.n_points, "noise_eta": s.noise_eta, "seed": s.seed}))
            .collect(),
    )
}

pub(super) fn six_shapes(p: &SixShapesParams, seed: u64, method: MethodSel) -> Result<RunOutput> {
    let k = ShapeKind::ALL.len();
    let policy = p.essential.policy(p.cap);
    let mut table = String::from("metric,dim,noise,method,accuracy,tau\n");
    let mut sweep_csv = String::from("metric,dim,noise,tau,davies_bouldin,accuracy\n");
    let mut timing = String::from("metric,dim,noise,method,seconds\n");
    let mut summary = Vec::new();
    let mut items = Vec::new();
    for (ni, &eta) in p.noise.iter().enumerate() {
        let corpus = shape_corpus(p.items_per_class, p.points, eta, ni, &p.dims, p.cap, policy, seed)?;
        items.extend(specs_json(&corpus.specs).as_array().cloned().unwrap_or_default());
        for (di, &dim) in p.dims.iter().enumerate() {
            let ds = &corpus.diagrams[di];
            for &norm in &p.norms {
                if method.vpb() {
                    let t = Instant::now();
                    let sweep = vpb_tau_sweep(ds, &corpus.labels, k, &p.taus, p.grid, norm)?;
                    let secs = t.elapsed().as_secs_f64();
                    for (tau, s) in &sweep.rows {
                        sweep_csv.push_str(&format!(
                            "{norm},{dim},{eta},{tau},{},{}\n",
                            csv_f64(s.davies_bouldin),
                            csv_f64(s.accuracy)
                        ));
                    }
                    let acc = sweep.chosen().accuracy;
                    table.push_str(&format!("{norm},{dim},{eta},vpb,{},{}\n", csv_f64(acc), sweep.tau));
                    timing.push_str(&format!("{norm},{dim},{eta},vpb,{secs:.6}\n"));
                    summary.push(json!({"metric": norm.to_string(), "dim": dim, "noise": eta, "method": "vpb", "accuracy": acc, "tau": sweep.tau}));
                }
                if method.pi() {
                    let t = Instant::now();
                    let domain = dataset_domain(ds)?;
                    let (f, _) = pi_features(ds, domain, p.pi_grid, Some(p.pi_sigma))?;
                    let (s, _) = cluster_score(&f, &corpus.labels, k, norm)?;
                    let secs = t.elapsed().as_secs_f64();
                    table.push_str(&format!("{norm},{dim},{eta},pi,{},\n", csv_f64(s.accuracy)));
                    timing.push_str(&format!("{norm},{dim},{eta},pi,{secs:.6}\n"));
                    summary.push(json!({"metric": norm.to_string(), "dim": dim, "noise": eta, "method": "pi", "accuracy": s.accuracy}));
                }
            }
        }
    }
    let mut files = vec![OutputFile::data("six_shapes.csv", table)];
    if method.vpb() {
        files.push(OutputFile::data("six_shapes_tau.csv", sweep_csv));
    }
    files.push(OutputFile::timing("six_shapes_timing.csv", timing));
    Ok(RunOutput {
        files,
        items: Value::Array(items),
        summary: Value::Array(summary),
    })
}

pub(super) fn sensitivity(p: &SensitivityParams, seed: u64) -> Result<RunOutput> {
    let k = ShapeKind::ALL.len();
    let policy = p.essential.policy(p.cap);
    let mut by_tau = String::from("dim,noise,grid,tau,accuracy\n");
    let mut by_grid = String::from("dim,noise,tau,grid,accuracy\n");
    let mut items = Vec::new();
    let mut summary = Vec::new();
    for (ni, &eta) in p.noise.iter().enumerate() {
        let corpus = shape_corpus(p.items_per_class, p.points, eta, ni, &p.dims, p.cap, policy, seed)?;
        items.extend(specs_json(&corpus.specs).as_array().cloned().unwrap_or_default());
        for (di, &dim) in p.dims.iter().enumerate() {
            let ds = &corpus.diagrams[di];
            let domain = dataset_domain(ds)?;
            let mut accs = Vec::new();
            for &tau in &p.taus {
                let f = vpb_features(ds, domain, tau, p.tau_sweep_grid)?;
                let acc = cluster_score(&f, &corpus.labels, k, p.norm)?.0.accuracy;
                by_tau.push_str(&format!("{dim},{eta},{},{tau},{}\n", p.tau_sweep_grid, csv_f64(acc)));
                accs.push(acc);
            }
            let mut gaccs = Vec::new();
            for &g in &p.grids {
                let f = vpb_features(ds, domain, p.grid_sweep_tau, g)?;
                let acc = cluster_score(&f, &corpus.labels, k, p.norm)?.0.accuracy;
                by_grid.push_str(&format!("{dim},{eta},{},{g},{}\n", p.grid_sweep_tau, csv_f64(acc)));
                gaccs.push(acc);
            }
            summary.push(json!({"dim": dim, "noise": eta, "accuracy_by_tau": accs, "accuracy_by_grid": gaccs}));
        }
    }
    Ok(RunOutput {
        files: vec![
            OutputFile::data("sensitivity_tau.csv", by_tau),
            OutputFile::data("sensitivity_grid.csv", by_grid),
        ],
        items: Value::Array(items),
        summary: Value::Array(summary),
    })
}

/// `center + scale * (x - center)` for every point.
fn scaled(cloud: &PointCloud, scale: f64) -> Result<PointCloud> {
    let dim = cloud.dim();
    let coords = (0..cloud.len())
        .flat_map(|i| cloud.point(i).iter().enumerate().map(move |(a, &x)| CENTER[a] + scale * (x - CENTER[a])).collect::<Vec<_>>())
        .collect();
    PointCloud::new(dim, coords)
}

pub(super) fn retrieval(p: &RetrievalParams, seed: u64, method: MethodSel) -> Result<RunOutput> {
    let k = RETRIEVAL_CLASSES.len();
    let mut labels = Vec::new();
    let mut clouds = Vec::new();
    let mut items = Vec::new();
    for (ci, &(kind, scale)) in RETRIEVAL_CLASSES.iter().enumerate() {
        for j in 0..p.items_per_class {
            let spec = ShapeSpec {
                kind,
                n_points: p.points,
                noise_eta: p.noise,
                seed: derive_seed(seed, (1u64 << 40) | (ci * 1_000_000 + j) as u64),
            };
            clouds.push(scaled(&sample_shape(&spec)?, scale)?);
            items.push(json!({"class": ci, "kind": kind.name(), "scale": scale, "n_points": spec.n_points, "noise_eta": spec.noise_eta, "seed": spec.seed}));
            labels.push(ci);
        }
    }
    let policy = p.essential.policy(p.cap);
    let diagrams = cloud_diagrams(&clouds, &p.dims, p.cap, policy)?;
    let mut table = String::from("dim,method,nn,ft,st,e,dcg,tau,sigma,clustering_accuracy\n");
    let mut sweep_csv = String::from("dim,tau,davies_bouldin,clustering_accuracy\n");
    let mut summary = Vec::new();
    for (di, &dim) in p.dims.iter().enumerate() {
        let ds = &diagrams[di];
        if method.vpb() {
            let sweep = vpb_tau_sweep(ds, &labels, k, &p.taus, p.grid, p.norm)?;
            for (tau, s) in &sweep.rows {
                sweep_csv.push_str(&format!("{dim},{tau},{},{}\n", csv_f64(s.davies_bouldin), csv_f64(s.accuracy)));
            }
            let r = retrieval_stats(&sweep.matrix, &labels)?;
            let acc = sweep.chosen().accuracy;
            table.push_str(&format!(
                "{dim},vpb,{},{},{},{},{},{},,{}\n",
                csv_f64(r.nn),
                csv_f64(r.ft),
                csv_f64(r.st),
                csv_f64(r.e),
                csv_f64(r.dcg),
                sweep.tau,
                csv_f64(acc)
            ));
            summary.push(json!({"dim": dim, "method": "vpb", "stats": r, "tau": sweep.tau, "clustering_accuracy": acc}));
        }
        if method.pi() {
            let domain = dataset_domain(ds)?;
            let (f, sigma) = pi_features(ds, domain, p.pi_grid, p.pi_sigma)?;
            let m = pairwise_matrix(&f, p.norm)?;
            let r = retrieval_stats(&m, &labels)?;
            let (s, _) = cluster_score(&f, &labels, k, p.norm)?;
            table.push_str(&format!(
                "{dim},pi,{},{},{},{},{},,{},{}\n",
                csv_f64(r.nn),
                csv_f64(r.ft),
                csv_f64(r.st),
                csv_f64(r.e),
                csv_f64(r.dcg),
                csv_opt(Some(sigma)),
                csv_f64(s.accuracy)
            ));
            summary.push(json!({"dim": dim, "method": "pi", "stats": r, "sigma": sigma, "clustering_accuracy": s.accuracy}));
        }
    }
    let mut files = vec![OutputFile::data("retrieval.csv", table)];
    if method.vpb() {
        files.push(OutputFile::data("retrieval_tau.csv", sweep_csv));
    }
    Ok(RunOutput {
        files,
        items: Value::Array(items),
        summary: Value::Array(summary),
    })
}
