use rand::seq::SliceRandom;
use serde_json::{json, Value};

use super::params::{CpdParams, LtmParams};
use super::pipeline::{cloud_diagrams, csv_f64, dataset_domain, pi_features, vpb_features};
use super::{MethodSel, OutputFile, RunOutput};
use crate::cpd::{cpd_error, e_divisive, EDivisiveConfig};
use crate::datagen::{ltm_orbit, ltm_start, LTMSpec};
use crate::diagram::{EssentialPolicy, PersistenceDiagram};
use crate::error::Result;
use crate::homology::{mad_keep, PointCloud};
use crate::learn::{cv_accuracy, kfold_indices, knn_classify, DissimilarityMatrix};
use crate::metrics::{pairwise_matrix, Norm};
use crate::rng::{derive_seed, stream};

const ORBIT_TAG: u64 = 2 << 40;
const SPLIT_TAG: u64 = 3 << 40;
const FOLD_TAG: u64 = 4 << 40;
const TRIAL_TAG: u64 = 5 << 40;

struct Orbits {
    specs: Vec<LTMSpec>,
    labels: Vec<usize>,
    diagrams: Vec<PersistenceDiagram>,
}

/// `per_r` orbits for each `r`, H1 diagrams under the cap.
fn orbits(rs: &[f64], per_r: usize, length: usize, cap: Option<f64>, policy: EssentialPolicy, seed: u64) -> Result<Orbits> {
    let mut specs = Vec::new();
    let mut labels = Vec::new();
    for (ri, &r) in rs.iter().enumerate() {
        for j in 0..per_r {
            let (x0, y0) = ltm_start(&mut stream(seed, ORBIT_TAG | (ri * 1_000_000 + j) as u64));
            specs.push(LTMSpec { r, x0, y0, length });
            labels.push(ri);
        }
    }
    let clouds: Vec<PointCloud> = specs.iter().map(ltm_orbit).collect::<Result<_>>()?;
    let mut d = cloud_diagrams(&clouds, &[1], cap, policy)?;
    Ok(Orbits {
        specs,
        labels,
        diagrams: d.swap_remove(0),
    })
}

fn sub_matrix(m: &DissimilarityMatrix, idx: &[usize]) -> Result<DissimilarityMatrix> {
    let data = idx.iter().flat_map(|&i| idx.iter().map(move |&j| m.get(i, j))).collect();
    DissimilarityMatrix::new(idx.len(), data)
}

struct Split {
    train: Vec<usize>,
    test: Vec<usize>,
    folds: Vec<Vec<usize>>,
}

/// Per-class seeded split, then folds over the training positions.
fn split(labels: &[usize], classes: usize, test_fraction: f64, folds: usize, seed: u64) -> Result<Split> {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut stream(seed, SPLIT_TAG | c as u64));
        let n_test = ((members.len() as f64 * test_fraction).round() as usize).clamp(1, members.len().saturating_sub(1).max(1));
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    let folds = kfold_indices(train.len(), folds.min(train.len()), derive_seed(seed, FOLD_TAG))?;
    Ok(Split { train, test, folds })
}

/// `(cv accuracy on train, 1-NN accuracy on test)`.
fn evaluate(features: &[Vec<f64>], labels: &[usize], s: &Split, norm: Norm) -> Result<(f64, f64)> {
    let m = pairwise_matrix(features, norm)?;
    let train_labels: Vec<usize> = s.train.iter().map(|&i| labels[i]).collect();
    let cv = cv_accuracy(&sub_matrix(&m, &s.train)?, &train_labels, &s.folds)?;
    let block: Vec<f64> = s.test.iter().flat_map(|&t| s.train.iter().map(move |&j| (t, j))).map(|(t, j)| m.get(t, j)).collect();
    let pred = knn_classify(&block, &train_labels, 1)?;
    let correct = s.test.iter().zip(&pred).filter(|(&t, &p)| labels[t] == p).count();
    Ok((cv, correct as f64 / s.test.len() as f64))
}

pub(super) fn classify(p: &LtmParams, seed: u64, method: MethodSel) -> Result<RunOutput> {
    let o = orbits(&p.rs, p.orbits_per_r, p.orbit_length, p.cap, p.essential.policy(p.cap), seed)?;
    let mut keep = vec![true; o.labels.len()];
    if p.mad_filter {
        for c in 0..p.rs.len() {
            let idx: Vec<usize> = (0..o.labels.len()).filter(|&i| o.labels[i] == c).collect();
            let stat: Vec<f64> = idx.iter().map(|&i| o.diagrams[i].total_persistence()).collect();
            for (&i, k) in idx.iter().zip(mad_keep(&stat)) {
                keep[i] = k;
            }
        }
    }
    let mut orbit_csv = String::from("index,r,x0,y0,h1_points,total_persistence,kept\n");
    let mut items = Vec::new();
    for (i, s) in o.specs.iter().enumerate() {
        let d = &o.diagrams[i];
        orbit_csv.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            s.r,
            s.x0,
            s.y0,
            d.len(),
            csv_f64(d.total_persistence()),
            keep[i]
        ));
        items.push(json!({"r": s.r, "x0": s.x0, "y0": s.y0, "length": s.length}));
    }
    let kept: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
    let labels: Vec<usize> = kept.iter().map(|&i| o.labels[i]).collect();
    let diagrams: Vec<PersistenceDiagram> = kept.iter().map(|&i| o.diagrams[i].clone()).collect();
    let s = split(&labels, p.rs.len(), p.test_fraction, p.folds, seed)?;
    let domain = dataset_domain(&diagrams)?;
    let mut table = String::from("method,tau,sigma,cv_accuracy,test_accuracy,selected\n");
    let mut summary = serde_json::Map::new();
    summary.insert("kept".into(), json!(kept.len()));
    summary.insert("total".into(), json!(keep.len()));
    if method.vpb() {
        let mut rows = Vec::new();
        for &tau in &p.taus {
            let f = vpb_features(&diagrams, domain, tau, p.grid)?;
            rows.push((tau, evaluate(&f, &labels, &s, p.norm)?));
        }
        let mut best = 0;
        for (i, r) in rows.iter().enumerate() {
            let b = &rows[best];
            if r.1 .0 > b.1 .0 || (r.1 .0 == b.1 .0 && r.0 < b.0) {
                best = i;
            }
        }
        for (i, (tau, (cv, test))) in rows.iter().enumerate() {
            table.push_str(&format!("vpb,{tau},,{},{},{}\n", csv_f64(*cv), csv_f64(*test), i == best));
        }
        summary.insert("vpb".into(), json!({"tau": rows[best].0, "cv_accuracy": rows[best].1 .0, "test_accuracy": rows[best].1 .1}));
    }
    if method.pi() {
        let (f, sigma) = pi_features(&diagrams, domain, p.pi_grid, p.pi_sigma)?;
        let (cv, test) = evaluate(&f, &labels, &s, p.norm)?;
        table.push_str(&format!("pi,,{sigma},{},{},true\n", csv_f64(cv), csv_f64(test)));
        summary.insert("pi".into(), json!({"sigma": sigma, "cv_accuracy": cv, "test_accuracy": test}));
    }
    Ok(RunOutput {
        files: vec![
            OutputFile::data("ltm_orbits.csv", orbit_csv),
            OutputFile::data("ltm_classify.csv", table),
        ],
        items: Value::Array(items),
        summary: Value::Object(summary),
    })
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub(super) fn change_points(p: &CpdParams, seed: u64, method: MethodSel) -> Result<RunOutput> {
    let truth = p.truth();
    let mut methods: Vec<&str> = Vec::new();
    if method.vpb() {
        methods.push("vpb");
    }
    if method.pi() {
        methods.push("pi");
    }
    let mut header = String::from("trial,method,change_points");
    for k in 1..=truth.len() {
        header.push_str(&format!(",error_{k}"));
    }
    let mut per_trial = header + "\n";
    let mut errors: Vec<Vec<Vec<f64>>> = vec![Vec::new(); methods.len()];
    let mut items = Vec::new();
    for t in 0..p.trials {
        let tseed = derive_seed(seed, TRIAL_TAG | t as u64);
        // Regime-major order: every step of regime 1, then regime 2, ...
        let o = orbits(&p.rs, p.steps_per_regime, p.orbit_length, p.cap, p.essential.policy(p.cap), tseed)?;
        items.push(json!({
            "trial": t,
            "seed": tseed,
            "orbits": o.specs.iter().map(|s| json!([s.r, s.x0, s.y0])).collect::<Vec<_>>(),
        }));
        let domain = dataset_domain(&o.diagrams)?;
        let ecfg = EDivisiveConfig {
            min_seg: p.min_seg,
            permutations: p.permutations,
            sig: p.sig,
            alpha: p.alpha,
            seed: derive_seed(tseed, 1),
        };
        for (mi, &name) in methods.iter().enumerate() {
            let f = match name {
                "vpb" => vpb_features(&o.diagrams, domain, p.tau, p.grid)?,
                _ => pi_features(&o.diagrams, domain, p.pi_grid, p.pi_sigma)?.0,
            };
            let r = e_divisive(&f, &ecfg)?;
            let err = cpd_error(&r.change_points, &truth, p.gap);
            per_trial.push_str(&format!("{t},{name},{}", join(&r.change_points)));
            for e in &err {
                per_trial.push_str(&format!(",{e}"));
            }
            per_trial.push('\n');
            errors[mi].push(err);
        }
    }
    let mut summary_csv = String::from("method,change_point,truth,mean_abs_error,zero_error_trials\n");
    let mut summary = serde_json::Map::new();
    for (mi, &name) in methods.iter().enumerate() {
        let errs = &errors[mi];
        let n = errs.len() as f64;
        let means: Vec<f64> = (0..truth.len()).map(|k| errs.iter().map(|e| e[k]).sum::<f64>() / n).collect();
        let zeros: Vec<usize> = (0..truth.len()).map(|k| errs.iter().filter(|e| e[k] == 0.0).count()).collect();
        for k in 0..truth.len() {
            summary_csv.push_str(&format!("{name},{},{},{},{}\n", k + 1, truth[k], csv_f64(means[k]), zeros[k]));
        }
        let overall = means.iter().sum::<f64>() / means.len() as f64;
        summary.insert(
            name.into(),
            json!({"mean_abs_error": means, "zero_error_trials": zeros, "overall_mean_abs_error": overall}),
        );
    }
    Ok(RunOutput {
        files: vec![
            OutputFile::data("cpd.csv", per_trial),
            OutputFile::data("cpd_summary.csv", summary_csv),
        ],
        items: Value::Array(items),
        summary: Value::Object(summary),
    })
}
