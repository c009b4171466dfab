use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde_json::{json, Value};
use vpb_core::baseline::{bench_to_csv, cost_benchmark, default_sigma, persistence_image_values, BenchConfig, PIConfig, PIWeighting};
use vpb_core::block::BlockConfig;
use vpb_core::cpd::{cpd_error, e_divisive, EDivisiveConfig};
use vpb_core::datagen::{ltm_orbit, ltm_start, random_beta_diagram, sample_shape, LTMSpec, ShapeKind, ShapeSpec};
use vpb_core::diagram::{self, bounding_domain, CoordFormat, Domain, EssentialPolicy, PersistenceDiagram};
use vpb_core::experiment::{load_config, pi_region, write_run, ExperimentConfig, Overrides};
use vpb_core::homology::{rips_h0, rips_h1, FiltrationCap, PointCloud, RipsOptions};
use vpb_core::learn::{clustering_accuracy, cv_accuracy, davies_bouldin, k_medoids, kfold_indices, retrieval_stats, DissimilarityMatrix};
use vpb_core::metrics::{pairwise_matrix, wasserstein, wasserstein_distance, Slot};
use vpb_core::rng::stream;
use vpb_core::vectorize::{features_from_csv, features_to_csv, vpb_values, GridPartition};

use crate::io::{self, Sink};
use crate::{
    BenchArgs, ClassifyArgs, ClusterArgs, Command, CpdArgs, DiagramInput, DistArgs, EssentialArg, Format, GenWhat,
    LabelledMatrix, PhArgs, PiArgs, RunArgs, VpbArgs,
};

pub fn dispatch(cmd: Command, seed: Option<u64>, sink: &Sink) -> Result<()> {
    let s = seed.unwrap_or(0);
    match cmd {
        Command::Gen(a) => gen(a.what, s, sink),
        Command::Ph(a) => ph(a, sink),
        Command::Vpb(a) => vpb(a, sink),
        Command::Pi(a) => pi(a, sink),
        Command::Dist(a) => dist(a, sink),
        Command::Cluster(a) => cluster(a, sink),
        Command::Retrieve(a) => retrieve(a, sink),
        Command::Classify(a) => classify(a, s, sink),
        Command::Cpd(a) => cpd(a, s, sink),
        Command::Bench(a) => bench(a, s, sink),
        Command::Run(a) => run(a, seed, sink),
    }
}

fn coord(f: Format) -> CoordFormat {
    match f {
        Format::BirthDeath => CoordFormat::BirthDeath,
        Format::BirthPersistence => CoordFormat::BirthPersistence,
    }
}

fn policy(e: EssentialArg, cap: Option<f64>) -> Result<EssentialPolicy> {
    match (e, cap) {
        (EssentialArg::Drop, _) => Ok(EssentialPolicy::Drop),
        (EssentialArg::Cap, Some(c)) => Ok(EssentialPolicy::Cap(c)),
        (EssentialArg::Cap, None) => bail!("--essential cap needs --cap"),
    }
}

fn json_line(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn gen(what: GenWhat, seed: u64, sink: &Sink) -> Result<()> {
    let text = match what {
        GenWhat::Shape { kind, points, noise } => {
            let kind: ShapeKind = kind.parse()?;
            sample_shape(&ShapeSpec {
                kind,
                n_points: points,
                noise_eta: noise,
                seed,
            })?
            .to_csv()
        }
        GenWhat::Ltm { r, length, x0, y0 } => {
            let (sx, sy) = ltm_start(&mut stream(seed, 0));
            ltm_orbit(&LTMSpec {
                r,
                x0: x0.unwrap_or(sx),
                y0: y0.unwrap_or(sy),
                length,
            })?
            .to_csv()
        }
        GenWhat::Beta { n, birth, persistence, dim } => {
            let d = random_beta_diagram(n, birth, persistence, seed)?;
            diagram::to_csv([&PersistenceDiagram::new(dim, d.points)], CoordFormat::BirthPersistence)
        }
    };
    sink.emit(&text)
}

fn ph(a: PhArgs, sink: &Sink) -> Result<()> {
    let cloud = PointCloud::from_csv(&io::read(&a.input)?).with_context(|| format!("in {}", a.input.display()))?;
    let fcap = match a.cap {
        Some(c) => FiltrationCap::new(c)?,
        None => FiltrationCap::unbounded(),
    };
    let pol = policy(a.essential, a.cap)?;
    let mut out = Vec::new();
    for &d in &a.dims {
        let bars = match d {
            0 => rips_h0(&cloud, fcap),
            1 => rips_h1(&cloud, RipsOptions::new(fcap))?,
            _ => bail!("dimension {d} is not supported (0 or 1)"),
        };
        out.push(bars.resolve(pol)?);
    }
    let text = if a.json {
        diagram::to_json(&out)? + "\n"
    } else {
        diagram::to_csv(&out, coord(a.format))
    };
    sink.emit(&text)
}

fn load_inputs(input: &DiagramInput) -> Result<Vec<PersistenceDiagram>> {
    let pol = policy(input.essential, input.cap)?;
    input
        .inputs
        .iter()
        .map(|p| io::pick_dim(&io::read_diagrams(p, input.format.map(coord), pol)?, input.dim, p))
        .collect()
}

fn domain_of(ds: &[PersistenceDiagram], given: Option<(f64, f64)>) -> Result<Domain> {
    match given {
        Some((b, p)) => Ok(Domain::new(b, p)?),
        None => bounding_domain(ds, 0.0).context("cannot infer a domain; pass --domain birth_max,pers_max"),
    }
}

fn vpb(a: VpbArgs, sink: &Sink) -> Result<()> {
    let ds = load_inputs(&a.input)?;
    let cfg = BlockConfig::production(a.tau, domain_of(&ds, a.domain)?)?;
    let (nx, ny) = a.grid;
    let grid = match a.region {
        Some(r) => GridPartition::new(r, nx, ny)?,
        None => GridPartition::default_for(&cfg, nx, ny)?,
    };
    let rows: Vec<Vec<f64>> = ds.iter().map(|d| vpb_values(&cfg, &grid, d)).collect();
    sink.emit(&features_to_csv(&rows))
}

fn pi(a: PiArgs, sink: &Sink) -> Result<()> {
    let ds = load_inputs(&a.input)?;
    let domain = domain_of(&ds, a.domain)?;
    let (nx, ny) = a.grid;
    let grid = GridPartition::new(a.region.unwrap_or_else(|| pi_region(&domain)), nx, ny)?;
    let sigma = a.sigma.unwrap_or_else(|| default_sigma(domain.pers_max, nx.max(ny)));
    eprintln!("sigma = {sigma}");
    let cfg = PIConfig::new(sigma, grid, PIWeighting::Linear, domain.pers_max)?;
    let rows: Vec<Vec<f64>> = ds.iter().map(|d| persistence_image_values(&cfg, d)).collect();
    sink.emit(&features_to_csv(&rows))
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn matching_json(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<Value> {
    let m = wasserstein(d1, d2, p)?;
    let pt = |s: Slot, own: &PersistenceDiagram, other: &PersistenceDiagram| match s {
        Slot::Point(i) => json!({"point": i, "at": [own.points[i].birth, own.points[i].persistence]}),
        Slot::Projection(j) => {
            let q = other.points[j].axis_projection();
            json!({"projection_of": j, "at": [q.birth, q.persistence]})
        }
    };
    let pairs: Vec<Value> = m
        .pairs
        .iter()
        .filter(|(a, b)| !matches!((a, b), (Slot::Projection(_), Slot::Projection(_))))
        .map(|&(a, b)| json!({"left": pt(a, d1, d2), "right": pt(b, d2, d1)}))
        .collect();
    Ok(json!({"p": p, "cost": m.cost, "pairs": pairs}))
}

fn dist(a: DistArgs, sink: &Sink) -> Result<()> {
    if let Some(f) = &a.features {
        let rows = features_from_csv(&io::read(f)?).with_context(|| format!("in {}", f.display()))?;
        return sink.emit(&pairwise_matrix(&rows, a.norm)?.to_csv());
    }
    ensure!(!a.inputs.is_empty(), "give --features, or diagrams with --in");
    let ds: Vec<PersistenceDiagram> = a
        .inputs
        .iter()
        .map(|p| io::pick_dim(&io::read_diagrams(p, a.format.map(coord), EssentialPolicy::Drop)?, a.dim, p))
        .collect::<Result<_>>()?;
    if a.matching {
        ensure!(ds.len() >= 2, "--matching needs two diagrams");
        return sink.emit(&json_line(&matching_json(&ds[0], &ds[1], a.p)?)?);
    }
    let n = ds.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let w = wasserstein_distance(&ds[i], &ds[j], a.p)?;
            data[i * n + j] = w;
            data[j * n + i] = w;
        }
    }
    let ids: Vec<String> = a.inputs.iter().map(|p| stem(p)).collect();
    sink.emit(&DissimilarityMatrix::new(n, data)?.with_ids(ids)?.to_csv())
}

fn read_matrix(p: &PathBuf) -> Result<DissimilarityMatrix> {
    DissimilarityMatrix::from_csv(&io::read(p)?).with_context(|| format!("in {}", p.display()))
}

fn labelled(a: &LabelledMatrix) -> Result<(DissimilarityMatrix, Vec<usize>, Vec<String>)> {
    let m = read_matrix(&a.matrix)?;
    let (labels, names) = io::read_labels(&a.labels)?;
    ensure!(
        labels.len() == m.n(),
        "{} has {} labels for a {}x{} matrix",
        a.labels.display(),
        labels.len(),
        m.n(),
        m.n()
    );
    Ok((m, labels, names))
}

fn cluster(a: ClusterArgs, sink: &Sink) -> Result<()> {
    let m = read_matrix(&a.matrix)?;
    let r = k_medoids(&m, a.k)?;
    let db = davies_bouldin(&m, &r).ok();
    let mut v = json!({
        "k": a.k,
        "medoids": r.medoids,
        "assignment": r.assignment,
        "cost": r.cost,
        "converged": r.converged,
        "davies_bouldin": db,
    });
    if let Some(lp) = &a.labels {
        let (labels, _) = io::read_labels(lp)?;
        ensure!(labels.len() == m.n(), "{} has {} labels for {} items", lp.display(), labels.len(), m.n());
        v["accuracy"] = json!(clustering_accuracy(&r.assignment, &labels)?);
    }
    sink.emit(&json_line(&v)?)
}

fn retrieve(a: LabelledMatrix, sink: &Sink) -> Result<()> {
    let (m, labels, _) = labelled(&a)?;
    sink.emit(&json_line(&serde_json::to_value(retrieval_stats(&m, &labels)?)?)?)
}

fn classify(a: ClassifyArgs, seed: u64, sink: &Sink) -> Result<()> {
    let (m, labels, names) = labelled(&a.data)?;
    let folds = kfold_indices(m.n(), a.folds, seed)?;
    let acc = cv_accuracy(&m, &labels, &folds)?;
    sink.emit(&json_line(&json!({"folds": a.folds, "classes": names, "cv_accuracy": acc}))?)
}

fn cpd(a: CpdArgs, seed: u64, sink: &Sink) -> Result<()> {
    let rows = features_from_csv(&io::read(&a.features)?).with_context(|| format!("in {}", a.features.display()))?;
    let cfg = EDivisiveConfig {
        min_seg: a.min_seg,
        permutations: a.permutations,
        sig: a.sig,
        alpha: a.alpha,
        seed,
    };
    let r = e_divisive(&rows, &cfg)?;
    let mut v = serde_json::to_value(&r)?;
    if let Some(t) = &a.truth {
        v["errors"] = json!(cpd_error(&r.change_points, t, a.gap));
    }
    sink.emit(&json_line(&v)?)
}

fn bench(a: BenchArgs, seed: u64, sink: &Sink) -> Result<()> {
    let cfg = BenchConfig {
        diagrams_per_size: a.diagrams,
        trials: a.trials,
        grid: a.grid,
        tau: a.tau,
        sigma: a.sigma,
        seed,
    };
    sink.emit(&bench_to_csv(&cost_benchmark(&a.sizes, &cfg)?))
}

fn apply_overrides(o: &mut Overrides, a: &RunArgs) {
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = &a.$f { o.$f = Some(v.clone()); } )* };
    }
    set!(
        taus, tau, grid, grids, pi_grid, pi_sigma, norms, norm, noise, dims, items_per_class, points, orbit_length,
        steps_per_regime, trials, sizes, diagrams_per_size, mad_filter, cap, folds, permutations
    );
    if let Some(e) = a.essential {
        o.essential = Some(e.into());
    }
}

fn run(a: RunArgs, seed: Option<u64>, sink: &Sink) -> Result<()> {
    let mut cfg = match (&a.config, a.experiment) {
        (Some(p), kind) => {
            let c = load_config(&io::read(p)?).with_context(|| format!("in {}", p.display()))?;
            if let Some(k) = kind {
                ensure!(k == c.experiment, "{} configures {}, not {}", p.display(), c.experiment.name(), k.name());
            }
            c
        }
        (None, Some(k)) => ExperimentConfig::new(k),
        (None, None) => bail!("name an experiment or pass --config"),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = a.scale {
        cfg.scale = s;
    }
    if let Some(m) = a.method {
        cfg.method = m;
    }
    apply_overrides(&mut cfg.overrides, &a);
    cfg.validate()?;
    let dir = sink
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("vpb-out").join(cfg.experiment.name()));
    eprintln!("running {} ({:?} scale, seed {}) into {}", cfg.experiment.name(), cfg.scale, cfg.seed, dir.display());
    let manifest = write_run(&cfg, &dir).with_context(|| format!("writing {}", dir.display()))?;
    for f in manifest.outputs.iter().chain(&manifest.nondeterministic_outputs) {
        eprintln!("wrote {}", dir.join(f).display());
    }
    if sink.stdout {
        let main = manifest.outputs.first().ok_or_else(|| anyhow!("experiment produced no data file"))?;
        print!("{}", io::read(&dir.join(main))?);
    }
    Ok(())
}
