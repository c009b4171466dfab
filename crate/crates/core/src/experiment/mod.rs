//! End-to-end experiment drivers: six-shapes clustering, synthetic
//! retrieval, linked-twist-map classification and change-point detection,
//! the VPB/PI cost benchmark and the τ / grid sensitivity sweeps.
//!
//! Every driver is a pure function of its [`ExperimentConfig`] apart from
//! wall-clock timings, which are written to separate files flagged as
//! nondeterministic in the manifest.

mod ltm;
mod params;
mod pipeline;
mod shapes;

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::baseline::{bench_diagrams, bench_setup, bench_to_csv, cost_benchmark, persistence_image_values};
use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::vectorize::vpb_values;

pub use params::{
    BenchParams, CpdParams, Essential, LtmParams, Overrides, RetrievalParams, SensitivityParams, SixShapesParams,
};
pub use pipeline::{pi_region, RETRIEVAL_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SixShapes,
    Retrieval,
    LtmClassify,
    LtmCpd,
    CostBench,
    Sensitivity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::SixShapes,
        Self::Retrieval,
        Self::LtmClassify,
        Self::LtmCpd,
        Self::CostBench,
        Self::Sensitivity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::SixShapes => "six-shapes",
            Self::Retrieval => "retrieval",
            Self::LtmClassify => "ltm-classify",
            Self::LtmCpd => "ltm-cpd",
            Self::CostBench => "cost-bench",
            Self::Sensitivity => "sensitivity",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            _ => Err(Error::Invalid(format!("unknown scale `{s}` (desk | paper)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSel {
    Vpb,
    Pi,
    #[default]
    Both,
}

impl MethodSel {
    pub fn vpb(&self) -> bool {
        matches!(self, Self::Vpb | Self::Both)
    }

    pub fn pi(&self) -> bool {
        matches!(self, Self::Pi | Self::Both)
    }
}

impl std::str::FromStr for MethodSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vpb" => Ok(Self::Vpb),
            "pi" => Ok(Self::Pi),
            "both" => Ok(Self::Both),
            _ => Err(Error::Invalid(format!("unknown method `{s}` (vpb | pi | both)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: MethodSel,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            scale: Scale::Desk,
            seed: 0,
            method: MethodSel::Both,
            overrides: Overrides::default(),
        }
    }

    /// Rejects overrides that the chosen experiment does not read.
    pub fn validate(&self) -> Result<()> {
        self.overrides.check_applicable(self.experiment)?;
        self.parameters().map(|_| ())
    }

    /// Fully resolved parameters: scale defaults with overrides applied.
    pub fn parameters(&self) -> Result<Value> {
        let (s, o) = (self.scale, &self.overrides);
        Ok(match self.experiment {
            ExperimentKind::SixShapes => serde_json::to_value(SixShapesParams::resolve(s, o)?)?,
            ExperimentKind::Retrieval => serde_json::to_value(RetrievalParams::resolve(s, o)?)?,
            ExperimentKind::LtmClassify => serde_json::to_value(LtmParams::resolve(s, o)?)?,
            ExperimentKind::LtmCpd => serde_json::to_value(CpdParams::resolve(s, o)?)?,
            ExperimentKind::CostBench => serde_json::to_value(BenchParams::resolve(s, o)?)?,
            ExperimentKind::Sensitivity => serde_json::to_value(SensitivityParams::resolve(s, o)?)?,
        })
    }
}

/// One artifact of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
    /// False for wall-clock timings.
    pub deterministic: bool,
}

impl OutputFile {
    pub(crate) fn data(name: &str, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
            deterministic: true,
        }
    }

    pub(crate) fn timing(name: &str, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
            deterministic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    /// Generated inputs: every shape spec or orbit start with its seed.
    pub items: Value,
    /// Headline numbers; deterministic.
    pub summary: Value,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub seed_derivation: String,
    pub parameters: Value,
    pub invented_parameters: Vec<String>,
    pub items: Value,
    pub outputs: Vec<String>,
    pub nondeterministic_outputs: Vec<String>,
    pub summary: Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

const SEED_DERIVATION: &str = "item seed = splitmix64(splitmix64(seed) ^ index * 0xD1B54A32D192ED03); \
                               generator = ChaCha8 seeded from the item seed";

/// Parameters the source material leaves unstated and this crate fixes.
fn invented_parameters(kind: ExperimentKind) -> Vec<String> {
    let common = ["pi.grid_region", "vpb.domain_from_dataset"];
    let specific: &[&str] = match kind {
        ExperimentKind::SixShapes | ExperimentKind::Sensitivity => &[
            "shapes.clusters3_sd",
            "shapes.nested_offset_sd",
            "shapes.nested_point_sd",
            "shapes.center",
            "shapes.h0_essential_dropped",
            "desk.sizes",
        ],
        ExperimentKind::Retrieval => &["retrieval.classes", "retrieval.points", "retrieval.noise", "desk.sizes"],
        ExperimentKind::LtmClassify => &[
            "ltm.atypical_filter_statistic",
            "ltm.test_fraction",
            "ltm.classifier_1nn",
            "ltm.norm",
            "desk.sizes",
        ],
        ExperimentKind::LtmCpd => &["cpd.tau", "cpd.min_seg", "cpd.permutations", "cpd.sig", "cpd.alpha", "cpd.norm", "desk.sizes"],
        ExperimentKind::CostBench => &["bench.tau", "bench.trials", "desk.sizes"],
    };
    let mut v: Vec<String> = common.iter().chain(specific).map(|s| s.to_string()).collect();
    if kind == ExperimentKind::CostBench {
        v.retain(|s| s != "vpb.domain_from_dataset");
        v.push("bench.domain_unit_box".into());
    }
    v
}

/// Runs one experiment in memory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (s, o, seed, m) = (cfg.scale, &cfg.overrides, cfg.seed, cfg.method);
    match cfg.experiment {
        ExperimentKind::SixShapes => shapes::six_shapes(&SixShapesParams::resolve(s, o)?, seed, m),
        ExperimentKind::Sensitivity => shapes::sensitivity(&SensitivityParams::resolve(s, o)?, seed),
        ExperimentKind::Retrieval => shapes::retrieval(&RetrievalParams::resolve(s, o)?, seed, m),
        ExperimentKind::LtmClassify => ltm::classify(&LtmParams::resolve(s, o)?, seed, m),
        ExperimentKind::LtmCpd => ltm::change_points(&CpdParams::resolve(s, o)?, seed, m),
        ExperimentKind::CostBench => cost_bench(&BenchParams::resolve(s, o)?, seed),
    }
}

fn cost_bench(p: &BenchParams, seed: u64) -> Result<RunOutput> {
    let bc = p.bench_config(seed);
    let (block, grid, pi) = bench_setup(&bc)?;
    let mut inputs = String::from("n,diagrams,points,vpb_sum,pi_sum\n");
    for &n in &p.sizes {
        let ds = if n == 0 {
            vec![PersistenceDiagram::empty(1); bc.diagrams_per_size]
        } else {
            bench_diagrams(&bc, n)?
        };
        let points: usize = ds.iter().map(|d| d.len()).sum();
        let vs: f64 = ds.iter().map(|d| vpb_values(&block, &grid, d).iter().sum::<f64>()).sum();
        let ps: f64 = ds.iter().map(|d| persistence_image_values(&pi, d).iter().sum::<f64>()).sum();
        inputs.push_str(&format!("{n},{},{points},{vs},{ps}\n", ds.len()));
    }
    let rows = cost_benchmark(&p.sizes, &bc)?;
    let mut ratio = String::from("n,vpb_seconds,pi_seconds,ratio\n");
    for pair in rows.chunks(2) {
        let (v, q) = (pair[0].seconds, pair[1].seconds);
        ratio.push_str(&format!("{},{v:.9},{q:.9},{:.4}\n", pair[0].n, if q > 0.0 { v / q } else { f64::NAN }));
    }
    Ok(RunOutput {
        files: vec![
            OutputFile::data("bench_inputs.csv", inputs),
            OutputFile::timing("bench.csv", bench_to_csv(&rows)),
            OutputFile::timing("bench_ratio.csv", ratio),
        ],
        items: serde_json::json!({ "sizes": p.sizes, "diagrams_per_size": p.diagrams_per_size }),
        summary: Value::Null,
    })
}

/// Runs `cfg` and writes its artifacts and `manifest.json` into `dir`.
pub fn write_run(cfg: &ExperimentConfig, dir: &Path) -> Result<Manifest> {
    let out = run_experiment(cfg)?;
    std::fs::create_dir_all(dir)?;
    for f in &out.files {
        std::fs::write(dir.join(&f.name), &f.contents)?;
    }
    let manifest = Manifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed_derivation: SEED_DERIVATION.into(),
        parameters: cfg.parameters()?,
        invented_parameters: invented_parameters(cfg.experiment),
        items: out.items,
        outputs: out.files.iter().filter(|f| f.deterministic).map(|f| f.name.clone()).collect(),
        nondeterministic_outputs: out.files.iter().filter(|f| !f.deterministic).map(|f| f.name.clone()).collect(),
        summary: out.summary,
    };
    std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// Reads an experiment config, or the `config` section of a manifest.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    let v: Value = serde_json::from_str(text)?;
    let cfg_value = match v.get("config") {
        Some(c) if v.get("version").is_some() => c.clone(),
        _ => v,
    };
    let cfg: ExperimentConfig = serde_json::from_value(cfg_value).map_err(|e| Error::Invalid(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}
