use serde::{Deserialize, Serialize};

use super::{ExperimentKind, Scale};
use crate::baseline::BenchConfig;
use crate::diagram::EssentialPolicy;
use crate::error::{Error, Result};
use crate::metrics::Norm;

/// Handling of classes alive at the end of the filtration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Essential {
    Drop,
    Cap,
}

impl Essential {
    pub(crate) fn policy(&self, cap: Option<f64>) -> EssentialPolicy {
        match (self, cap) {
            (Self::Cap, Some(c)) => EssentialPolicy::Cap(c),
            _ => EssentialPolicy::Drop,
        }
    }
}

/// Optional replacements for scale defaults. Unset fields keep the default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grids: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norms: Option<Vec<Norm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items_per_class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps_per_regime: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagrams_per_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mad_filter: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub essential: Option<Essential>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutations: Option<usize>,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("overrides.{field}: {msg}"))
}

impl Overrides {
    fn set_fields(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        macro_rules! probe {
            ($($f:ident),*) => { $( if self.$f.is_some() { v.push(stringify!($f)); } )* };
        }
        probe!(
            taus, tau, grid, grids, pi_grid, pi_sigma, norms, norm, noise, dims, items_per_class, points,
            orbit_length, steps_per_regime, trials, sizes, diagrams_per_size, mad_filter, cap, essential, folds,
            permutations
        );
        v
    }

    pub(crate) fn check_applicable(&self, kind: ExperimentKind) -> Result<()> {
        let rips = ["cap", "essential"];
        let allowed: Vec<&str> = match kind {
            ExperimentKind::SixShapes => {
                vec!["taus", "grid", "pi_grid", "pi_sigma", "norms", "noise", "dims", "items_per_class", "points"]
            }
            ExperimentKind::Sensitivity => {
                vec!["taus", "tau", "grid", "grids", "norm", "noise", "dims", "items_per_class", "points"]
            }
            ExperimentKind::Retrieval => {
                vec!["taus", "grid", "pi_grid", "pi_sigma", "norm", "noise", "dims", "items_per_class", "points"]
            }
            ExperimentKind::LtmClassify => vec![
                "taus",
                "grid",
                "pi_grid",
                "pi_sigma",
                "norm",
                "items_per_class",
                "orbit_length",
                "mad_filter",
                "folds",
            ],
            ExperimentKind::LtmCpd => vec![
                "tau",
                "grid",
                "pi_grid",
                "pi_sigma",
                "orbit_length",
                "steps_per_regime",
                "trials",
                "permutations",
            ],
            ExperimentKind::CostBench => vec!["tau", "grid", "pi_sigma", "sizes", "diagrams_per_size", "trials"],
        };
        let uses_rips = kind != ExperimentKind::CostBench;
        for f in self.set_fields() {
            if !(allowed.contains(&f) || (uses_rips && rips.contains(&f))) {
                return Err(field_err(f, format!("not used by experiment `{}`", kind.name())));
            }
        }
        Ok(())
    }
}

fn check_taus(field: &str, taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(field_err(field, "empty list"));
    }
    if let Some(t) = taus.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(field_err(field, format!("{t} is outside (0, 1]")));
    }
    Ok(())
}

fn check_positive(field: &str, v: usize, min: usize) -> Result<()> {
    if v < min {
        return Err(field_err(field, format!("must be at least {min}")));
    }
    Ok(())
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d > 1) {
        return Err(field_err("dims", "must be a nonempty subset of {0, 1}"));
    }
    Ok(())
}

fn check_noise(noise: &[f64]) -> Result<()> {
    if noise.is_empty() || noise.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
        return Err(field_err("noise", "must be a nonempty list of nonnegative levels"));
    }
    Ok(())
}

fn check_sigma(s: Option<f64>) -> Result<()> {
    match s {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(field_err("pi_sigma", "must be positive")),
        _ => Ok(()),
    }
}

fn rips_settings(o: &Overrides, default_cap: Option<f64>, default_essential: Essential) -> Result<(Option<f64>, Essential)> {
    let cap = o.cap.or(default_cap);
    if let Some(c) = cap {
        if !(c > 0.0 && c.is_finite()) {
            return Err(field_err("cap", "must be positive and finite"));
        }
    }
    let essential = o.essential.unwrap_or(default_essential);
    if essential == Essential::Cap && cap.is_none() {
        return Err(field_err("essential", "`cap` requires a finite filtration cap"));
    }
    Ok((cap, essential))
}

const TAUS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// Classes of the linked twist map experiments.
pub const LTM_RS: [f64; 5] = [2.0, 3.5, 4.0, 4.1, 4.3];
const LTM_CAP: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SixShapesParams {
    pub items_per_class: usize,
    pub points: usize,
    pub noise: Vec<f64>,
    pub dims: Vec<usize>,
    pub norms: Vec<Norm>,
    pub taus: Vec<f64>,
    pub grid: usize,
    pub pi_grid: usize,
    pub pi_sigma: f64,
    pub cap: Option<f64>,
    pub essential: Essential,
}

impl SixShapesParams {
    pub fn resolve(scale: Scale, o: &Overrides) -> Result<Self> {
        let (items, points) = match scale {
            Scale::Desk => (10, 100),
            Scale::Paper => (25, 500),
        };
        let (cap, essential) = rips_settings(o, None, Essential::Drop)?;
        let p = Self {
            items_per_class: o.items_per_class.unwrap_or(items),
            points: o.points.unwrap_or(points),
            noise: o.noise.clone().unwrap_or_else(|| vec![0.05, 0.1]),
            dims: o.dims.clone().unwrap_or_else(|| vec![0, 1]),
            norms: o.norms.clone().unwrap_or_else(|| vec![Norm::L1, Norm::L2, Norm::Linf]),
            taus: o.taus.clone().unwrap_or_else(|| TAUS.to_vec()),
            grid: o.grid.unwrap_or(6),
            pi_grid: o.pi_grid.unwrap_or(20),
            pi_sigma: o.pi_sigma.unwrap_or(0.1),
            cap,
            essential,
        };
        check_positive("items_per_class", p.items_per_class, 2)?;
        check_positive("points", p.points, 3)?;
        check_noise(&p.noise)?;
        check_dims(&p.dims)?;
        if p.norms.is_empty() {
            return Err(field_err("norms", "empty list"));
        }
        check_taus("taus", &p.taus)?;
        check_positive("grid", p.grid, 1)?;
        check_positive("pi_grid", p.pi_grid, 1)?;
        check_sigma(Some(p.pi_sigma))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityParams {
    pub items_per_class: usize,
    pub points: usize,
    pub noise: Vec<f64>,
    pub dims: Vec<usize>,
    pub norm: Norm,
    /// τ sweep, run at `tau_sweep_grid`.
    pub taus: Vec<f64>,
    pub tau_sweep_grid: usize,
    /// Grid sweep, run at `grid_sweep_tau`.
    pub grids: Vec<usize>,
    pub grid_sweep_tau: f64,
    pub cap: Option<f64>,
    pub essential: Essential,
}

impl SensitivityParams {
    pub fn resolve(scale: Scale, o: &Overrides) -> Result<Self> {
        let base = SixShapesParams::resolve(
            scale,
            &Overrides {
                items_per_class: o.items_per_class,
                points: o.points,
                noise: o.noise.clone(),
                dims: o.dims.clone(),
                cap: o.cap,
                essential: o.essential,
                ..Default::default()
            },
        )?;
        let p = Self {
            items_per_class: base.items_per_class,
            points: base.points,
            noise: base.noise,
            dims: base.dims,
            norm: o.norm.unwrap_or(Norm::L2),
            taus: o.taus.clone().unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect()),
            tau_sweep_grid: o.grid.unwrap_or(6),
            grids: o.grids.clone().unwrap_or_else(|| (2..=12).collect()),
            grid_sweep_tau: o.tau.unwrap_or(0.75),
            cap: base.cap,
            essential: base.essential,
        };
        check_taus("taus", &p.taus)?;
        check_taus("tau", &[p.grid_sweep_tau])?;
        check_positive("grid", p.tau_sweep_grid, 1)?;
        if p.grids.is_empty() || p.grids.contains(&0) {
            return Err(field_err("grids", "must be a nonempty list of positive sizes"));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalParams {
    pub items_per_class: usize,
    pub points: usize,
    pub noise: f64,
    pub dims: Vec<usize>,
    pub norm: Norm,
    pub taus: Vec<f64>,
    pub grid: usize,
    pub pi_grid: usize,
    /// `None`: half the largest persistence divided by the PI grid size.
    pub pi_sigma: Option<f64>,
    pub cap: Option<f64>,
    pub essential: Essential,
}

impl RetrievalParams {
    pub fn resolve(scale: Scale, o: &Overrides) -> Result<Self> {
        let points = match scale {
            Scale::Desk => 100,
            Scale::Paper => 500,
        };
        let noise = match o.noise.as_deref() {
            None => 0.05,
            Some([e]) => *e,
            Some(_) => return Err(field_err("noise", "retrieval takes exactly one noise level")),
        };
        let (cap, essential) = rips_settings(o, None, Essential::Drop)?;
        let p = Self {
            items_per_class: o.items_per_class.unwrap_or(10),
            points: o.points.unwrap_or(points),
            noise,
            dims: o.dims.clone().unwrap_or_else(|| vec![1]),
            norm: o.norm.unwrap_or(Norm::L1),
            taus: o.taus.clone().unwrap_or_else(|| TAUS.to_vec()),
            grid: o.grid.unwrap_or(12),
            pi_grid: o.pi_grid.unwrap_or(20),
            pi_sigma: o.pi_sigma,
            cap,
            essential,
        };
        check_positive("items_per_class", p.items_per_class, 2)?;
        check_positive("points", p.points, 3)?;
        check_noise(&[p.noise])?;
        check_dims(&p.dims)?;
        check_taus("taus", &p.taus)?;
        check_positive("grid", p.grid, 1)?;
        check_positive("pi_grid", p.pi_grid, 1)?;
        check_sigma(p.pi_sigma)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LtmParams {
    pub rs: Vec<f64>,
    pub orbits_per_r: usize,
    pub orbit_length: usize,
    pub cap: Option<f64>,
    pub essential: Essential,
    pub mad_filter: bool,
    pub taus: Vec<f64>,
    pub grid: usize,
    pub pi_grid: usize,
    pub pi_sigma: Option<f64>,
    pub norm: Norm,
    pub folds: usize,
    pub test_fraction: f64,
}

impl LtmParams {
    pub fn resolve(scale: Scale, o: &Overrides) -> Result<Self> {
        let (orbits, length) = match scale {
            Scale::Desk => (20, 300),
            Scale::Paper => (100, 1000),
        };
        let (cap, essential) = rips_settings(o, Some(LTM_CAP), Essential::Cap)?;
        let p = Self {
            rs: LTM_RS.to_vec(),
            orbits_per_r: o.items_per_class.unwrap_or(orbits),
            orbit_length: o.orbit_length.unwrap_or(length),
            cap,
            essential,
            mad_filter: o.mad_filter.unwrap_or(true),
            taus: o.taus.clone().unwrap_or_else(|| TAUS.to_vec()),
            grid: o.grid.unwrap_or(7),
            pi_grid: o.pi_grid.unwrap_or(20),
            pi_sigma: o.pi_sigma,
            norm: o.norm.unwrap_or(Norm::L2),
            folds: o.folds.unwrap_or(10),
            test_fraction: 0.3,
        };
        check_positive("items_per_class", p.orbits_per_r, 4)?;
        check_positive("orbit_length", p.orbit_length, 2)?;
        check_taus("taus", &p.taus)?;
        check_positive("grid", p.grid, 1)?;
        check_positive("pi_grid", p.pi_grid, 1)?;
        check_positive("folds", p.folds, 2)?;
        check_sigma(p.pi_sigma)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpdParams {
    pub rs: Vec<f64>,
    pub steps_per_regime: usize,
    pub orbit_length: usize,
    pub trials: usize,
    pub cap: Option<f64>,
    pub essential: Essential,
    pub tau: f64,
    pub grid: usize,
    pub pi_grid: usize,
    pub pi_sigma: Option<f64>,
    pub permutations: usize,
    pub min_seg: usize,
    pub sig: f64,
    pub alpha: f64,
    /// Error charged to an undetected change point: the regime length.
    pub gap: f64,
}

impl CpdParams {
    pub fn resolve(scale: Scale, o: &Overrides) -> Result<Self> {
        let (steps, length) = match scale {
            Scale::Desk => (20, 300),
            Scale::Paper => (50, 1000),
        };
        let (cap, essential) = rips_settings(o, Some(LTM_CAP), Essential::Cap)?;
        let steps = o.steps_per_regime.unwrap_or(steps);
        let p = Self {
            rs: LTM_RS.to_vec(),
            steps_per_regime: steps,
            orbit_length: o.orbit_length.unwrap_or(length),
            trials: o.trials.unwrap_or(10),
            cap,
            essential,
            tau: o.tau.unwrap_or(0.5),
            grid: o.grid.unwrap_or(7),
            pi_grid: o.pi_grid.unwrap_or(20),
            pi_sigma: o.pi_sigma,
            permutations: o.permutations.unwrap_or(199),
            min_seg: 5,
            sig: 0.05,
            alpha: 1.0,
            gap: steps as f64,
        };
        check_positive("steps_per_regime", p.steps_per_regime, 2 * p.min_seg)?;
        check_positive("orbit_length", p.orbit_length, 2)?;
        check_positive("trials", p.trials, 1)?;
        check_taus("tau", &[p.tau])?;
        check_positive("grid", p.grid, 1)?;
        check_positive("pi_grid", p.pi_grid, 1)?;
        check_positive("permutations", p.permutations, 1)?;
        check_sigma(p.pi_sigma)?;
        Ok(p)
    }

    /// 1-based first index of regimes 2..: `S + 1, 2S + 1, ...`.
    pub fn truth(&self) -> Vec<usize> {
        (1..self.rs.len()).map(|k| k * self.steps_per_regime + 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchParams {
    pub sizes: Vec<usize>,
    pub diagrams_per_size: usize,
    pub trials: usize,
    pub grid: usize,
    pub tau: f64,
    pub sigma: f64,
}

impl BenchParams {
    pub fn resolve(scale: Scale, o: &Overrides) -> Result<Self> {
        let (sizes, per): (Vec<usize>, usize) = match scale {
            Scale::Desk => ((1..=5).map(|k| k * 1000).collect(), 10),
            Scale::Paper => ((1..=20).map(|k| k * 1000).collect(), 100),
        };
        let d = BenchConfig::default();
        let p = Self {
            sizes: o.sizes.clone().unwrap_or(sizes),
            diagrams_per_size: o.diagrams_per_size.unwrap_or(per),
            trials: o.trials.unwrap_or(d.trials),
            grid: o.grid.unwrap_or(d.grid),
            tau: o.tau.unwrap_or(d.tau),
            sigma: o.pi_sigma.unwrap_or(d.sigma),
        };
        if p.sizes.is_empty() {
            return Err(field_err("sizes", "empty list"));
        }
        check_positive("diagrams_per_size", p.diagrams_per_size, 1)?;
        check_positive("trials", p.trials, 1)?;
        check_positive("grid", p.grid, 1)?;
        check_taus("tau", &[p.tau])?;
        check_sigma(Some(p.sigma))?;
        Ok(p)
    }

    pub fn bench_config(&self, seed: u64) -> BenchConfig {
        BenchConfig {
            diagrams_per_size: self.diagrams_per_size,
            trials: self.trials,
            grid: self.grid,
            tau: self.tau,
            sigma: self.sigma,
            seed,
        }
    }
}
