//! Browser bindings: VPB and persistence-image heatmaps of an editable
//! diagram, a linked-twist-map orbit with its H1 diagram, and optimal
//! Wasserstein matchings. Inputs and outputs are JSON strings.

use serde::{Deserialize, Serialize};
use vpb_core::baseline::{default_sigma, persistence_image_values, PIConfig, PIWeighting};
use vpb_core::block::BlockConfig;
use vpb_core::datagen::{ltm_orbit, LTMSpec};
use vpb_core::diagram::{bounding_domain, DiagramPoint, Domain, EssentialPolicy, PersistenceDiagram, Rect};
use vpb_core::experiment::pi_region;
use vpb_core::homology::{rips_h1, FiltrationCap, RipsOptions};
use vpb_core::metrics::{wasserstein, Slot};
use vpb_core::vectorize::{vpb_values, GridPartition};
use wasm_bindgen::prelude::*;

type Pairs = Vec<[f64; 2]>;

fn xy(p: DiagramPoint) -> [f64; 2] {
    [p.birth, p.persistence]
}

fn parse_points(json: &str) -> Result<PersistenceDiagram, String> {
    let raw: Pairs = serde_json::from_str(json).map_err(|e| format!("points: {e}"))?;
    let points = raw
        .into_iter()
        .map(|[b, p]| DiagramPoint::new(b, p).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok(PersistenceDiagram::new(1, points))
}

fn domain_for(d: &PersistenceDiagram, birth_max: f64, pers_max: f64) -> Result<Domain, String> {
    if birth_max > 0.0 && pers_max > 0.0 {
        Domain::new(birth_max, pers_max).map_err(|e| e.to_string())
    } else {
        bounding_domain(std::slice::from_ref(d), 0.0).map_err(|e| e.to_string())
    }
}

#[derive(Serialize)]
pub struct Heatmap {
    pub region: Rect,
    pub nx: usize,
    pub ny: usize,
    /// Row-major from the lower-left cell.
    pub values: Vec<f64>,
    /// `[x0, x1, y0, y1]` of each block square; empty for images.
    pub squares: Vec<[f64; 4]>,
    pub sigma: Option<f64>,
}

/// VPB of `points` (`[[birth, persistence], ...]`). A non-positive domain
/// bound selects the bounding box of the points.
pub fn vpb_heatmap(points: &str, tau: f64, nx: usize, ny: usize, birth_max: f64, pers_max: f64) -> Result<Heatmap, String> {
    let d = parse_points(points)?;
    let cfg = BlockConfig::production(tau, domain_for(&d, birth_max, pers_max)?).map_err(|e| e.to_string())?;
    let grid = GridPartition::default_for(&cfg, nx, ny).map_err(|e| e.to_string())?;
    let squares = d
        .points
        .iter()
        .map(|p| {
            let r = cfg.square(p).rect();
            [r.x0, r.x1, r.y0, r.y1]
        })
        .collect();
    Ok(Heatmap {
        region: grid.region,
        nx,
        ny,
        values: vpb_values(&cfg, &grid, &d),
        squares,
        sigma: None,
    })
}

/// Persistence image of `points` on the same kind of region; a non-positive
/// `sigma` selects the default bandwidth.
pub fn pi_heatmap(points: &str, sigma: f64, nx: usize, ny: usize, birth_max: f64, pers_max: f64) -> Result<Heatmap, String> {
    let d = parse_points(points)?;
    let domain = domain_for(&d, birth_max, pers_max)?;
    let sigma = if sigma > 0.0 { sigma } else { default_sigma(domain.pers_max, nx.max(ny)) };
    let grid = GridPartition::new(pi_region(&domain), nx, ny).map_err(|e| e.to_string())?;
    let cfg = PIConfig::new(sigma, grid, PIWeighting::Linear, domain.pers_max).map_err(|e| e.to_string())?;
    Ok(Heatmap {
        region: grid.region,
        nx,
        ny,
        values: persistence_image_values(&cfg, &d),
        squares: Vec::new(),
        sigma: Some(sigma),
    })
}

#[derive(Serialize)]
pub struct Orbit {
    pub points: Pairs,
    /// H1 diagram in `[birth, persistence]`.
    pub diagram: Pairs,
}

/// Orbit of the linked twist map and its H1 diagram under `cap`;
/// classes alive at the cap are closed there.
pub fn ltm(r: f64, length: usize, x0: f64, y0: f64, cap: f64) -> Result<Orbit, String> {
    if length > 1000 {
        return Err("length is limited to 1000 in the browser".into());
    }
    let cloud = ltm_orbit(&LTMSpec { r, x0, y0, length }).map_err(|e| e.to_string())?;
    let fcap = FiltrationCap::new(cap).map_err(|e| e.to_string())?;
    let h1 = rips_h1(&cloud, RipsOptions::new(fcap))
        .and_then(|b| b.resolve(EssentialPolicy::Cap(cap)))
        .map_err(|e| e.to_string())?;
    Ok(Orbit {
        points: (0..cloud.len()).map(|i| [cloud.point(i)[0], cloud.point(i)[1]]).collect(),
        diagram: h1.points.iter().copied().map(xy).collect(),
    })
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
pub struct Pair {
    /// Endpoint in the first diagram: a point, or an axis projection.
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub from_point: Option<usize>,
    pub to_point: Option<usize>,
}

#[derive(Serialize)]
pub struct Matching {
    pub cost: f64,
    pub pairs: Vec<Pair>,
}

/// Optimal matching of two diagrams; pad-to-pad pairs are omitted.
pub fn matching(a: &str, b: &str, p: f64) -> Result<Matching, String> {
    let (da, db) = (parse_points(a)?, parse_points(b)?);
    let m = wasserstein(&da, &db, p).map_err(|e| e.to_string())?;
    let at = |s: Slot, own: &PersistenceDiagram, other: &PersistenceDiagram| match s {
        Slot::Point(i) => (xy(own.points[i]), Some(i)),
        Slot::Projection(j) => (xy(other.points[j].axis_projection()), None),
    };
    let pairs = m
        .pairs
        .iter()
        .filter(|(x, y)| !matches!((x, y), (Slot::Projection(_), Slot::Projection(_))))
        .map(|&(x, y)| {
            let (from, from_point) = at(x, &da, &db);
            let (to, to_point) = at(y, &db, &da);
            Pair { from, to, from_point, to_point }
        })
        .collect();
    Ok(Matching { cost: m.cost, pairs })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = vpbHeatmap)]
pub fn vpb_heatmap_js(points: &str, tau: f64, nx: usize, ny: usize, birth_max: f64, pers_max: f64) -> Result<String, JsValue> {
    to_js(vpb_heatmap(points, tau, nx, ny, birth_max, pers_max))
}

#[wasm_bindgen(js_name = piHeatmap)]
pub fn pi_heatmap_js(points: &str, sigma: f64, nx: usize, ny: usize, birth_max: f64, pers_max: f64) -> Result<String, JsValue> {
    to_js(pi_heatmap(points, sigma, nx, ny, birth_max, pers_max))
}

#[wasm_bindgen(js_name = ltmOrbit)]
pub fn ltm_js(r: f64, length: usize, x0: f64, y0: f64, cap: f64) -> Result<String, JsValue> {
    to_js(ltm(r, length, x0, y0, cap))
}

#[wasm_bindgen(js_name = wassersteinMatching)]
pub fn matching_js(a: &str, b: &str, p: f64) -> Result<String, JsValue> {
    to_js(matching(a, b, p))
}
