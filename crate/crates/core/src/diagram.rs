//! Persistence diagrams in (birth, persistence) coordinates, plus CSV/JSON
//! ingestion.
//!
//! Internally every point is stored as `(birth, persistence)`. The
//! birth-death convention only exists at the file boundary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};

/// A point of a persistence diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub birth: f64,
    pub persistence: f64,
}

impl DiagramPoint {
    /// Checked constructor: both coordinates finite and nonnegative.
    pub fn new(birth: f64, persistence: f64) -> Result<Self> {
        let bad = |msg| Error::InvalidPoint {
            birth,
            persistence,
            msg,
        };
        if !birth.is_finite() || !persistence.is_finite() {
            return Err(bad("coordinates must be finite"));
        }
        if birth < 0.0 {
            return Err(bad("birth must be nonnegative"));
        }
        if persistence < 0.0 {
            return Err(bad("persistence must be nonnegative"));
        }
        Ok(Self { birth, persistence })
    }

    pub fn from_birth_death(birth: f64, death: f64) -> Result<Self> {
        Self::new(birth, death - birth)
    }

    pub fn death(&self) -> f64 {
        self.birth + self.persistence
    }

    /// Nearest point on the birth axis under the sup-norm.
    pub fn axis_projection(&self) -> Self {
        Self {
            birth: self.birth,
            persistence: 0.0,
        }
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        (self.birth - other.birth)
            .abs()
            .max((self.persistence - other.persistence).abs())
    }
}

/// A finite multiset of points tagged with a homological dimension.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub dim: usize,
    pub points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn new(dim: usize, points: Vec<DiagramPoint>) -> Self {
        Self { dim, points }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            points: Vec::new(),
        }
    }

    /// Builds a diagram from raw `(birth, persistence)` pairs, validating each.
    pub fn from_pairs(dim: usize, pairs: &[(f64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(b, p)| DiagramPoint::new(b, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiset union (same dimension assumed).
    pub fn union(&self, other: &Self) -> Self {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Self {
            dim: self.dim,
            points,
        }
    }

    fn sorted_bits(&self) -> Vec<(u64, u64)> {
        let mut v: Vec<_> = self
            .points
            .iter()
            .map(|p| (p.birth.to_bits(), p.persistence.to_bits()))
            .collect();
        v.sort_unstable();
        v
    }

    pub fn total_persistence(&self) -> f64 {
        self.points.iter().map(|p| p.persistence).sum()
    }
}

impl PartialEq for PersistenceDiagram {
    /// Multiset equality within the same dimension.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.sorted_bits() == other.sorted_bits()
    }
}

/// The bounding box `[0, birth_max] x [0, pers_max]` of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub birth_max: f64,
    pub pers_max: f64,
}

impl Domain {
    pub fn new(birth_max: f64, pers_max: f64) -> Result<Self> {
        if !(birth_max > 0.0 && birth_max.is_finite()) {
            return Err(invalid_param("birth_max", "must be positive and finite"));
        }
        if !(pers_max > 0.0 && pers_max.is_finite()) {
            return Err(invalid_param("pers_max", "must be positive and finite"));
        }
        Ok(Self {
            birth_max,
            pers_max,
        })
    }

    pub fn contains(&self, p: &DiagramPoint) -> bool {
        p.birth <= self.birth_max && p.persistence <= self.pers_max
    }

    /// `[0, birth_max] x [0, pers_max]`.
    pub fn omega(&self) -> Rect {
        Rect::new(0.0, self.birth_max, 0.0, self.pers_max)
    }

    /// The enlarged box `[-pers_max, birth_max + pers_max] x [0, 2 pers_max]`
    /// that contains every compliant square.
    pub fn omega_prime(&self) -> Rect {
        Rect::new(
            -self.pers_max,
            self.birth_max + self.pers_max,
            0.0,
            2.0 * self.pers_max,
        )
    }
}

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    /// Intersection, or `None` when it has zero area.
    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.x0.max(other.x0),
            self.x1.min(other.x1),
            self.y0.max(other.y0),
            self.y1.min(other.y1),
        );
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// Smallest domain containing every point, inflated by `1 + margin`.
pub fn bounding_domain(diagrams: &[PersistenceDiagram], margin: f64) -> Result<Domain> {
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(invalid_param("margin", "must be nonnegative"));
    }
    let mut any = false;
    let (mut bmax, mut pmax) = (0.0f64, 0.0f64);
    for p in diagrams.iter().flat_map(|d| d.points.iter()) {
        any = true;
        bmax = bmax.max(p.birth);
        pmax = pmax.max(p.persistence);
    }
    if !any {
        return Err(Error::Domain("all diagrams are empty".into()));
    }
    if bmax == 0.0 && pmax == 0.0 {
        return Err(Error::Domain("all coordinates are zero".into()));
    }
    let scale = 1.0 + margin;
    // A degenerate axis (all births 0, or all persistences 0) still needs a
    // positive extent; borrow the other axis's size.
    let bmax = if bmax > 0.0 { bmax } else { pmax };
    let pmax = if pmax > 0.0 { pmax } else { bmax };
    Domain::new(bmax * scale, pmax * scale)
}

/// Pads each diagram with the axis projections of the other's points so
/// both have cardinality `|d1| + |d2|`.
pub fn pad_to_cardinality(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
) -> (PersistenceDiagram, PersistenceDiagram) {
    let mut a = d1.clone();
    let mut b = d2.clone();
    a.points
        .extend(d2.points.iter().map(DiagramPoint::axis_projection));
    b.points
        .extend(d1.points.iter().map(DiagramPoint::axis_projection));
    (a, b)
}

/// Coordinate convention of the third CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordFormat {
    BirthDeath,
    BirthPersistence,
}

/// What to do with classes that never die (`death = inf`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "cap")]
pub enum EssentialPolicy {
    #[default]
    Drop,
    /// Replace the infinite death by the filtration cap.
    Cap(f64),
}

/// Diagrams keyed by homological dimension.
pub type DiagramSet = BTreeMap<usize, PersistenceDiagram>;

fn parse_field(s: &str, line: usize, what: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" | "Inf" | "INF" | "+inf" | "Infinity" | "infinity" => Ok(f64::INFINITY),
        _ => t.parse::<f64>().map_err(|_| Error::Parse {
            line,
            msg: format!("non-numeric {what} field `{t}`"),
        }),
    }
}

/// Parses diagram CSV text. A header row (`dim,birth,death` or
/// `dim,birth,persistence`) is optional; when present it must agree with
/// `format`.
pub fn parse_diagram_str(
    text: &str,
    format: CoordFormat,
    essential: EssentialPolicy,
) -> Result<DiagramSet> {
    let mut out = DiagramSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        if line == 1 && fields[0].eq_ignore_ascii_case("dim") {
            let declared = match fields[2].to_ascii_lowercase().as_str() {
                "death" => CoordFormat::BirthDeath,
                "persistence" => CoordFormat::BirthPersistence,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown header column `{other}`"),
                    })
                }
            };
            if declared != format {
                return Err(Error::Parse {
                    line,
                    msg: format!("header declares {declared:?} but {format:?} was requested"),
                });
            }
            continue;
        }
        let dim = fields[0].parse::<usize>().map_err(|_| Error::Parse {
            line,
            msg: format!("non-numeric dim field `{}`", fields[0]),
        })?;
        let a = parse_field(fields[1], line, "birth")?;
        let b = parse_field(fields[2], line, "third")?;
        if !a.is_finite() {
            return Err(Error::Parse {
                line,
                msg: "birth must be finite".into(),
            });
        }
        let mut pers = match format {
            CoordFormat::BirthDeath => {
                if b < a {
                    return Err(Error::DeathBeforeBirth { line });
                }
                b - a
            }
            CoordFormat::BirthPersistence => b,
        };
        if pers.is_infinite() {
            match essential {
                EssentialPolicy::Drop => continue,
                EssentialPolicy::Cap(cap) => pers = (cap - a).max(0.0),
            }
        }
        let point = DiagramPoint::new(a, pers).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        out.entry(dim)
            .or_insert_with(|| PersistenceDiagram::empty(dim))
            .points
            .push(point);
    }
    Ok(out)
}

pub fn parse_diagram(
    path: impl AsRef<Path>,
    format: CoordFormat,
    essential: EssentialPolicy,
) -> Result<DiagramSet> {
    let text = std::fs::read_to_string(path)?;
    parse_diagram_str(&text, format, essential)
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders diagrams as CSV in the requested coordinate convention.
pub fn to_csv<'a>(
    diagrams: impl IntoIterator<Item = &'a PersistenceDiagram>,
    format: CoordFormat,
) -> String {
    let mut s = String::from(match format {
        CoordFormat::BirthDeath => "dim,birth,death\n",
        CoordFormat::BirthPersistence => "dim,birth,persistence\n",
    });
    for d in diagrams {
        for p in &d.points {
            let third = match format {
                CoordFormat::BirthDeath => p.death(),
                CoordFormat::BirthPersistence => p.persistence,
            };
            let _ = writeln!(s, "{},{},{}", d.dim, fmt_f64(p.birth), fmt_f64(third));
        }
    }
    s
}

#[derive(Serialize, Deserialize)]
struct JsonDiagram {
    dim: usize,
    points: Vec<[f64; 2]>,
}

/// JSON form: `[{"dim": 1, "points": [[b, p], ...]}, ...]`.
pub fn to_json<'a>(diagrams: impl IntoIterator<Item = &'a PersistenceDiagram>) -> Result<String> {
    let v: Vec<JsonDiagram> = diagrams
        .into_iter()
        .map(|d| JsonDiagram {
            dim: d.dim,
            points: d.points.iter().map(|p| [p.birth, p.persistence]).collect(),
        })
        .collect();
    Ok(serde_json::to_string(&v)?)
}

pub fn from_json(text: &str) -> Result<DiagramSet> {
    let v: Vec<JsonDiagram> = serde_json::from_str(text)?;
    let mut out = DiagramSet::new();
    for jd in v {
        let entry = out
            .entry(jd.dim)
            .or_insert_with(|| PersistenceDiagram::empty(jd.dim));
        for [b, p] in jd.points {
            entry.points.push(DiagramPoint::new(b, p)?);
        }
    }
    Ok(out)
}
